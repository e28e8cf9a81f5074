"""Minimal standalone SVG line charts: axes, ticks, up to a few series, legend."""

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((k * mag for k in (1, 2, 5, 10) if k * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + 0.5 * step, step) if lo - 1e-12 <= v <= hi + 1e-12]


def _label(v):
    return f"{v:.4g}"


def line_chart(series, xlabel="", ylabel="", title="", width=640, height=420):
    """``series`` is a list of (name, x, y); non-finite y values break the line."""
    pad_l, pad_r, pad_t, pad_b = 70, 20, 40, 55
    xs = np.concatenate([np.asarray(x, float) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y, float) for _, _, y in series])
    fin = np.isfinite(ys)
    x0, x1 = float(np.min(xs)), float(np.max(xs))
    y0, y1 = (float(ys[fin].min()), float(ys[fin].max())) if fin.any() else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    margin = 0.05 * (y1 - y0)
    y0, y1 = y0 - margin, y1 + margin
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{pad_t + ph}" x2="{X:.2f}" y2="{pad_t + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{pad_t + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{_label(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        out.append(f'<line x1="{pad_l - 5}" y1="{Y:.2f}" x2="{pad_l}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{pad_l - 8}" y="{Y + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{_label(t)}</text>')
    out.append(f'<text x="{pad_l + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{pad_t + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {pad_t + ph / 2:.1f})">{escape(ylabel)}</text>')
    for k, (name, x, y) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        run = []
        runs = []
        for xi, yi in zip(x, y):
            if np.isfinite(yi):
                run.append(f"{px(xi):.2f},{py(yi):.2f}")
            elif run:
                runs.append(run)
                run = []
        if run:
            runs.append(run)
        dash = ' stroke-dasharray="6,4"' if k % 2 else ""
        for r in runs:
            if len(r) == 1:
                cx, cy = r[0].split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>')
            else:
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{dash} points="{" ".join(r)}"/>')
        ly = pad_t + 16 + 18 * k
        out.append(f'<line x1="{pad_l + pw - 130}" y1="{ly}" x2="{pad_l + pw - 105}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{pad_l + pw - 100}" y="{ly + 4}" font-family="sans-serif" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
