"""CSV/JSON writers and readers for curves, reports and chains."""

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import ArgumentError

CURVE_COLUMNS = ("u", "s", "s_hull", "beta_minus", "beta_plus", "in_C", "in_T")


def fmt(x):
    """Locale-free, round-trippable text for one cell."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x) + 0.0
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def parse_cell(text):
    t = text.strip()
    if t == "true":
        return True
    if t == "false":
        return False
    if t == "":
        return None
    try:
        return float(t)
    except ValueError:
        return t


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path):
    """Return (header, columns) where columns maps name -> list of parsed cells."""
    text = Path(path).read_text()
    reader = list(csv.reader(io.StringIO(text)))
    if not reader:
        raise ArgumentError(f"{path}: empty CSV")
    header = reader[0]
    cols = {h: [] for h in header}
    for line in reader[1:]:
        if len(line) != len(header):
            raise ArgumentError(f"{path}: row has {len(line)} cells, header has {len(header)}")
        for h, v in zip(header, line):
            cols[h].append(parse_cell(v))
    return header, cols


def curve_rows(ctx):
    """Rows of the entropy curve CSV from a hull context."""
    from .lft import support_tests

    rows = []
    c, h = ctx.curve, ctx.hull
    for i, u in enumerate(c.u):
        sup = support_tests(c, h, u, ctx.eps_c, ctx.delta_t)
        rows.append((u, c.f[i], h.values[i], h.beta_minus[i], h.beta_plus[i], sup.in_C, sup.in_T))
    return rows


def json_text(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj) + 0.0
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def unclean(x):
    """Inverse of the non-finite encoding used in JSON files."""
    if x == "nan":
        return float("nan")
    if x == "inf":
        return float("inf")
    if x == "-inf":
        return float("-inf")
    return x
