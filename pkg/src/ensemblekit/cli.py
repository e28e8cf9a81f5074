"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver/capacity diagnostics or
failed theorem checks (partial outputs are still written).
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import classify as cl
from . import sampler as sp
from .equilibria import (
    CANONICAL,
    CANONICAL2,
    MICRO2,
    MICROCANONICAL,
    MIXED,
    equilibrium_set,
    microcanonical_set,
    set_distance,
    Relation,
)
from .errors import (
    ArgumentError,
    CapacityError,
    ConfigurationError,
    DomainError,
    FeasibilityError,
    ModelFormatError,
    ResolutionError,
    SolverDiagnostic,
    StatisticalError,
)
from .fileio import CURVE_COLUMNS, csv_text, curve_rows, json_text, read_csv, unclean
from .lft import SampledCurve, transform_values
from .model import repr_value, validate_model
from .models import load_model
from .optimize import SolverOptions
from .svg import line_chart
from .thermo import entropy_curve, free_energy_curve

INPUT_ERRORS = (ArgumentError, ConfigurationError, DomainError, ModelFormatError, ValueError, OSError,
                json.JSONDecodeError, KeyError)
DIAGNOSTICS = (SolverDiagnostic, CapacityError, StatisticalError, ResolutionError, FeasibilityError)


class UsageError(Exception):
    def __init__(self, message, usage):
        self.usage = usage
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


class Diagnostic(Exception):
    """Raised after outputs are written when the run still carries a diagnostic."""


# --------------------------------------------------------------------------- parsing helpers


def parse_grid(text):
    """'lo:hi:count' -> evenly spaced grid (count >= 2, lo < hi)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ArgumentError(f"grid {text!r} must look like lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ArgumentError(f"grid {text!r} must look like lo:hi:count") from None
    if count < 2 or not lo < hi:
        raise ArgumentError(f"grid {text!r} needs count >= 2 and lo < hi")
    return np.linspace(lo, hi, count)


def parse_values(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}") from None


def _join_negative_values(argv):
    # argparse reads '-0.5:0:11' as an option; glue such values onto their flag
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a.startswith("--") and "=" not in a and i + 1 < len(argv) and re.match(r"^-[\d.]", argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _load(args):
    model = load_model(args.model)
    problems = validate_model(model)
    if problems:
        raise ModelFormatError(problems[0].split(":", 1)[0], problems[0].split(":", 1)[-1].strip())
    return model


def _options(args):
    return SolverOptions(seed=args.seed)


def _fmt_for(args, default):
    if args.format:
        return args.format
    if args.out:
        ext = Path(args.out).suffix.lower().lstrip(".")
        if ext in ("csv", "json", "svg"):
            return ext
    return default


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- subcommands


def cmd_entropy(args):
    model = _load(args)
    grid = parse_grid(args.u_grid) if args.u_grid else cl.default_u_grid(model)
    if model.sigma != 1:
        raise ConfigurationError("entropy curves are one-dimensional; use `mixed` for sigma = 2")
    curve = entropy_curve(model, grid, _options(args))
    ctx = cl.context_from_values(grid, curve.values, certified=model.is_tabular)
    rows = curve_rows(ctx)
    # failed points were dropped from the hull context; put them back as nan rows
    if len(rows) != len(grid):
        by_u = {r[0]: r for r in rows}
        rows = [by_u.get(u, (u, np.nan, np.nan, np.nan, np.nan, False, False)) for u in grid]
    fmt = _fmt_for(args, "csv")
    if fmt == "json":
        _emit(args, json_text({
            "schema_version": 1,
            "columns": list(CURVE_COLUMNS),
            "rows": [list(r) for r in rows],
            "diagnostics": curve.diagnostics(),
        }))
    elif fmt == "csv":
        _emit(args, csv_text(CURVE_COLUMNS, rows))
    else:
        u = [r[0] for r in rows]
        _emit(args, line_chart([("s", u, [r[1] for r in rows]), ("s**", u, [r[2] for r in rows])],
                               "u", "entropy", f"entropy of {model.kind}"))
    failed = [e for e in curve.errors if e]
    if failed:
        raise Diagnostic(f"{len(failed)} grid point(s) failed: {failed[0]}")


def cmd_free_energy(args):
    model = _load(args)
    betas = parse_grid(args.beta_grid)
    if model.sigma != 1:
        raise ConfigurationError("free-energy sweeps are one-dimensional; use `mixed` for sigma = 2")
    curve = free_energy_curve(model, betas, _options(args))
    header = ["beta", "phi"]
    cols = [betas, curve.values]
    if args.u_grid:
        grid = parse_grid(args.u_grid)
        s = entropy_curve(model, grid, _options(args))
        keep = ~np.isnan(s.values)
        star = transform_values(SampledCurve(grid[keep], s.values[keep]), betas)
        header += ["s_star", "gap"]
        cols += [star, np.abs(curve.values - star)]
    rows = list(zip(*cols))
    fmt = _fmt_for(args, "csv")
    if fmt == "json":
        _emit(args, json_text({"schema_version": 1, "columns": header, "rows": [list(r) for r in rows],
                               "diagnostics": curve.diagnostics()}))
    elif fmt == "csv":
        _emit(args, csv_text(header, rows))
    else:
        series = [(name, betas, col) for name, col in zip(header[1:3], cols[1:3])]
        _emit(args, line_chart(series, "beta", "free energy", f"free energy of {model.kind}"))
    failed = [e for e in curve.errors if e]
    if failed:
        raise Diagnostic(f"{len(failed)} grid point(s) failed: {failed[0]}")


def _report_csv(report):
    header = ["u", "s", "s_hull", "in_C", "in_T", "label", "witness", "beta_plus", "beta_minus", "checks_passed"]
    rows = []
    for r in report.records:
        lo, hi = r.interval if r.interval is not None else (None, None)
        rows.append((r.u, r.s, r.s_hull, r.in_C, r.in_T, r.label, r.witness, lo, hi, r.passed))
    return csv_text(header, rows)


def _write_report(args, report):
    fmt = _fmt_for(args, "json")
    if fmt == "json":
        _emit(args, json_text(report.to_dict()))
    elif fmt == "csv":
        _emit(args, _report_csv(report))
    else:
        u = [r.u for r in report.records]
        _emit(args, line_chart([("s", u, [r.s for r in report.records]),
                                ("s**", u, [r.s_hull for r in report.records])],
                               "u", "entropy", f"classification of {report.metadata['model_kind']}"))


def cmd_classify(args):
    model = _load(args)
    if model.sigma != 1:
        raise ConfigurationError("classify handles sigma = 1; use `mixed` for sigma = 2")
    grid = parse_grid(args.u_grid) if args.u_grid else None
    betas = parse_grid(args.beta_grid) if args.beta_grid else None
    report = cl.classify_curve(model, grid, betas, _options(args), verify=not args.no_verify)
    _write_report(args, report)


def cmd_macrostates(args):
    model = _load(args)
    tag = {"canonical": CANONICAL, "microcanonical": MICROCANONICAL, "mixed": MIXED,
           "canonical2": CANONICAL2, "micro2": MICRO2}[args.ensemble]
    need = {CANONICAL: ["beta"], MICROCANONICAL: ["u"], MIXED: ["beta1", "u2"],
            CANONICAL2: ["beta1", "beta2"], MICRO2: ["u1", "u2"]}[tag]
    params = {}
    for k in need:
        v = getattr(args, k)
        if v is None:
            raise ArgumentError(f"--{k.replace('_', '-')} is required for the {args.ensemble} ensemble")
        vals = parse_values(v)
        params[k] = vals if k in ("beta", "u") else vals[0]
    if _fmt_for(args, "json") != "json":
        raise ArgumentError("macrostates are written as json")
    eq = equilibrium_set(model, tag, params, _options(args))
    d = eq.to_dict()
    d["schema_version"] = 1
    d["conserved_values"] = [repr_value(model, x).tolist() for x in eq.members]
    _emit(args, json_text(d))


def cmd_mixed(args):
    model = _load(args)
    if model.sigma != 2:
        raise ConfigurationError("mixed classification needs a model with sigma = 2")
    if args.mode == "fixed-beta1":
        if args.beta1 is None:
            raise ArgumentError("--beta1 is required with --mode fixed-beta1")
        mode = cl.FixedBeta1(float(args.beta1))
    else:
        if args.u2 is None:
            raise ArgumentError("--u2 is required with --mode fixed-u2")
        mode = cl.FixedU2(float(args.u2))
    grid = parse_grid(args.grid) if args.grid else None
    betas = parse_grid(args.beta_grid) if args.beta_grid else None
    report = cl.classify_mixed(model, mode, grid, betas, _options(args))
    _write_report(args, report)


def cmd_sample(args):
    model = _load(args)
    kw = {"ensemble": args.ensemble, "a_n": args.n, "sweeps": args.sweeps, "burn_in": args.burn_in,
          "seed": args.seed}
    if args.beta is not None:
        kw["beta"] = tuple(parse_values(args.beta))
    if args.u is not None:
        kw["u"] = tuple(parse_values(args.u))
    if args.r is not None:
        kw["r"] = args.r
    if args.beta1 is not None:
        kw["beta1"] = float(args.beta1)
    if args.u2 is not None:
        kw["u2"] = float(args.u2)
    config = sp.ChainConfig(**kw)
    fmt = _fmt_for(args, "json")
    if fmt == "csv":
        raise ArgumentError("chain summaries are json (or svg); per-sweep rows go to --trace")
    result = sp.run_chain(model, config)
    if fmt == "svg":
        sweeps = np.arange(len(result.energies))
        _emit(args, line_chart([(f"H{k + 1}", sweeps, result.energies[:, k]) for k in range(model.sigma)],
                               "sweep", "H_n", f"{config.ensemble} chain on {model.kind}"))
    else:
        _emit(args, result.to_json())
    if args.trace:
        header = ["block"] + [f"H{k + 1}" for k in range(model.sigma)]
        header += [f"count_{c}_{a}" for c in range(model.q) for a in range(model.m)]
        Path(args.trace).write_text(csv_text(header, result.trace_rows()))
    if result.irreducible is False:
        sys.stderr.write(
            f"warning: r = {config.r:g} is below the single-site energy step {result.r_min:.4g}; "
            "the shell chain may not be irreducible\n"
        )


# --------------------------------------------------------------------------- verify


def _row(suite, item, passed, evidence, advisory=False):
    return {"suite": suite, "item": item, "passed": bool(passed), "advisory": bool(advisory), "evidence": evidence}


def _report_rows(report):
    rows = []
    for u, label, name, passed, ev, counted in report.check_table():
        if counted:
            rows.append(_row("classification", f"u={u:.6g} {label}: {name}", passed, ev,
                             not report.metadata.get("certified", False)))
    for msg in report.coherence_violations():
        rows.append(_row("coherence", msg, False, msg))
    if not report.coherence_violations():
        rows.append(_row("coherence", "label/flag invariants", True, f"{len(report.records)} records"))
    return rows


def _suite_sigma1(model, args):
    opts = _options(args)
    grid = parse_grid(args.u_grid) if args.u_grid else None
    betas = parse_grid(args.beta_grid) if args.beta_grid else None
    report = cl.classify_curve(model, grid, betas, opts)
    rows = _report_rows(report)
    advisory = not model.is_tabular
    ctx = cl.context_from_values([r.u for r in report.records], [r.s for r in report.records],
                                 certified=model.is_tabular)
    beta_grid = np.linspace(report.metadata["beta_grid"]["lo"], report.metadata["beta_grid"]["hi"],
                            report.metadata["beta_grid"]["count"])
    # canonical members are microcanonical at their own conserved value
    sample = beta_grid if model.is_tabular else beta_grid[:: max(1, len(beta_grid) // 11)]
    bad = 0
    for b in sample:
        eb = equilibrium_set(model, CANONICAL, {"beta": [b]}, opts)
        for x in eb.members:
            eu = microcanonical_set(model, repr_value(model, x), opts)
            one = type(eb)([x], eb.objective, eb.tag, eb.params, eb.certified)
            if set_distance(one, eu).relation not in (Relation.EQUAL, Relation.A_IN_B):
                bad += 1
    rows.append(_row("canonical-in-microcanonical", f"{len(sample)} beta values", bad == 0,
                     f"{bad} canonical member(s) outside their microcanonical set", advisory))
    # decomposition at every hull segment slope
    for slope in ctx.hull.segment_slopes():
        try:
            dec = cl.decompose_canonical(model, slope, ctx, opts)
        except ResolutionError as exc:
            rows.append(_row("decomposition", f"beta={slope:.6g}", False, str(exc), advisory))
            continue
        for c in dec.checks:
            rows.append(_row("decomposition", f"beta={slope:.6g}: {c.name}", c.passed, c.evidence, c.advisory))
    # duality and hull laws
    phi = free_energy_curve(model, beta_grid[:: max(1, len(beta_grid) // 41)], opts)
    star = transform_values(ctx.curve, phi.grid)
    gap = float(np.nanmax(np.abs(phi.values - star)))
    tol = 1e-12 if model.is_tabular else 1e-3
    rows.append(_row("duality", "phi = s*", gap <= tol, f"max |phi - s*| = {gap:.3g} (tolerance {tol:g})", advisory))
    hull = ctx.hull
    fin = ctx.curve.finite
    ok = bool(np.all(hull.values[fin] >= ctx.curve.f[fin] - 1e-12))
    rows.append(_row("hull", "s** >= s", ok, "checked on every finite grid point"))
    b = phi.grid
    v = phi.values
    mid_ok = bool(np.all(v[1:-1] >= 0.5 * (v[:-2] + v[2:]) - 1e-9)) if len(v) > 2 else True
    rows.append(_row("hull", "phi concave (midpoint)", mid_ok, f"{len(b)} beta values"))
    return rows, report


def _suite_sigma2(model, args):
    opts = _options(args)
    rows = []
    if model.is_tabular:
        u2s = np.unique(model.table_H[1])
    else:
        from .optimize import repr_range

        lo, hi = repr_range(model)[1]
        u2s = np.linspace(lo, hi, 5)[1:-1]
    beta1s = parse_grid(args.beta_grid)[:: max(1, 1)] if args.beta_grid else np.linspace(-2, 2, 5)
    if len(beta1s) > 21:
        beta1s = beta1s[:: len(beta1s) // 21]
    bad = 0
    for b1 in beta1s:
        for u2 in u2s:
            if not cl.verify_mixed_equality(model, b1, u2, opts).passed:
                bad += 1
    rows.append(_row("mixed-equality", f"{len(beta1s)} x {len(u2s)} (beta1, u2) pairs", bad == 0,
                     f"{bad} mismatches", not model.is_tabular))
    if model.is_tabular:
        u1s = np.unique(model.table_H[0])
        u2g = np.unique(model.table_H[1])
        b = np.linspace(-3, 3, 13)
        g1 = max(cl.mixed_legendre_gap(model, b1, u2g, b, opts) for b1 in beta1s)
        rows.append(_row("mixed-duality", "phi_beta1 = (s_beta1)*", g1 <= 1e-12, f"max gap {g1:.3g}"))
        g2 = max(cl.mixed_u2_legendre_gap(model, u2, u1s, b, opts) for u2 in u2s)
        rows.append(_row("mixed-duality", "phi^u2 = (s^u2)*", g2 <= 1e-12, f"max gap {g2:.3g}"))
    for b1 in beta1s[:: max(1, len(beta1s) // 3)]:
        rep = cl.classify_mixed(model, cl.FixedBeta1(float(b1)), None, None, opts)
        rows += [dict(r, suite="mixed-fixed-beta1") for r in _report_rows(rep)]
    return rows, None


def cmd_verify(args):
    if args.report:
        data = json.loads(Path(args.report).read_text())
        report = cl.ClassificationReport.from_dict(data)
        rows = _report_rows(report)
    else:
        if not args.model:
            raise ArgumentError("verify needs --model or --report")
        model = _load(args)
        rows, _ = (_suite_sigma1 if model.sigma == 1 else _suite_sigma2)(model, args)
    lines = []
    width = max(len(r["suite"]) for r in rows)
    for r in rows:
        status = "PASS" if r["passed"] else ("ADVISORY" if r["advisory"] else "FAIL")
        lines.append(f"{status:<8} {r['suite']:<{width}}  {r['item']}  [{r['evidence']}]")
    hard = sum(1 for r in rows if not r["passed"] and not r["advisory"])
    soft = sum(1 for r in rows if not r["passed"] and r["advisory"])
    lines.append(f"summary: {sum(r['passed'] for r in rows)}/{len(rows)} passed, {hard} failed, {soft} advisory")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(json_text({"schema_version": 1, "checks": rows}))
    if hard:
        raise Diagnostic(f"{hard} theorem check(s) failed")


# --------------------------------------------------------------------------- plot


def cmd_plot(args):
    path = Path(args.input)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        if "records" in data:
            report = cl.ClassificationReport.from_dict(data)
            cols = {"u": [r.u for r in report.records], "s": [r.s for r in report.records],
                    "s_hull": [r.s_hull for r in report.records]}
        elif "columns" in data:
            cols = {c: [unclean(row[i]) for row in data["rows"]] for i, c in enumerate(data["columns"])}
        else:
            raise ArgumentError(f"{path}: no plottable columns")
        header = list(cols)
    else:
        header, cols = read_csv(path)
    x = args.x or header[0]
    ys = args.y.split(",") if args.y else [h for h in header[1:3] if h in cols]
    for c in [x, *ys]:
        if c not in cols:
            raise ArgumentError(f"column {c!r} not in {path} (have {', '.join(header)})")

    def num(v):
        return np.nan if v is None or isinstance(v, str) else float(v)

    X = np.array([num(v) for v in cols[x]])
    series = [(c, X, np.array([num(v) for v in cols[c]])) for c in ys]
    svg = line_chart(series, xlabel=x, ylabel=", ".join(ys), title=args.title or path.stem)
    _emit(args, svg)


# --------------------------------------------------------------------------- driver


def build_parser():
    p = _Parser(prog="ensemblekit", description="Ensemble equivalence toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp_, model=True):
        if model:
            sp_.add_argument("--model", required=True, help="model JSON file or builtin:<name>")
        sp_.add_argument("--seed", type=int, default=0)
        sp_.add_argument("--out", help="output file (stdout when omitted)")
        sp_.add_argument("--format", choices=("csv", "json", "svg"))

    e = sub.add_parser("entropy", help="microcanonical entropy curve with hull and support flags")
    common(e)
    e.add_argument("--u-grid")
    e.set_defaults(fn=cmd_entropy)

    f = sub.add_parser("free-energy", help="canonical free energy curve")
    common(f)
    f.add_argument("--beta-grid", required=True)
    f.add_argument("--u-grid", help="also report the transform of the sampled entropy")
    f.set_defaults(fn=cmd_free_energy)

    c = sub.add_parser("classify", help="per-point equivalence labels and checks")
    common(c)
    c.add_argument("--u-grid")
    c.add_argument("--beta-grid")
    c.add_argument("--no-verify", action="store_true", help="labels only, skip set comparisons")
    c.set_defaults(fn=cmd_classify)

    m = sub.add_parser("macrostates", help="equilibrium macrostate set of one ensemble")
    common(m)
    m.add_argument("--ensemble", required=True, choices=("canonical", "microcanonical", "mixed", "canonical2", "micro2"))
    for k in ("beta", "u", "beta1", "beta2", "u1", "u2"):
        m.add_argument(f"--{k}")
    m.set_defaults(fn=cmd_macrostates)

    x = sub.add_parser("mixed", help="classification for sigma = 2 mixed ensembles")
    common(x)
    x.add_argument("--mode", required=True, choices=("fixed-beta1", "fixed-u2"))
    x.add_argument("--beta1")
    x.add_argument("--u2")
    x.add_argument("--grid")
    x.add_argument("--beta-grid")
    x.set_defaults(fn=cmd_mixed)

    s = sub.add_parser("sample", help="Monte Carlo chain")
    common(s)
    s.add_argument("--ensemble", required=True, choices=sp.ENSEMBLES)
    s.add_argument("--beta")
    s.add_argument("--u")
    s.add_argument("--r", type=float)
    s.add_argument("--beta1")
    s.add_argument("--u2")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--sweeps", type=int, required=True)
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--trace", help="CSV of per-sweep energies and counts")
    s.set_defaults(fn=cmd_sample)

    v = sub.add_parser("verify", help="run the theorem checks and print a pass/fail table")
    v.add_argument("--model")
    v.add_argument("--report", help="re-check a saved classification report")
    v.add_argument("--u-grid")
    v.add_argument("--beta-grid")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="JSON file with the check table")
    v.set_defaults(fn=cmd_verify)

    pl = sub.add_parser("plot", help="render a curve CSV or report JSON to SVG")
    pl.add_argument("--input", required=True)
    pl.add_argument("--x")
    pl.add_argument("--y", help="comma-separated column names")
    pl.add_argument("--title")
    pl.add_argument("--out")
    pl.set_defaults(fn=cmd_plot)
    return p


def run_command(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(list(argv)))
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        args.fn(args)
    except Diagnostic as exc:
        sys.stderr.write(f"diagnostic: {exc}\n")
        return 2
    except DIAGNOSTICS as exc:
        sys.stderr.write(f"diagnostic: {type(exc).__name__}: {exc}\n")
        return 2
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
