"""Ensemble (non)equivalence classification and theorem checks.

A grid point ``u`` is labelled from the geometry of the sampled entropy:

* ``Full``           -- a supporting line touches the graph only at ``u``;
* ``Partial``        -- every supporting line also touches elsewhere;
* ``Nonequivalent``  -- ``s(u)`` lies strictly below its concave hull;
* ``Boundary``       -- first or last finite grid point of the domain;
* ``Infeasible``     -- ``s(u) = -inf``.

Each label is then checked against equilibrium sets computed independently:
``Full`` needs ``E^u = E_beta`` at the witness slope, ``Partial`` needs
``E^u`` to be a proper subset of ``E_beta`` across the superdifferential, and
``Nonequivalent`` needs ``E^u`` to be disjoint from every ``E_beta``.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .equilibria import (
    EquilibriumSet,
    Relation,
    canonical2_set,
    canonical_set,
    group_by_value,
    micro2_set,
    microcanonical_set,
    mixed_set,
    set_distance,
)
from .errors import ArgumentError, ResolutionError
from .lft import SampledCurve, concave_hull, default_tolerance, probe_slopes, support_tests
from .model import rate_value, repr_value
from .models import model_to_dict
from .optimize import TOL_DEG, TOL_FEAS, minimize_constrained
from .thermo import (
    canonical_part_free_energy,
    entropy_curve,
    mixed_entropy_fixed_beta1,
    mixed_entropy_fixed_u2,
    repr_range,
)

FULL = "Full"
PARTIAL = "Partial"
NONEQUIVALENT = "Nonequivalent"
BOUNDARY = "Boundary"
INFEASIBLE = "Infeasible"

SCHEMA_VERSION = 1


@dataclass
class HullContext:
    curve: SampledCurve
    hull: object
    eps_c: float
    delta_t: float
    certified: bool

    @property
    def step(self):
        return float(np.max(np.diff(self.curve.u)))

    def finite_range(self):
        idx = np.flatnonzero(self.curve.finite)
        return int(idx[0]), int(idx[-1])

    def gamma(self, i):
        """Grid point i lies on its concave hull (s = s** within eps_c)."""
        f = self.curve.f[i]
        return bool(np.isfinite(f) and abs(f - self.hull.values[i]) <= self.eps_c)


def context_from_values(u, s, certified=True, eps_c=None, delta_t=None):
    """Hull context from sampled entropy values; NaN (failed) points are dropped."""
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    keep = ~np.isnan(s)
    curve = SampledCurve(u[keep], s[keep])
    tol = default_tolerance(curve)
    return HullContext(
        curve,
        concave_hull(curve),
        tol if eps_c is None else eps_c,
        tol if delta_t is None else delta_t,
        certified,
    )


def default_u_grid(model, count=101):
    """Distinct H values for tabular models; an even grid over the attained range otherwise."""
    if model.is_tabular:
        return np.unique(model.table_H[0])
    lo, hi = repr_range(model)[0]
    return np.linspace(lo, hi, count)


def hull_context(model, u_grid=None, options=None):
    grid = default_u_grid(model) if u_grid is None else np.asarray(u_grid, dtype=float)
    curve = entropy_curve(model, grid, options)
    return context_from_values(grid, curve.values, certified=model.is_tabular)


def default_beta_grid(ctx, count=1000):
    """Evenly spaced slopes on [-b, b] with b = 10 * (largest finite hull slope magnitude), b >= 1."""
    slopes = ctx.hull.segment_slopes()
    span = float(np.max(np.abs(slopes))) if slopes.size else 0.0
    if slopes.size > 1:
        span = max(span, float(slopes.max() - slopes.min()))
    bmax = 10.0 * max(span, 0.1)
    return np.linspace(-bmax, bmax, count)


# --------------------------------------------------------------------------- records


@dataclass
class CheckResult:
    name: str
    passed: bool
    evidence: str
    advisory: bool = False


@dataclass
class PointRecord:
    u: float
    s: float
    s_hull: float
    in_C: bool
    in_T: bool
    label: str
    support_label: str
    witness: float | None
    interval: tuple | None
    boundary: bool
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        d = asdict(self)
        d["s"] = _num(self.s)
        d["s_hull"] = _num(self.s_hull)
        d["interval"] = None if self.interval is None else [_num(x) for x in self.interval]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["s"] = _unnum(d["s"])
        d["s_hull"] = _unnum(d["s_hull"])
        d["interval"] = None if d["interval"] is None else tuple(_unnum(x) for x in d["interval"])
        d["checks"] = [CheckResult(**c) for c in d["checks"]]
        return cls(**d)


def _num(x):
    if x is None:
        return None
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x):
    return float(x) if x is not None else None


def classify_point(model, u, ctx):
    """Label one grid point from the support tests on the sampled entropy."""
    try:
        i = ctx.curve.index_of(u)
    except ArgumentError:
        raise ArgumentError(f"u = {u!r} is not on the classification grid") from None
    f = ctx.curve.f[i]
    lo, hi = ctx.finite_range()
    if not np.isfinite(f):
        return PointRecord(float(ctx.curve.u[i]), f, ctx.hull.values[i], False, False,
                           INFEASIBLE, INFEASIBLE, None, None, False)
    sup = support_tests(ctx.curve, ctx.hull, ctx.curve.u[i], ctx.eps_c, ctx.delta_t)
    if sup.in_T:
        label = FULL
    elif sup.in_C:
        label = PARTIAL
    else:
        label = NONEQUIVALENT
    return PointRecord(
        u=float(ctx.curve.u[i]),
        s=float(f),
        s_hull=float(ctx.hull.values[i]),
        in_C=sup.in_C,
        in_T=sup.in_T,
        label=label,
        support_label=label,
        witness=sup.witness,
        interval=sup.interval,
        boundary=i in (lo, hi),
    )


class _SetCache:
    """Memoized canonical-side sets keyed by slope."""

    def __init__(self, fn):
        self.fn = fn
        self.cache = {}

    def __call__(self, beta):
        key = float(beta)
        if key not in self.cache:
            self.cache[key] = self.fn(key)
        return self.cache[key]


def verify_point(model, record, beta_grid=None, micro_fn=None, canon_fn=None, certified=None):
    """Check a record's label against equilibrium sets; returns a list of CheckResult.

    ``micro_fn(u)`` and ``canon_fn(beta)`` produce the two sets being compared;
    they default to the pure microcanonical and canonical sets.
    """
    micro_fn = micro_fn or (lambda u: microcanonical_set(model, u))
    canon_fn = canon_fn or (lambda b: canonical_set(model, b))
    certified = model.is_tabular if certified is None else certified
    advisory = not certified
    label = record.support_label
    if label == INFEASIBLE:
        eu = micro_fn(record.u)
        return [CheckResult("empty-microcanonical-set", not eu.members, f"|E^u| = {len(eu.members)}", advisory)]
    eu = micro_fn(record.u)
    checks = []
    if label == FULL:
        beta = record.witness
        cmp = set_distance(eu, canon_fn(beta))
        ev = f"E^u vs E_beta at beta={beta:.6g}: {cmp.relation.value} (hausdorff {cmp.hausdorff:.3g})"
        if cmp.relation != Relation.EQUAL and not certified and record.interval is not None:
            beta = refine_witness(model, record.u, record.interval, canon_fn)
            if beta is not None:
                cmp = set_distance(eu, canon_fn(beta))
                ev += f"; refined beta={beta:.10g}: {cmp.relation.value} (hausdorff {cmp.hausdorff:.3g})"
            else:
                ev += "; no slope in the sampled superdifferential brackets u (grid too coarse near a hull contact?)"
        checks.append(CheckResult("full-equivalence", cmp.relation == Relation.EQUAL, ev, advisory))
    elif label == PARTIAL:
        probes = [b for b in probe_slopes(record.interval) if np.isfinite(b)]
        ok = 0
        worst = None
        for b in dict.fromkeys(probes):
            cmp = set_distance(eu, canon_fn(b))
            if cmp.relation == Relation.A_IN_B:
                ok += 1
            else:
                worst = (b, cmp.relation.value)
        n = len(dict.fromkeys(probes))
        ev = f"proper subset at {ok}/{n} superdifferential probes"
        if worst:
            ev += f"; beta={worst[0]:.6g} gave {worst[1]}"
        checks.append(CheckResult("partial-equivalence", ok == n, ev, advisory))
    elif label == NONEQUIVALENT:
        grid = list(beta_grid) if beta_grid is not None else []
        ok = 0
        first_bad = None
        for b in grid:
            if set_distance(eu, canon_fn(b)).relation == Relation.DISJOINT:
                ok += 1
            elif first_bad is None:
                first_bad = b
        ev = f"{ok}/{len(grid)} disjointness checks passed"
        if first_bad is not None:
            ev += f"; first failure at beta={first_bad:.6g}"
        checks.append(CheckResult("disjoint-on-beta-grid", ok == len(grid), ev, advisory))
        probes = [b for b in probe_slopes(record.interval) if np.isfinite(b)] if record.interval else []
        pok = sum(set_distance(eu, canon_fn(b)).relation == Relation.DISJOINT for b in probes)
        checks.append(CheckResult(
            "disjoint-on-superdifferential", pok == len(probes),
            f"{pok}/{len(probes)} superdifferential probes disjoint", advisory,
        ))
        checks.append(CheckResult(
            "below-hull", record.s < record.s_hull,
            f"s = {record.s:.6g} < s** = {record.s_hull:.6g}", advisory,
        ))
    return checks


def refine_witness(model, u, interval, canon_fn, iters=60):
    """Bisect beta inside the sampled superdifferential until H(E_beta) hits u.

    On a sampled continuous curve the midpoint slope selects a canonical
    macrostate one grid cell away from u; the exact slope lies in the sampled
    interval because H(E_beta) is nonincreasing in beta.
    """
    lo, hi = interval
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        return None

    def h_span(b):
        eb = canon_fn(b)
        if not eb.members:
            return None
        h = [float(repr_value(model, x)[0]) for x in eb.members]
        return min(h), max(h)

    at_lo, at_hi = h_span(lo), h_span(hi)
    if at_lo is None or at_hi is None or not (at_hi[0] <= u <= at_lo[1]):
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        span = h_span(mid)
        if span is None:
            return None
        if span[0] > u:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------- reports


@dataclass
class ClassificationReport:
    records: list
    metadata: dict

    def counted(self):
        return [r for r in self.records if r.label not in (BOUNDARY, INFEASIBLE)]

    def all_passed(self):
        return all(r.passed for r in self.counted())

    def check_table(self):
        """Rows (u, label, check name, passed, evidence, counted)."""
        rows = []
        for r in self.records:
            counted = r.label not in (BOUNDARY, INFEASIBLE)
            for c in r.checks:
                rows.append((r.u, r.label, c.name, c.passed, c.evidence, counted))
        return rows

    def coherence_violations(self):
        """Label/flag invariants: Full => T, Partial => C and not T, Nonequivalent => not C."""
        out = []
        finite = [r for r in self.records if np.isfinite(r.s)]
        ends = {finite[0].u, finite[-1].u} if finite else set()
        for r in self.records:
            if r.label == FULL and not r.in_T:
                out.append(f"u={r.u}: Full without T membership")
            if r.label == PARTIAL and not (r.in_C and not r.in_T):
                out.append(f"u={r.u}: Partial needs C and not T")
            if r.label == NONEQUIVALENT and r.in_C:
                out.append(f"u={r.u}: Nonequivalent inside C")
            if r.label == BOUNDARY and r.u not in ends:
                out.append(f"u={r.u}: Boundary label away from the domain ends")
        return out

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls([PointRecord.from_dict(r) for r in d["records"]], d["metadata"])


def model_hash(model):
    blob = json.dumps(model_to_dict(model), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _sweep_records(model, ctx, beta_grid, micro_fn, canon_fn, verify=True):
    canon = _SetCache(canon_fn)
    records = []
    for u in ctx.curve.u:
        rec = classify_point(model, u, ctx)
        if rec.boundary:
            rec.label = BOUNDARY
        if verify:
            rec.checks = verify_point(model, rec, beta_grid, micro_fn, canon, ctx.certified)
        records.append(rec)
    return records


def _metadata(model, ctx, beta_grid, extra=None):
    meta = {
        "model_hash": model_hash(model),
        "model_kind": model.kind,
        "u_grid": {"lo": float(ctx.curve.u[0]), "hi": float(ctx.curve.u[-1]), "count": len(ctx.curve.u),
                   "max_step": ctx.step},
        "beta_grid": None if beta_grid is None else
        {"lo": float(beta_grid[0]), "hi": float(beta_grid[-1]), "count": len(beta_grid)},
        "eps_c": ctx.eps_c,
        "delta_t": ctx.delta_t,
        "tol_feas": TOL_FEAS,
        "tol_deg": TOL_DEG,
        "certified": ctx.certified,
        "s_concave_hypothesis": "assumed at grid resolution",
    }
    meta.update(extra or {})
    return meta


def classify_curve(model, u_grid=None, beta_grid=None, options=None, verify=True):
    """Classify and verify every grid point of the entropy curve (sigma = 1)."""
    ctx = hull_context(model, u_grid, options)
    beta_grid = default_beta_grid(ctx) if beta_grid is None else np.asarray(beta_grid, dtype=float)
    records = _sweep_records(
        model, ctx, beta_grid,
        lambda u: microcanonical_set(model, u, options),
        lambda b: canonical_set(model, b, options),
        verify,
    )
    return ClassificationReport(records, _metadata(model, ctx, beta_grid))


# --------------------------------------------------------------------------- decomposition


@dataclass
class Decomposition:
    canonical: EquilibriumSet
    partition: list  # [(u, EquilibriumSet)]
    checks: list


def subgradient_range(ctx, beta):
    """Grid points minimizing beta*u - s**(u): the sampled image of d phi(beta)."""
    fin = np.isfinite(ctx.hull.values)
    u = ctx.curve.u[fin]
    vals = beta * u - ctx.hull.values[fin]
    best = vals.min()
    tol = max(ctx.eps_c, 1e-12 * (1.0 + abs(best)))
    idx = np.flatnonzero(vals <= best + tol)
    return np.flatnonzero(fin)[idx]


def decompose_canonical(model, beta, ctx=None, options=None, tol=TOL_FEAS):
    """Split E_beta by conserved value and compare each piece with E^u."""
    eb = canonical_set(model, beta, options)
    groups = group_by_value(model, eb.members, tol)
    for u, xs, spread in groups:
        if spread > 2 * tol:
            raise ResolutionError(f"conserved values near u = {u:.6g} chain over {spread:.3g}; refine tolerance")
    partition = []
    checks = []
    for u, xs, _ in groups:
        u_exact = float(repr_value(model, xs[0])[0]) if model.is_tabular else u
        eu = microcanonical_set(model, u_exact, options)
        piece = EquilibriumSet(xs, eb.objective, "canonical-piece", {"u": u_exact}, eb.certified)
        cmp = set_distance(piece, eu)
        checks.append(CheckResult(
            f"piece-equals-microcanonical(u={u_exact:.6g})", cmp.relation == Relation.EQUAL,
            f"{cmp.relation.value}, hausdorff {cmp.hausdorff:.3g}", not eb.certified,
        ))
        partition.append((u_exact, eu))
    if len(groups) > 1:
        us = [u for u, _, _ in groups]
        distinct = all(b - a > tol for a, b in zip(us, us[1:]))
        checks.append(CheckResult("pieces-disjoint", distinct, f"{len(us)} distinct conserved values", not eb.certified))
    if ctx is not None:
        sub = subgradient_range(ctx, float(np.atleast_1d(beta)[0]))
        lo_u, hi_u = ctx.curve.u[sub[0]], ctx.curve.u[sub[-1]]
        for u, _ in partition:
            inside = lo_u - ctx.step - 1e-12 <= u <= hi_u + ctx.step + 1e-12
            near = int(np.argmin(np.abs(ctx.curve.u - u)))
            on_hull = ctx.gamma(near)
            checks.append(CheckResult(
                f"u-in-subdifferential-and-gamma(u={u:.6g})", inside and on_hull,
                f"d phi(beta) sampled as [{lo_u:.6g}, {hi_u:.6g}], nearest grid point on hull: {on_hull}",
                not ctx.certified,
            ))
    return Decomposition(eb, partition, checks)


@dataclass
class Differentiability:
    differentiable: bool
    consistent: bool
    subgradient: tuple
    single_piece: bool
    within_gamma: bool


def differentiability_check(model, beta, ctx, options=None):
    """phi is differentiable at beta iff d phi(beta) is a single point; compare with E_beta = E^u."""
    sub = subgradient_range(ctx, beta)
    lo_u, hi_u = float(ctx.curve.u[sub[0]]), float(ctx.curve.u[sub[-1]])
    differentiable = hi_u - lo_u <= ctx.step * (1 + 1e-9)
    within_gamma = all(ctx.gamma(i) for i in range(sub[0], sub[-1] + 1))
    dec = decompose_canonical(model, beta, None, options)
    single = len(dec.partition) == 1 and all(c.passed for c in dec.checks)
    consistent = differentiable == (single and within_gamma)
    return Differentiability(differentiable, consistent, (lo_u, hi_u), single, within_gamma)


# --------------------------------------------------------------------------- mixed ensembles


@dataclass(frozen=True)
class FixedBeta1:
    beta1: float


@dataclass(frozen=True)
class FixedU2:
    u2: float


def _mixed_grid(model, mode, count=41):
    if model.is_tabular:
        row = 1 if isinstance(mode, FixedBeta1) else 0
        return np.unique(model.table_H[row])
    lo, hi = repr_range(model)[1 if isinstance(mode, FixedBeta1) else 0]
    return np.linspace(lo, hi, count)


def classify_mixed(model, mode, grid=None, beta_grid=None, options=None, verify=True):
    """Classification for sigma = 2 with one component held canonical or microcanonical.

    ``FixedBeta1``: the curve is s_{beta1}(u2); E_{beta1}^{u2} is compared with
    E_{beta1, beta2}.  ``FixedU2``: the curve is s^{u2}(u1); E^{u1, u2} is
    compared with E_{beta1}^{u2}.
    """
    grid = _mixed_grid(model, mode) if grid is None else np.asarray(grid, dtype=float)
    if isinstance(mode, FixedBeta1):
        b1 = float(mode.beta1)
        curve = mixed_entropy_fixed_beta1(model, b1, grid, options)
        micro_fn = lambda u2: mixed_set(model, b1, float(np.atleast_1d(u2)[0]), options)  # noqa: E731
        canon_fn = lambda b2: canonical2_set(model, b1, float(np.atleast_1d(b2)[0]), options)  # noqa: E731
        extra = {"mode": "fixed_beta1", "beta1": b1}
    elif isinstance(mode, FixedU2):
        u2 = float(mode.u2)
        curve = mixed_entropy_fixed_u2(model, u2, grid, options)
        micro_fn = lambda u1: micro2_set(model, float(np.atleast_1d(u1)[0]), u2, options)  # noqa: E731
        canon_fn = lambda b1: mixed_set(model, float(np.atleast_1d(b1)[0]), u2, options)  # noqa: E731
        extra = {"mode": "fixed_u2", "u2": u2}
    else:
        raise ArgumentError(f"unknown mixed mode {mode!r}")
    ctx = context_from_values(grid, curve.values, certified=model.is_tabular)
    beta_grid = default_beta_grid(ctx) if beta_grid is None else np.asarray(beta_grid, dtype=float)
    records = _sweep_records(model, ctx, beta_grid, micro_fn, canon_fn, verify)
    return ClassificationReport(records, _metadata(model, ctx, beta_grid, extra))


@dataclass
class MixedEquality:
    passed: bool
    constrained_then_tilted: EquilibriumSet
    rate_then_tilted: EquilibriumSet


def microcanonical_rate(model, x, u2, j2=None):
    """I^{u2}(x) = I(x) - J^2(u2) on the slice {H^2 = u2}, +inf elsewhere."""
    if j2 is None:
        j2 = minimize_constrained(model, [u2], constrained=(1,)).value
    h = repr_value(model, x)
    if abs(h[1] - u2) > (1e-12 if model.is_tabular else TOL_FEAS):
        return np.inf
    return rate_value(model, x) - j2


def verify_mixed_equality(model, beta1, u2, options=None):
    """Mixed equilibrium set computed by both constructions must coincide.

    The first restricts I + beta1 H^1 to {H^2 = u2}; the second minimizes the
    microcanonical rate function I^{u2} tilted by beta1 H^1.  On tabular
    models both are exhaustive enumerations.
    """
    a = mixed_set(model, beta1, u2, options)
    if model.is_tabular:
        j2 = min((model.table_I[i] for i in range(model.m) if model.table_H[1, i] == u2), default=np.inf)
        if not np.isfinite(j2):
            b = EquilibriumSet([], np.inf, "micro-then-can", {"beta1": beta1, "u2": u2}, True, False)
        else:
            vals = np.array([microcanonical_rate(model, i, u2, j2) + beta1 * model.table_H[0, i] for i in range(model.m)])
            best = vals.min()
            members = [int(i) for i in np.flatnonzero(vals <= best + TOL_DEG)]
            b = EquilibriumSet(members, best + j2, "micro-then-can", {"beta1": beta1, "u2": u2}, True)
    else:
        sol = minimize_constrained(model, [u2], constrained=(1,), options=options)
        j2 = sol.value
        tilted = minimize_constrained(model, [u2], constrained=(1,), tilt=[beta1, 0.0], options=options)
        members = [x for x in tilted.minimizers
                   if abs(microcanonical_rate(model, x, u2, j2) + beta1 * repr_value(model, x)[0] - (tilted.value - j2)) <= 1e-9]
        b = EquilibriumSet(members, tilted.value, "micro-then-can", {"beta1": beta1, "u2": u2}, False, tilted.feasible)
    if not a.feasible or not b.feasible:
        return MixedEquality(a.feasible == b.feasible, a, b)
    return MixedEquality(set_distance(a, b).relation == Relation.EQUAL, a, b)


def mixed_legendre_gap(model, beta1, u2_grid, beta2_grid, options=None):
    """max |phi_{beta1}(beta2) - (s_{beta1})*(beta2)| over the beta2 grid."""
    from .lft import transform_values
    from .thermo import mixed_free_energy

    curve = mixed_entropy_fixed_beta1(model, beta1, u2_grid, options)
    sc = SampledCurve(np.asarray(u2_grid, float), curve.values)
    star = transform_values(sc, beta2_grid)
    phi = np.array([mixed_free_energy(model, beta1, b2, options) for b2 in beta2_grid])
    return float(np.max(np.abs(phi - star)))


def mixed_u2_legendre_gap(model, u2, u1_grid, beta1_grid, options=None):
    """max |phi^{u2}(beta1) - (s^{u2})*(beta1)| over the beta1 grid."""
    from .lft import transform_values
    from .thermo import mixed_free_energy_fixed_u2

    curve = mixed_entropy_fixed_u2(model, u2, u1_grid, options)
    sc = SampledCurve(np.asarray(u1_grid, float), curve.values)
    star = transform_values(sc, beta1_grid)
    phi = np.array([mixed_free_energy_fixed_u2(model, u2, b1, options) for b1 in beta1_grid])
    return float(np.max(np.abs(phi - star)))


__all__ = [
    "FULL", "PARTIAL", "NONEQUIVALENT", "BOUNDARY", "INFEASIBLE",
    "HullContext", "hull_context", "context_from_values", "default_beta_grid",
    "PointRecord", "CheckResult", "ClassificationReport",
    "classify_point", "verify_point", "classify_curve",
    "decompose_canonical", "differentiability_check",
    "FixedBeta1", "FixedU2", "classify_mixed", "verify_mixed_equality",
    "mixed_legendre_gap", "mixed_u2_legendre_gap", "canonical_part_free_energy",
]
