"""Equilibrium macrostate sets for canonical, microcanonical and mixed ensembles."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CapacityError
from .model import rate_value, repr_value
from .optimize import (
    TOL_DEG,
    TOL_FEAS,
    TOL_MATCH,
    batch_repr,
    dedupe,
    member_distance,
    minimize_constrained,
    minimize_tilted,
)

CANONICAL = "canonical"
MICROCANONICAL = "microcanonical"
MIXED = "mixed"  # canonical in H^1, microcanonical in H^2
CANONICAL2 = "canonical2"
MICRO2 = "micro2"


@dataclass
class EquilibriumSet:
    members: list
    objective: float
    tag: str
    params: dict
    certified: bool
    feasible: bool = True

    def __len__(self):
        return len(self.members)

    def to_dict(self):
        return {
            "tag": self.tag,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "objective": None if not np.isfinite(self.objective) else float(self.objective),
            "certification": "exact" if self.certified else "heuristic",
            "feasible": self.feasible,
            "members": [_jsonable(x) for x in self.members],
        }

    @classmethod
    def from_dict(cls, d):
        members = [m if isinstance(m, int) else np.array(m, dtype=float) for m in d["members"]]
        obj = np.inf if d["objective"] is None else d["objective"]
        return cls(members, obj, d["tag"], d["params"], d["certification"] == "exact", d["feasible"])


def _jsonable(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _from_solution(sol, tag, params):
    if not sol.feasible:
        return EquilibriumSet([], np.inf, tag, params, sol.certified, feasible=False)
    return EquilibriumSet(list(sol.minimizers), sol.value, tag, params, sol.certified)


def canonical_set(model, beta, options=None):
    """Minimizers of I + <beta, H> (E_beta)."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    sol = minimize_tilted(model, beta, options)
    return _from_solution(sol, CANONICAL, {"beta": beta.tolist()})


def microcanonical_set(model, u, options=None):
    """Minimizers of I on {H = u} (E^u); empty and infeasible off the domain."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    sol = minimize_constrained(model, u, options=options)
    return _from_solution(sol, MICROCANONICAL, {"u": u.tolist()})


def mixed_set(model, beta1, u2, options=None):
    """Minimizers of I + beta1 H^1 on {H^2 = u2}."""
    sol = minimize_constrained(model, [u2], constrained=(1,), tilt=[beta1, 0.0], options=options)
    return _from_solution(sol, MIXED, {"beta1": float(beta1), "u2": float(u2)})


def canonical2_set(model, beta1, beta2, options=None):
    sol = minimize_tilted(model, [beta1, beta2], options)
    return _from_solution(sol, CANONICAL2, {"beta1": float(beta1), "beta2": float(beta2)})


def micro2_set(model, u1, u2, options=None):
    sol = minimize_constrained(model, [u1, u2], options=options)
    return _from_solution(sol, MICRO2, {"u1": float(u1), "u2": float(u2)})


def equilibrium_set(model, tag, params, options=None):
    """Dispatch on an ensemble tag with a parameter dict."""
    if tag == CANONICAL:
        return canonical_set(model, params["beta"], options)
    if tag == MICROCANONICAL:
        return microcanonical_set(model, params["u"], options)
    if tag == MIXED:
        return mixed_set(model, params["beta1"], params["u2"], options)
    if tag == CANONICAL2:
        return canonical2_set(model, params["beta1"], params["beta2"], options)
    if tag == MICRO2:
        return micro2_set(model, params["u1"], params["u2"], options)
    raise ValueError(f"unknown ensemble tag {tag!r}")


# --------------------------------------------------------------------------- brute force


def simplex_grid(m, resolution):
    """All points of the simplex whose coordinates are multiples of 1/resolution."""
    if m == 2:
        k = np.arange(resolution + 1)
        return np.stack([k, resolution - k], axis=1) / resolution
    pts = [(a, b, resolution - a - b) for a in range(resolution + 1) for b in range(resolution + 1 - a)]
    return np.array(pts, dtype=float) / resolution


def _h(model, X):
    return batch_repr(model, X[:, None, :])


def _objective_table(model, tilt, X):
    with np.errstate(divide="ignore", invalid="ignore"):
        I = np.where(X > 0, X * np.log(X / model.prior), 0.0).sum(axis=1)
    H = _h(model, X)
    return I, H, I + H @ tilt


def _edge_crossings(model, c, target, resolution):
    """Exact points of {H_c = target} on the edges of the simplex grid (alphabet <= 3)."""
    step = 1.0 / resolution
    P = simplex_grid(model.m, resolution)
    if model.m == 2:
        A, B = P[:-1], P[1:]
    else:
        dirs = np.array([[1.0, -1.0, 0.0], [1.0, 0.0, -1.0], [0.0, 1.0, -1.0]])
        A = np.repeat(P, 3, axis=0)
        B = A + step * np.tile(dirs, (len(P), 1))
        ok = np.all(B >= -1e-12, axis=1)
        A, B = A[ok], np.clip(B[ok], 0.0, 1.0)
    if len(A) == 0:
        return np.empty((0, model.m))
    fa = _h(model, A)[:, c] - target
    fb = _h(model, B)[:, c] - target
    out = [A[fa == 0.0], B[fb == 0.0]]
    sel = np.flatnonzero(fa * fb < 0)
    if sel.size:
        a, d, flo = A[sel], B[sel] - A[sel], fa[sel]
        lo, hi = np.zeros(len(sel)), np.ones(len(sel))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = _h(model, a + mid[:, None] * d)[:, c] - target
            same = (fm < 0) == (flo < 0)
            lo = np.where(same, mid, lo)
            flo = np.where(same, fm, flo)
            hi = np.where(same, hi, mid)
        out.append(a + (0.5 * (lo + hi))[:, None] * d)
    return np.concatenate(out)


def _enumerate_table(model, tag, params, tol):
    if tag == CANONICAL:
        tilt, fixed = np.atleast_1d(np.asarray(params["beta"], dtype=float)), {}
    elif tag == MICROCANONICAL:
        tilt, fixed = np.zeros(model.sigma), dict(enumerate(np.atleast_1d(params["u"])))
    elif tag == MIXED:
        tilt, fixed = np.array([params["beta1"], 0.0]), {1: params["u2"]}
    elif tag == CANONICAL2:
        tilt, fixed = np.array([params["beta1"], params["beta2"]]), {}
    elif tag == MICRO2:
        tilt, fixed = np.zeros(2), {0: params["u1"], 1: params["u2"]}
    else:
        raise ValueError(f"unknown ensemble tag {tag!r}")
    feasible = []
    for i in range(model.m):
        h = repr_value(model, i)
        if all(h[c] == v for c, v in fixed.items()):
            feasible.append((rate_value(model, i) + float(np.dot(tilt, h)), i))
    if not feasible:
        return EquilibriumSet([], np.inf, tag, dict(params), True, feasible=False)
    best = min(v for v, _ in feasible)
    members = [i for v, i in feasible if v <= best + tol]
    return EquilibriumSet(members, best, tag, dict(params), True)


def brute_force_set(model, tag, params, resolution=200, tol_deg=None):
    """Exhaustive oracle: exact enumeration (tabular) or a simplex grid (alphabet <= 3).

    On the simplex grid, constrained problems are solved exactly along grid
    edges: every edge on which the constraint changes sign contributes its
    bisected root, so feasible points are exact in one direction and sampled
    at ``1/resolution`` in the other.  Degenerate minimizers are retained
    within ``tol_deg`` (default: the larger of 1e-8 and the grid-induced
    objective error).
    """
    if model.is_tabular:
        return _enumerate_table(model, tag, params, TOL_DEG if tol_deg is None else tol_deg)
    if model.q != 1 or model.m > 3:
        raise CapacityError("brute force supports tabular models and simplex models with alphabet <= 3")
    if tag in (CANONICAL, CANONICAL2):
        beta = params["beta"] if tag == CANONICAL else [params["beta1"], params["beta2"]]
        tilt = np.atleast_1d(np.asarray(beta, dtype=float))
        X = simplex_grid(model.m, resolution)
        _, _, obj = _objective_table(model, tilt, X)
    elif tag == MICROCANONICAL and model.sigma == 1:
        target = float(np.atleast_1d(params["u"])[0])
        tilt = np.zeros(1)
        X = _edge_crossings(model, 0, target, resolution)
        if len(X) == 0:
            return EquilibriumSet([], np.inf, tag, params, False, feasible=False)
        _, _, obj = _objective_table(model, tilt, X)
    else:
        raise CapacityError(f"brute force does not cover ensemble {tag!r} for {model.kind}")
    best = float(obj.min())
    tol = max(TOL_DEG, 1e-9) if tol_deg is None else tol_deg
    keep = np.flatnonzero(obj <= best + tol)
    members = dedupe([X[k] for k in keep], 0.5 / resolution)
    return EquilibriumSet(members, best, tag, dict(params), False)


# --------------------------------------------------------------------------- comparison


class Relation(str, Enum):
    EQUAL = "Equal"
    A_IN_B = "ProperSubset(a<b)"
    B_IN_A = "ProperSubset(b<a)"
    DISJOINT = "Disjoint"
    OVERLAP = "Overlap"


@dataclass(frozen=True)
class SetComparison:
    hausdorff: float
    relation: Relation


def set_distance(a, b, tol_match=TOL_MATCH):
    """Hausdorff distance (max norm) and containment relation between two sets."""
    A, B = list(a.members), list(b.members)
    if not A and not B:
        return SetComparison(0.0, Relation.EQUAL)
    if not A or not B:
        rel = Relation.A_IN_B if not A else Relation.B_IN_A
        return SetComparison(np.inf, rel)
    if all(isinstance(x, (int, np.integer)) for x in A + B):
        # tabular indices: exact set algebra, distances are 0 or 1
        sa, sb = {int(x) for x in A}, {int(x) for x in B}
        a_in = np.array([x in sb for x in sa])
        b_in = np.array([x in sa for x in sb])
        haus = 0.0 if sa == sb else 1.0
    else:
        D = np.array([[member_distance(x, y) for y in B] for x in A])
        haus = float(max(D.min(axis=1).max(), D.min(axis=0).max()))
        a_in = D.min(axis=1) <= tol_match
        b_in = D.min(axis=0) <= tol_match
    if a_in.all() and b_in.all():
        rel = Relation.EQUAL
    elif a_in.all():
        rel = Relation.A_IN_B
    elif b_in.all():
        rel = Relation.B_IN_A
    elif not a_in.any():
        rel = Relation.DISJOINT
    else:
        rel = Relation.OVERLAP
    return SetComparison(haus, rel)


def members_attain(model, eq, value, tilt, tol=1e-9):
    """True when every member's objective I + <tilt, H> is within ``tol`` of ``value``."""
    tilt = np.atleast_1d(np.asarray(tilt, dtype=float))
    return all(abs(rate_value(model, x) + float(tilt @ repr_value(model, x)) - value) <= tol for x in eq.members)


def feasibility(model, eq, u, comps=None):
    """Largest constraint residual over the members of a constrained set."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    comps = range(len(u)) if comps is None else comps
    if not eq.members:
        return 0.0
    return max(float(np.max(np.abs(repr_value(model, x)[list(comps)] - u))) for x in eq.members)


def group_by_value(model, members, tol=TOL_FEAS):
    """Group macrostates by their H value (sigma = 1); returns [(u, members), ...]."""
    vals = sorted(((float(repr_value(model, x)[0]), x) for x in members), key=lambda t: t[0])
    groups = []
    for u, x in vals:
        if groups and u - groups[-1][1][-1] <= tol:
            groups[-1][1].append(u)
            groups[-1][2].append(x)
        else:
            groups.append([u, [u], [x]])
    return [(float(np.mean(us)), xs, max(us) - min(us)) for _, us, xs in groups]
