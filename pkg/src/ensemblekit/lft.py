"""Legendre-Fenchel transforms, concave hulls and supporting-line tests on 1-D samples.

Sign conventions follow the thermodynamic pairing of entropy and free energy:
the transform of ``f`` is ``beta -> min_u (beta*u - f(u))`` and the double
transform is the upper concave hull of ``f``.  Values of ``-inf`` mark grid
points outside the effective domain.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True)
class SampledCurve:
    u: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if u.ndim != 1 or u.shape != f.shape or len(u) < 2:
            raise ArgumentError("curve needs matching 1-D grid and values of length >= 2")
        if np.any(np.diff(u) <= 0):
            raise ArgumentError("curve grid must be strictly increasing")
        if np.any(np.isnan(f)) or np.any(f == np.inf):
            raise ArgumentError("curve values must be finite or -inf")
        if not np.any(np.isfinite(f)):
            raise ArgumentError("curve has no finite value")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "f", f)

    @property
    def finite(self):
        return np.isfinite(self.f)

    def index_of(self, u, atol=1e-12):
        hits = np.flatnonzero(np.isclose(self.u, u, rtol=0.0, atol=atol))
        if len(hits) == 0:
            raise ArgumentError(f"u = {u!r} is not a grid point")
        return int(hits[0])


@dataclass(frozen=True)
class HullResult:
    """Concave hull sampled on the curve grid.

    ``beta_minus`` is the left slope and ``beta_plus`` the right slope at each
    grid point, so the superdifferential is ``[beta_plus, beta_minus]``.  Grid
    points outside the hull's domain carry NaN slopes and ``-inf`` values.
    """

    u: np.ndarray
    values: np.ndarray
    vertices: np.ndarray
    beta_minus: np.ndarray
    beta_plus: np.ndarray

    def index_of(self, u, atol=1e-12):
        hits = np.flatnonzero(np.isclose(self.u, u, rtol=0.0, atol=atol))
        if len(hits) == 0:
            raise ArgumentError(f"u = {u!r} is not a grid point")
        return int(hits[0])

    def segment_slopes(self):
        v = self.vertices
        return np.diff(self.values[v]) / np.diff(self.u[v])


def legendre_transform(curve, betas):
    """Exact transform over the sample: min over finite points of beta*u - f(u)."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if betas.size == 0:
        raise ArgumentError("empty beta grid")
    if betas.size < 2:
        raise ArgumentError("a transformed curve needs at least two beta values; see transform_values")
    return SampledCurve(betas, transform_values(curve, betas))


def transform_values(curve, betas):
    """Like :func:`legendre_transform` but returns the bare value array."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if betas.size == 0:
        raise ArgumentError("empty beta grid")
    fin = curve.finite
    return np.min(betas[:, None] * curve.u[fin][None, :] - curve.f[fin][None, :], axis=1)


def _upper_hull(x, y):
    # monotone chain; points on or below a chord are dropped
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def concave_hull(curve):
    fin = np.flatnonzero(curve.finite)
    u, f = curve.u, curve.f
    verts = fin[_upper_hull(u[fin], f[fin])]
    n = len(u)
    values = np.full(n, -np.inf)
    bm = np.full(n, np.nan)
    bp = np.full(n, np.nan)
    lo, hi = verts[0], verts[-1]
    inside = np.arange(lo, hi + 1)
    values[inside] = np.interp(u[inside], u[verts], f[verts])
    values[verts] = f[verts]
    slopes = np.diff(f[verts]) / np.diff(u[verts])
    for k, i in enumerate(verts):
        bm[i] = slopes[k - 1] if k > 0 else np.inf
        bp[i] = slopes[k] if k < len(slopes) else -np.inf
    for k in range(len(slopes)):
        between = np.arange(verts[k] + 1, verts[k + 1])
        bm[between] = slopes[k]
        bp[between] = slopes[k]
    return HullResult(u=u.copy(), values=values, vertices=verts, beta_minus=bm, beta_plus=bp)


def superdifferential_at(hull, u):
    """Return ``(beta_plus, beta_minus)`` or ``None`` when the superdifferential is empty."""
    i = hull.index_of(u)
    if not np.isfinite(hull.values[i]):
        return None
    return float(hull.beta_plus[i]), float(hull.beta_minus[i])


def default_tolerance(curve):
    f = curve.f[curve.finite]
    return max(1e-9, 1e-6 * float(f.max() - f.min()))


def probe_slopes(interval):
    """Slopes at which supporting lines are tested: a central probe, then both ends.

    For a half-line the central probe sits one endpoint-magnitude into the
    unbounded side; for the whole line it is zero.
    """
    lo, hi = interval
    if np.isfinite(lo) and np.isfinite(hi):
        return [0.5 * (lo + hi), lo, hi]
    if np.isfinite(hi):
        return [hi - abs(hi), hi]
    if np.isfinite(lo):
        return [lo + abs(lo), lo]
    return [0.0]


@dataclass(frozen=True)
class SupportResult:
    in_C: bool
    in_T: bool
    witness: float | None
    interval: tuple | None


def strictly_supports(curve, i, beta, delta):
    fin = curve.finite.copy()
    fin[i] = False
    line = curve.f[i] + beta * (curve.u[fin] - curve.u[i])
    return bool(np.all(curve.f[fin] < line - delta))


def support_tests(curve, hull, u, eps_c=None, delta_t=None):
    """Membership of ``u`` in the touching set C and the strictly touching set T."""
    eps_c = default_tolerance(curve) if eps_c is None else eps_c
    delta_t = default_tolerance(curve) if delta_t is None else delta_t
    i = curve.index_of(u)
    if not np.isfinite(curve.f[i]):
        return SupportResult(False, False, None, None)
    interval = superdifferential_at(hull, curve.u[i])
    in_C = interval is not None and abs(curve.f[i] - hull.values[i]) <= eps_c
    if not in_C:
        return SupportResult(False, False, None, interval)
    probes = probe_slopes(interval)
    for beta in probes:
        if strictly_supports(curve, i, beta, delta_t):
            return SupportResult(True, True, float(beta), interval)
    return SupportResult(True, False, float(probes[0]), interval)
