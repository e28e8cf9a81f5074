"""Variational solvers over the finite hidden spaces.

Two problems are solved everywhere in the package:

* unconstrained: ``inf { I(x) + <tilt, H(x)> }``
* constrained:   ``inf { I(x) + <tilt, H(x)> : H_c(x) = target }`` for a subset
  ``c`` of the representation components.

Tabular models are enumerated exactly.  Simplex and cell-matrix models use a
damped mean-field fixed-point iteration (unconstrained) or penalty continuation
in softmax coordinates followed by a Newton polish of the Gibbs-form KKT
system (constrained), each from several deterministic starting points.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize, root
from scipy.special import logsumexp

from .errors import SolverDiagnostic

TOL_FEAS = 1e-8
TOL_DEG = 1e-8
TOL_MATCH = 1e-6
INFEASIBLE_RESIDUAL = 1e-4


@dataclass(frozen=True)
class SolverOptions:
    starts: int = 8
    damping: float = 0.5
    fp_tol: float = 1e-12
    fp_maxiter: int = 100_000
    kappas: tuple = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    tol_feas: float = TOL_FEAS
    tol_deg: float = TOL_DEG
    tol_match: float = TOL_MATCH
    seed: int = 0


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class Solution:
    """Result of one variational solve.

    ``value`` is ``+inf`` when the constraint set is empty.  ``minimizers``
    holds every start whose objective is within ``tol_deg`` of the best,
    deduplicated at ``tol_match``.
    """

    value: float
    minimizers: list
    residual: float = 0.0
    converged: bool = True
    restarts: int = 0
    certified: bool = False
    feasible: bool = True
    objectives: list = field(default_factory=list)


# --------------------------------------------------------------------------- helpers


def member_distance(a, b):
    """Max-norm distance between macrostates; tabular indices are one-hot vectors."""
    if isinstance(a, (int, np.integer)) or isinstance(b, (int, np.integer)):
        return 0.0 if int(a) == int(b) else 1.0
    return float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float))))


def dedupe(states, tol=TOL_MATCH):
    kept = []
    for s in states:
        if all(member_distance(s, k) > tol for k in kept):
            kept.append(s)
    return kept


def _squeeze(model, x):
    return x[0].copy() if model.q == 1 else x.copy()


def batch_potentials(model, X):
    """Potentials for a batch of macrostates X of shape (B, q, m) -> (B, sigma, q*m)."""
    B = X.shape[0]
    v = X.reshape(B, -1) / model.q
    out = np.empty((B, model.sigma, model.q * model.m))
    for i, comp in enumerate(model.components):
        out[:, i] = v @ comp.data if comp.kind == "quadratic" else comp.data[None, :]
    return out


def batch_repr(model, X, g=None):
    B = X.shape[0]
    v = X.reshape(B, -1) / model.q
    g = batch_potentials(model, X) if g is None else g
    H = np.empty((B, model.sigma))
    for i, comp in enumerate(model.components):
        dot = np.einsum("bk,bk->b", g[:, i], v)
        H[:, i] = 0.5 * dot if comp.kind == "quadratic" else dot
    return H


def batch_rate(model, X):
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(X > 0, X * np.log(X / model.prior), 0.0)
    return np.maximum(t.sum(axis=(1, 2)) / model.q, 0.0)


def starting_points(model, count, seed, index):
    """Prior, uniform-row vertices, then Dirichlet draws (seeded by (seed, index))."""
    q, m = model.q, model.m
    pts = [np.tile(model.prior, (q, 1))]
    for y in range(m):
        if len(pts) >= count:
            break
        v = np.zeros((q, m))
        v[:, y] = 1.0
        pts.append(v)
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    while len(pts) < count:
        pts.append(rng.dirichlet(np.ones(m), size=q))
    return np.array(pts[:count])


# --------------------------------------------------------------------------- tabular


def _tabular_solve(model, tilt, constrained, target, opts):
    I = model.table_I
    H = model.table_H
    obj = I + tilt @ H
    mask = np.ones(len(I), dtype=bool)
    for c, t in zip(constrained, target):
        mask &= np.isclose(H[c], t, rtol=0.0, atol=1e-12)
    if not mask.any():
        return Solution(np.inf, [], certified=True, feasible=False)
    best = float(obj[mask].min())
    members = [int(i) for i in np.flatnonzero(mask & (obj <= best + opts.tol_deg))]
    return Solution(best, members, certified=True, objectives=[float(obj[i]) for i in members])


# --------------------------------------------------------------------------- unconstrained


def _gibbs(model, g, coef):
    """Normalized Gibbs rows rho * exp(-sum_i coef_i g_i) for potentials g (B, sigma, q*m)."""
    B = g.shape[0]
    E = -np.einsum("i,bik->bk", coef, g).reshape(B, model.q, model.m) + np.log(model.prior)
    E -= E.max(axis=2, keepdims=True)
    w = np.exp(E)
    return w / w.sum(axis=2, keepdims=True)


def fixed_point(model, tilt, X0, opts, window=200):
    """Damped batched iteration x <- x + d (Gibbs(x) - x). Returns (X, converged mask, iterations).

    Convergence is judged on the fixed-point residual |Gibbs(x) - x|.  A start
    whose residual has not dropped over ``window`` iterations halves its own
    damping, which tames the period-two cycles of strongly tilted problems.
    """
    X = X0.copy()
    B = len(X)
    active = np.ones(B, dtype=bool)
    iters = np.zeros(B, dtype=int)
    d = np.full(B, opts.damping)
    last = np.full(B, np.inf)
    for it in range(opts.fp_maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Xa = X[idx]
        step = _gibbs(model, batch_potentials(model, Xa), tilt) - Xa
        res = np.max(np.abs(step), axis=(1, 2))
        X[idx] = Xa + d[idx, None, None] * step
        iters[idx] = it + 1
        active[idx[res <= opts.fp_tol]] = False
        if (it + 1) % window == 0:
            stuck = idx[res > 0.99 * last[idx]]
            d[stuck] = np.maximum(0.5 * d[stuck], 1e-4)
            last[idx] = res
    return X, ~active, iters


def _mean_field_unconstrained(model, tilt, opts, index):
    X0 = starting_points(model, opts.starts, opts.seed, index)
    X, conv, _ = fixed_point(model, tilt, X0, opts)
    obj = batch_rate(model, X) + batch_repr(model, X) @ tilt
    if not conv.any():
        raise SolverDiagnostic(
            f"fixed-point iteration did not converge from any of {len(X)} starts",
            best_value=float(obj.min()),
        )
    obj = np.where(conv, obj, np.inf)
    best = float(obj.min())
    keep = np.flatnonzero(obj <= best + opts.tol_deg)
    members = dedupe([_squeeze(model, X[k]) for k in keep], opts.tol_match)
    return Solution(best, members, converged=True, restarts=int(conv.sum()), certified=False,
                    objectives=[best] * len(members))


def minimize_tilted(model, tilt, options=None, index=0):
    """inf of I + <tilt, H> over the hidden space."""
    opts = options or DEFAULT_OPTIONS
    tilt = np.atleast_1d(np.asarray(tilt, dtype=float))
    if tilt.shape != (model.sigma,):
        raise ValueError(f"tilt must have length sigma = {model.sigma}")
    if model.is_tabular:
        return _tabular_solve(model, tilt, (), (), opts)
    return _mean_field_unconstrained(model, tilt, opts, index)


# --------------------------------------------------------------------------- ranges


def _softmax(z):
    return np.exp(z - logsumexp(z, axis=-1, keepdims=True))


def _optimize_component(model, i, sign, starts):
    q, m = model.q, model.m
    K = model.components[i].data

    def fun(zf):
        z = zf.reshape(q, m)
        x = _softmax(z)
        v = x.reshape(-1) / q
        Kv = K @ v
        val = sign * 0.5 * v @ Kv
        G = sign * (Kv / q).reshape(q, m)
        grad = x * (G - np.sum(x * G, axis=1, keepdims=True))
        return val, grad.reshape(-1)

    out = []
    for x0 in starts:
        z0 = np.log(np.maximum(x0, 1e-12))
        res = minimize(fun, z0.reshape(-1), jac=True, method="L-BFGS-B",
                       options={"maxiter": 2000, "gtol": 1e-14, "ftol": 1e-16})
        out.append(_softmax(res.x.reshape(q, m)))
    return out


@lru_cache(maxsize=64)
def _range_cache(model):
    q, m = model.q, model.m
    result = []
    vertex_sets = []
    if m**q <= 4096:
        grids = np.array(np.meshgrid(*[np.arange(m)] * q, indexing="ij")).reshape(q, -1).T
        for combo in grids:
            v = np.zeros((q, m))
            v[np.arange(q), combo] = 1.0
            vertex_sets.append(v)
    starts = list(starting_points(model, 16, 12345, 0))
    for i, comp in enumerate(model.components):
        if comp.kind == "linear":
            a = comp.data.reshape(q, m)
            lo_x = np.zeros((q, m))
            hi_x = np.zeros((q, m))
            lo_x[np.arange(q), a.argmin(axis=1)] = 1.0
            hi_x[np.arange(q), a.argmax(axis=1)] = 1.0
            lo = float(a.min(axis=1).sum() / q)
            hi = float(a.max(axis=1).sum() / q)
            result.append((lo, hi, [lo_x], [hi_x]))
            continue
        cands = vertex_sets + _optimize_component(model, i, 1.0, starts) + _optimize_component(model, i, -1.0, starts)
        X = np.array(cands)
        vals = batch_repr(model, X)[:, i]
        lo, hi = float(vals.min()), float(vals.max())
        lo_x = dedupe([X[k] for k in np.flatnonzero(vals <= lo + 1e-12)])
        hi_x = dedupe([X[k] for k in np.flatnonzero(vals >= hi - 1e-12)])
        result.append((lo, hi, lo_x, hi_x))
    return tuple(result)


def repr_range(model):
    """Attained range ``[(lo, hi), ...]`` of each representation function.

    Exact for tabular and linear components; quadratic components combine
    vertex enumeration with multi-start optimization.
    """
    if model.is_tabular:
        return [(float(h.min()), float(h.max())) for h in model.table_H]
    return [(lo, hi) for lo, hi, _, _ in _range_cache(model)]


def range_extremizers(model, i):
    lo, hi, lo_x, hi_x = _range_cache(model)[i]
    return lo_x, hi_x


# --------------------------------------------------------------------------- constrained


class _Constrained:
    """Objective pieces for inf{ I + <tilt, H> : H_c = target } on softmax coordinates."""

    def __init__(self, model, tilt, constrained, target):
        self.model = model
        self.tilt = tilt
        self.c = np.asarray(constrained, dtype=int)
        self.target = np.asarray(target, dtype=float)
        self.logprior = np.log(model.prior)
        # penalties act on residuals measured in units of each component's range
        ranges = repr_range(model)
        width = np.array([ranges[c][1] - ranges[c][0] for c in self.c], dtype=float)
        self.w = 1.0 / np.where(width > 0, width, 1.0) ** 2

    def evaluate(self, x):
        g = batch_potentials(self.model, x[None])[0]
        H = batch_repr(self.model, x[None], g[None])[0]
        return g, H

    def objective(self, x):
        g, H = self.evaluate(x)
        return batch_rate(self.model, x[None])[0] + self.tilt @ H, H

    def penalty_fun(self, zf, kappa, lam):
        q, m = self.model.q, self.model.m
        z = zf.reshape(q, m)
        logx = z - logsumexp(z, axis=1, keepdims=True)
        x = np.exp(logx)
        g, H = self.evaluate(x)
        r = H[self.c] - self.target
        val = np.sum(x * (logx - self.logprior)) / q + self.tilt @ H + lam @ r + kappa * (self.w * r) @ r
        w = self.tilt.copy()
        w[self.c] += lam + 2.0 * kappa * self.w * r
        G = ((logx - self.logprior + 1.0) + (w @ g).reshape(q, m)) / q
        grad = x * (G - np.sum(x * G, axis=1, keepdims=True))
        return val, grad.reshape(-1)

    def residual(self, x):
        _, H = self.evaluate(x)
        return float(np.max(np.abs(H[self.c] - self.target))) if len(self.c) else 0.0

    def newton(self, x0, lam0):
        """Solve x = Gibbs(x, coef(lam)), H_c(x) = target for (x, lam)."""
        model = self.model
        q, m = model.q, model.m
        n = q * m
        quad = np.zeros((model.sigma, n, n))
        for i, comp in enumerate(model.components):
            if comp.kind == "quadratic":
                quad[i] = comp.data / q

        def coef(lam):
            cf = self.tilt.copy()
            cf[self.c] = lam
            return cf

        def fun(p):
            x = p[:n].reshape(q, m)
            lam = p[n:]
            cf = coef(lam)
            g = batch_potentials(model, x[None])[0]
            Gb = _gibbs(model, g[None], cf)[0]
            H = batch_repr(model, x[None], g[None])[0]
            F = np.concatenate([(x - Gb).reshape(-1), H[self.c] - self.target])
            # d Gibbs / dx and d Gibbs / dlam, row by row
            dE_dx = -np.einsum("i,ijk->jk", cf, quad)
            J = np.zeros((n + len(self.c), n + len(self.c)))
            Gf = Gb.reshape(-1)
            dG_dx = np.zeros((n, n))
            dG_dl = np.zeros((n, len(self.c)))
            for a in range(q):
                sl = slice(a * m, (a + 1) * m)
                ga = Gf[sl]
                rows = dE_dx[sl]
                dG_dx[sl] = ga[:, None] * (rows - ga @ rows)
                for j, c in enumerate(self.c):
                    e = -g[c, sl]
                    dG_dl[sl, j] = ga * (e - ga @ e)
            J[:n, :n] = np.eye(n) - dG_dx
            J[:n, n:] = -dG_dl
            for j, c in enumerate(self.c):
                J[n + j, :n] = g[c] / q
            return F, J

        p0 = np.concatenate([x0.reshape(-1), lam0])
        try:
            sol = root(fun, p0, jac=True, method="hybr", options={"xtol": 1e-15, "maxfev": 200})
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            return None
        if not np.all(np.isfinite(sol.x)):
            return None
        x = sol.x[:n].reshape(q, m)
        if np.any(x < -1e-12):
            return None
        x = np.clip(x, 0.0, None)
        x /= x.sum(axis=1, keepdims=True)
        return x, sol.x[n:]


def _polish(prob, x, kappa, opts):
    """Newton polish of a penalty iterate; returns (x, residual) or None."""
    _, H = prob.evaluate(x)
    lam = 2.0 * kappa * prob.w * (H[prob.c] - prob.target)
    polished = prob.newton(x, lam)
    if polished is None:
        return None
    xn, _ = polished
    rn = prob.residual(xn)
    if rn > opts.tol_feas or np.max(np.abs(xn - x)) > 0.05:
        return None
    if prob.objective(xn)[0] > prob.objective(x)[0] + 1e-6 * max(1.0, kappa * 1e-3):
        return None
    return xn, rn


def _penalty_stage(prob, z, kappa, lam):
    res = minimize(prob.penalty_fun, z, args=(kappa, lam), jac=True, method="L-BFGS-B",
                   options={"maxiter": 3000, "gtol": 1e-11, "ftol": 1e-15})
    return res.x


def _augmented_lagrangian(prob, z, lam, opts, kappa=1e3, sweeps=60):
    q, m = prob.model.q, prob.model.m
    x = _softmax(z.reshape(q, m))
    for _ in range(sweeps):
        z = _penalty_stage(prob, z, kappa, lam)
        x = _softmax(z.reshape(q, m))
        _, H = prob.evaluate(x)
        r = H[prob.c] - prob.target
        lam = lam + 2.0 * kappa * prob.w * r
        if np.max(np.abs(r)) <= opts.tol_feas * 1e-2:
            break
    return x, lam


def _continuation(prob, starts, opts, index=0):
    """Penalty continuation over all starts; Newton polish is tried after every stage.

    Starts that collapse onto an earlier start after a stage are dropped.
    """
    q, m = prob.model.q, prob.model.m
    zs = [np.log(np.maximum(x0, 1e-12)).reshape(-1) for x0 in starts]
    zero = np.zeros(len(prob.c))
    done = []
    active = list(range(len(zs)))
    # small seeded jitter keeps symmetric saddles of the penalized objective from trapping a start
    jitter = np.random.default_rng(np.random.SeedSequence([opts.seed, index, 7919]))
    for kappa in opts.kappas:
        survivors = []
        for k in active:
            zs[k] = _penalty_stage(prob, zs[k] + 1e-4 * jitter.standard_normal(zs[k].shape), kappa, zero)
            x = _softmax(zs[k].reshape(q, m))
            # loose early stages can funnel every start through one symmetric point; only
            # collapse once the penalty is stiff enough that the basins have separated
            if kappa >= 1e3 and any(np.max(np.abs(x - _softmax(zs[j].reshape(q, m)))) < 1e-4 for j in survivors):
                continue
            r = prob.residual(x)
            if r <= opts.tol_feas:
                done.append((x, r))
                continue
            polished = _polish(prob, x, kappa, opts) if kappa >= 1e2 else None
            if polished is not None:
                done.append(polished)
                continue
            survivors.append(k)
        active = survivors
        if not active:
            break
    kappa = opts.kappas[-1]
    for k in active:
        x = _softmax(zs[k].reshape(q, m))
        _, H = prob.evaluate(x)
        lam = 2.0 * kappa * prob.w * (H[prob.c] - prob.target)
        x_al, lam = _augmented_lagrangian(prob, zs[k], lam, opts)
        cand = min([(x, prob.residual(x)), (x_al, prob.residual(x_al))], key=lambda t: t[1])
        polished = prob.newton(cand[0], lam)
        if polished is not None and prob.residual(polished[0]) < cand[1] and np.max(np.abs(polished[0] - cand[0])) <= 0.05:
            cand = (polished[0], prob.residual(polished[0]))
        done.append(cand)
    return done


def _crossing_starts(model, c, target):
    """Points on {H_c = target} found by bisecting each segment from a minimizer to a maximizer.

    The level set can have several branches, and random starts may all settle on a branch
    that never reaches the target; these starts lie on the constraint by construction.
    """
    lo, hi = repr_range(model)[c]
    if not lo < target < hi:
        return []
    lo_x, hi_x = range_extremizers(model, c)
    out = []
    for a in lo_x:
        for b in hi_x:
            g = lambda t: batch_repr(model, ((1 - t) * a + t * b)[None])[0, c] - target  # noqa: E731
            t = brentq(g, 0.0, 1.0, xtol=1e-14)
            out.append((1 - t) * a + t * b)
    return out


def minimize_constrained(model, target, constrained=None, tilt=None, options=None, index=0):
    """inf of I + <tilt, H> subject to H_c = target (c defaults to every component)."""
    opts = options or DEFAULT_OPTIONS
    constrained = tuple(range(model.sigma)) if constrained is None else tuple(constrained)
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.shape != (len(constrained),):
        raise ValueError("target length must match the constrained components")
    tilt = np.zeros(model.sigma) if tilt is None else np.atleast_1d(np.asarray(tilt, dtype=float)).copy()
    if model.is_tabular:
        return _tabular_solve(model, tilt, constrained, target, opts)

    ranges = repr_range(model)
    for c, t in zip(constrained, target):
        lo, hi = ranges[c]
        if t < lo - 1e-10 or t > hi + 1e-10:
            return Solution(np.inf, [], converged=True, feasible=False)

    prob = _Constrained(model, tilt, constrained, target)
    starts = list(starting_points(model, opts.starts, opts.seed, index))
    if len(constrained) == 1:
        starts += _crossing_starts(model, constrained[0], target[0])
    cands = _continuation(prob, starts, opts, index)
    if len(constrained) == 1:
        c = constrained[0]
        lo, hi = ranges[c]
        lo_x, hi_x = range_extremizers(model, c)
        if abs(target[0] - lo) <= opts.tol_feas:
            cands += [(x, prob.residual(x)) for x in lo_x]
        if abs(target[0] - hi) <= opts.tol_feas:
            cands += [(x, prob.residual(x)) for x in hi_x]

    feas = [(x, r) for x, r in cands if r <= opts.tol_feas]
    min_res = min(r for _, r in cands)
    if not feas:
        if min_res > INFEASIBLE_RESIDUAL:
            return Solution(np.inf, [], residual=min_res, converged=True, feasible=False, restarts=len(cands))
        raise SolverDiagnostic(
            f"constraint residual {min_res:.3g} above tolerance {opts.tol_feas:g} after continuation",
            residual=min_res,
        )
    objs = np.array([prob.objective(x)[0] for x, _ in feas])
    best = float(objs.min())
    keep = np.flatnonzero(objs <= best + opts.tol_deg)
    members = dedupe([_squeeze(model, feas[k][0]) for k in keep], opts.tol_match)
    residual = max(feas[k][1] for k in keep)
    return Solution(best, members, residual=residual, converged=True, restarts=len(feas),
                    certified=False, objectives=[best] * len(members))
