"""Thermodynamic functions: entropy, free energy and their mixed-ensemble variants.

Sign conventions: ``s(u) = -inf{ I : H = u }`` and
``phi(beta) = inf{ I + <beta, H> }``, so that ``phi`` is the transform of ``s``
in the sense of :func:`ensemblekit.lft.legendre_transform`.

For mixed ensembles the first representation function is treated
canonically and the second microcanonically.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SolverDiagnostic
from .optimize import minimize_constrained, minimize_tilted, repr_range
from .parallel import pmap

__all__ = [
    "ThermoCurve",
    "free_energy",
    "free_energy_curve",
    "entropy_point",
    "entropy_curve",
    "mixed_entropy_fixed_beta1",
    "mixed_entropy_fixed_u2",
    "mixed_free_energy",
    "mixed_free_energy_fixed_u2",
    "canonical_part_free_energy",
    "micro_part_rate",
    "repr_range",
]


@dataclass
class ThermoCurve:
    """Function values on a grid with per-point solver diagnostics.

    ``values`` holds ``-inf`` outside the effective domain and NaN where the
    solver failed (the message is kept in ``errors``).
    """

    grid: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    residuals: np.ndarray
    restarts: np.ndarray
    certified: bool
    errors: list = field(default_factory=list)
    minimizers: list = field(default_factory=list)

    @property
    def finite(self):
        return np.isfinite(self.values)

    def diagnostics(self):
        return [
            {
                "grid": np.atleast_1d(g).tolist(),
                "converged": bool(c),
                "residual": float(r),
                "restarts": int(k),
                "certified": self.certified,
                "error": e,
            }
            for g, c, r, k, e in zip(self.grid, self.converged, self.residuals, self.restarts, self.errors)
        ]


def _sweep(model, grid, solve, sign):
    """Map ``solve(point, index) -> Solution`` over a grid into a ThermoCurve."""
    grid = np.asarray(grid, dtype=float)

    def one(args):
        k, point = args
        try:
            return solve(point, k), None
        except SolverDiagnostic as exc:
            return exc, str(exc)

    results = pmap(one, enumerate(grid))
    n = len(grid)
    values = np.empty(n)
    conv = np.zeros(n, dtype=bool)
    res = np.zeros(n)
    restarts = np.zeros(n, dtype=int)
    errors, mins = [], []
    for k, (sol, err) in enumerate(results):
        errors.append(err)
        if err is not None:
            values[k] = np.nan
            res[k] = np.nan if sol.residual is None else sol.residual
            mins.append([])
            continue
        values[k] = sign * sol.value if np.isfinite(sol.value) else -np.inf
        conv[k] = sol.converged
        res[k] = sol.residual
        restarts[k] = sol.restarts
        mins.append(sol.minimizers)
    return ThermoCurve(grid, values, conv, res, restarts, model.is_tabular, errors, mins)


def _vec(x, n):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.shape != (n,):
        raise ValueError(f"expected {n} value(s), got {v.shape}")
    return v


# --------------------------------------------------------------------------- pure ensembles


def free_energy(model, beta, options=None, index=0):
    """phi(beta) = inf over the hidden space of I + <beta, H>."""
    return minimize_tilted(model, _vec(beta, model.sigma), options, index).value


def free_energy_curve(model, betas, options=None):
    return _sweep(model, betas, lambda b, k: minimize_tilted(model, _vec(b, model.sigma), options, k), 1.0)


def entropy_point(model, u, options=None, index=0):
    """s(u) = -inf{ I(x) : H(x) = u }, or -inf when the constraint is infeasible."""
    sol = minimize_constrained(model, _vec(u, model.sigma), options=options, index=index)
    return -sol.value if sol.feasible else -np.inf


def entropy_curve(model, u_grid, options=None):
    return _sweep(model, u_grid, lambda u, k: minimize_constrained(model, _vec(u, model.sigma), options=options, index=k), -1.0)


# --------------------------------------------------------------------------- mixed ensembles


def _require_mixed(model):
    if model.sigma != 2:
        raise ValueError("mixed ensembles need sigma = 2 (one canonical, one microcanonical component)")


def canonical_part_free_energy(model, beta1, options=None):
    """phi^1(beta1) = inf{ I + beta1 * H^1 }."""
    _require_mixed(model)
    return minimize_tilted(model, [beta1, 0.0], options).value


def micro_part_rate(model, u2, options=None):
    """J^2(u2) = inf{ I : H^2 = u2 } (+inf when infeasible)."""
    _require_mixed(model)
    return minimize_constrained(model, [u2], constrained=(1,), options=options).value


def _tilted_slice(model, beta1, u2, options, index=0):
    return minimize_constrained(model, [u2], constrained=(1,), tilt=[beta1, 0.0], options=options, index=index)


def mixed_entropy_fixed_beta1(model, beta1, u2_grid, options=None):
    """s_{beta1}(u2) = -inf{ I + beta1 H^1 : H^2 = u2 } + phi^1(beta1)."""
    _require_mixed(model)
    phi1 = canonical_part_free_energy(model, beta1, options)
    curve = _sweep(model, u2_grid, lambda u2, k: _tilted_slice(model, beta1, u2, options, k), -1.0)
    curve.values = curve.values + phi1
    return curve


def mixed_entropy_fixed_u2(model, u2, u1_grid, options=None):
    """s^{u2}(u1) = -J(u1, u2) + J^2(u2)."""
    _require_mixed(model)
    j2 = micro_part_rate(model, u2, options)
    if not np.isfinite(j2):
        raise DomainError(f"u2 = {u2} lies outside the domain of J^2")
    curve = _sweep(model, u1_grid, lambda u1, k: minimize_constrained(model, [u1, u2], options=options, index=k), -1.0)
    curve.values = curve.values + j2
    return curve


def mixed_free_energy(model, beta1, beta2, options=None):
    """phi_{beta1}(beta2) = inf{ I + beta1 H^1 + beta2 H^2 } - phi^1(beta1)."""
    _require_mixed(model)
    both = minimize_tilted(model, [beta1, beta2], options).value
    return both - canonical_part_free_energy(model, beta1, options)


def mixed_free_energy_fixed_u2(model, u2, beta1, options=None):
    """phi^{u2}(beta1) = inf{ I + beta1 H^1 : H^2 = u2 } - J^2(u2)."""
    _require_mixed(model)
    j2 = micro_part_rate(model, u2, options)
    if not np.isfinite(j2):
        raise DomainError(f"u2 = {u2} lies outside the domain of J^2")
    return _tilted_slice(model, beta1, u2, options).value - j2
