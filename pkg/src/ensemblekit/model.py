"""Abstract model contract: hidden space, rate function, representation functions.

Three finite hidden spaces are supported:

* tabular -- a finite index set with tabulated rate and representation values;
* simplex -- probability vectors over a finite alphabet (mean-field models);
* cell matrix -- ``q`` cells, each carrying a probability vector over the
  alphabet, every cell weighted ``1/q`` (lattice models).

Simplex macrostates are 1-D arrays; cell matrices are 2-D arrays of shape
``(q, m)``.  Tabular macrostates are plain integers.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigurationError, ShapeError
from .kernels import lattice_green

TABULAR_KINDS = ("tabular", "tabular_mixed")
SIMPLEX_KINDS = ("curie_weiss", "three_state_skew", "point_vortex")
CELL_KINDS = ("miller_robert",)
KINDS = TABULAR_KINDS + SIMPLEX_KINDS + CELL_KINDS


def _frozen(a, dtype=float):
    if a is None:
        return None
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Component:
    """One representation function: ``quadratic`` (kernel), ``linear`` (vector)."""

    kind: str
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(self.data))


@dataclass(frozen=True, eq=False)
class Model:
    kind: str
    sigma: int
    tau: int = 0
    alphabet: Any = None
    prior: Any = None
    q: int = 1
    components: tuple = ()
    table_I: Any = None
    table_H: Any = None
    a_n: int | None = None
    site_cutoff: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", _frozen(self.alphabet))
        object.__setattr__(self, "prior", _frozen(self.prior))
        object.__setattr__(self, "table_I", _frozen(self.table_I))
        th = self.table_H
        if th is not None:
            th = np.atleast_2d(np.array(th, dtype=float))
        object.__setattr__(self, "table_H", _frozen(th))
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def is_tabular(self):
        return self.kind in TABULAR_KINDS

    @property
    def m(self):
        """Alphabet size (non-tabular) or number of hidden points (tabular)."""
        if self.is_tabular:
            return len(self.table_I)
        return len(self.prior)

    @property
    def size(self):
        return self.m if self.is_tabular else self.q * self.m

    @property
    def has_microstates(self):
        return not self.is_tabular

    def flat_prior(self):
        return np.tile(self.prior, self.q)


# --------------------------------------------------------------------------- validation


def validate_model(model):
    """Return a list of violated invariants; empty when the model is valid."""
    problems = []
    if model.kind not in KINDS:
        return [f"kind: unknown model kind {model.kind!r}"]
    if model.sigma < 1:
        problems.append("sigma: must be at least 1")
    if model.tau not in (0, 1) or model.tau > model.sigma:
        problems.append("tau: must be 0 or 1 and not exceed sigma")
    if model.is_tabular:
        problems += _validate_tabular(model)
    else:
        problems += _validate_measure_model(model)
    return problems


def _validate_tabular(model):
    out = []
    I, H = model.table_I, model.table_H
    if I is None or I.ndim != 1 or len(I) == 0:
        return ["table_I: must be a nonempty list of numbers"]
    if not np.all(np.isfinite(I)):
        out.append("table_I: entries must be finite")
    elif np.any(I < 0):
        out.append("table_I: rate function takes a negative value")
    elif I.min() != 0.0:
        out.append("table_I: inf I ≠ 0 (no entry equals zero)")
    if H is None:
        out.append("table_H: missing")
    elif H.shape != (model.sigma, len(I)):
        out.append(f"table_H: expected shape ({model.sigma}, {len(I)}), got {H.shape}")
    elif not np.all(np.isfinite(H)):
        out.append("table_H: entries must be finite (bounded representation functions)")
    if model.kind == "tabular_mixed" and (model.sigma != 2 or model.tau != 1):
        out.append("tabular_mixed: requires sigma = 2 and tau = 1")
    return out


def _validate_measure_model(model):
    out = []
    y, rho = model.alphabet, model.prior
    if y is None or rho is None or y.ndim != 1 or rho.ndim != 1:
        return ["alphabet/prior: both must be 1-D lists"]
    if len(y) < 2:
        out.append("alphabet: needs at least 2 letters")
    if len(y) != len(rho):
        out.append("prior: length differs from alphabet")
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        out.append("prior: every weight must be strictly positive")
    if abs(float(np.sum(rho)) - 1.0) > 1e-12:
        out.append(f"prior: prior does not sum to 1 (sum = {float(np.sum(rho)):.12g})")
    if model.q < 1:
        out.append("q: must be at least 1")
    if len(model.components) != model.sigma:
        out.append(f"components: {len(model.components)} representation functions for sigma = {model.sigma}")
    n = model.q * len(rho)
    for i, comp in enumerate(model.components):
        where = f"component {i}"
        if comp.kind == "quadratic":
            K = comp.data
            if K.shape != (n, n):
                out.append(f"{where}: kernel shape {K.shape}, expected ({n}, {n})")
                continue
            if not np.all(np.isfinite(K)):
                out.append(f"{where}: kernel has non-finite entries")
            elif np.max(np.abs(K - K.T), initial=0.0) > 1e-12:
                out.append(f"{where}: kernel is not symmetric")
        elif comp.kind == "linear":
            if comp.data.shape != (n,):
                out.append(f"{where}: linear coefficients shape {comp.data.shape}, expected ({n},)")
            elif not np.all(np.isfinite(comp.data)):
                out.append(f"{where}: linear coefficients must be finite")
        else:
            out.append(f"{where}: unknown representation kind {comp.kind!r}")
    if model.a_n is not None:
        if model.a_n < 2:
            out.append("a_n: must be at least 2")
        elif model.a_n % model.q:
            out.append(f"a_n: {model.a_n} sites do not split into {model.q} equal macrocells")
    if model.site_cutoff is not None and model.a_n is not None:
        side = int(round(np.sqrt(model.a_n)))
        if side * side != model.a_n or side % model.q:
            out.append("a_n: lattice model needs a square site count whose side is divisible by q")
    return out


# --------------------------------------------------------------------------- evaluation


def as_cells(model, x):
    """View a non-tabular macrostate as a ``(q, m)`` array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1 and model.q == 1:
        arr = arr[None, :]
    if arr.shape != (model.q, model.m):
        raise ShapeError(f"macrostate shape {np.shape(x)} incompatible with q={model.q}, m={model.m}")
    return arr


def _check_index(model, x):
    if isinstance(x, (np.ndarray, list, tuple)) or not float(x).is_integer():
        raise ShapeError(f"tabular macrostate must be an integer index, got {x!r}")
    i = int(x)
    if not 0 <= i < model.m:
        raise ShapeError(f"index {i} outside hidden set of size {model.m}")
    return i


def relative_entropy_rows(x, rho):
    """Row-wise relative entropy with 0 log 0 = 0 and +inf off the prior support."""
    x = np.atleast_2d(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > 0, x * np.log(x / rho), 0.0)
    terms = np.where((x > 0) & (rho <= 0), np.inf, terms)
    # nonnegative in exact arithmetic; clip the rounding error at the prior itself
    return np.maximum(terms.sum(axis=1), 0.0)


def rate_value(model, x):
    """I(x): table lookup, relative entropy, or cell-averaged relative entropy."""
    if model.is_tabular:
        return float(model.table_I[_check_index(model, x)])
    cells = as_cells(model, x)
    return float(relative_entropy_rows(cells, model.prior).mean())


def repr_value(model, x):
    """H-tilde(x) as a length-sigma array."""
    if model.is_tabular:
        return np.array(model.table_H[:, _check_index(model, x)], dtype=float)
    v = as_cells(model, x).reshape(-1) / model.q
    out = np.empty(model.sigma)
    for i, comp in enumerate(model.components):
        if comp.kind == "quadratic":
            out[i] = 0.5 * v @ comp.data @ v
        else:
            out[i] = comp.data @ v
    return out


def potentials(model, x):
    """Per-cell potentials g_i = q * dH_i/dx as an array of shape (sigma, q, m)."""
    v = as_cells(model, x).reshape(-1) / model.q
    out = np.empty((model.sigma, model.q * model.m))
    for i, comp in enumerate(model.components):
        out[i] = comp.data @ v if comp.kind == "quadratic" else comp.data
    return out.reshape(model.sigma, model.q, model.m)


# --------------------------------------------------------------------------- microstates


def letter_indices(model, microstate):
    """Map site values to alphabet indices."""
    values = np.asarray(microstate, dtype=float).reshape(-1)
    hit = np.isclose(values[:, None], model.alphabet[None, :], rtol=0.0, atol=1e-9)
    if not np.all(hit.any(axis=1)):
        bad = values[~hit.any(axis=1)][0]
        raise ShapeError(f"site value {bad!r} is not in the alphabet")
    return hit.argmax(axis=1)


def _check_sites(model, n_sites):
    if model.is_tabular:
        raise ConfigurationError(f"{model.kind} models have no microstate layer")
    if model.a_n is not None and n_sites != model.a_n:
        raise ShapeError(f"microstate has {n_sites} sites, model expects a_n = {model.a_n}")
    if n_sites % model.q:
        raise ConfigurationError(f"{n_sites} sites do not split into {model.q} equal macrocells")


def coarse_grain(model, microstate):
    """Empirical letter distribution in each of ``q`` contiguous site blocks."""
    idx = letter_indices(model, microstate)
    _check_sites(model, len(idx))
    return counts_to_cells(model, index_counts(model, idx), len(idx))


def index_counts(model, idx):
    """Per-cell letter counts, shape (q, m), for an array of letter indices."""
    block = len(idx) // model.q
    cell = np.arange(len(idx)) // block
    counts = np.zeros((model.q, model.m))
    np.add.at(counts, (cell, idx), 1.0)
    return counts


def counts_to_cells(model, counts, n_sites):
    return counts * model.q / n_sites


def site_green(model, n_sites):
    """Lattice kernel for site-level Hamiltonians, indexed by displacement."""
    side = int(round(np.sqrt(n_sites)))
    if side * side != n_sites or side % model.q:
        raise ConfigurationError(
            f"{n_sites} sites do not form a square lattice with side divisible by q={model.q}"
        )
    return lattice_green(side, model.site_cutoff)


def microstate_energy(model, microstate):
    """H_n(zeta) for a microstate given as site values.

    Mean-field quadratic terms are evaluated on the empirical measure (so they
    coincide with H-tilde of the coarse-grained state).  When the model carries
    a lattice cutoff, the first quadratic component is evaluated site by site
    with the lattice Green's function instead.
    """
    idx = letter_indices(model, microstate)
    n = len(idx)
    _check_sites(model, n)
    cells = counts_to_cells(model, index_counts(model, idx), n)
    out = repr_value(model, cells)
    if model.site_cutoff is not None:
        side = int(round(np.sqrt(n)))
        g = site_green(model, n)
        zeta = model.alphabet[idx].reshape(side, side)
        field_ = np.real(np.fft.ifft2(np.fft.fft2(zeta) * np.fft.fft2(g)))
        for i, comp in enumerate(model.components):
            if comp.kind == "quadratic":
                out[i] = float(np.sum(zeta * field_)) / (2.0 * n * n)
                break
    return out
