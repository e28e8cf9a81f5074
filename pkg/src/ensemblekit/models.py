"""Builtin model constructors and the JSON model description format."""

import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from .errors import ConfigurationError, ModelFormatError
from .kernels import strip_cell_kernel, torus_cell_kernel
from .model import Component, Model, validate_model

Kind = Literal["tabular", "curie_weiss", "three_state_skew", "point_vortex", "miller_robert", "tabular_mixed"]


class ModelSpec(BaseModel):
    """Model description; unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")

    kind: Kind
    alphabet: list[float] | None = None
    prior: list[float] | None = None
    kernel: list[list[float]] | None = None
    linear: list[float] | None = None
    table_I: list[float] | None = None
    table_H: list[float] | list[list[float]] | None = None
    sigma: int | None = None
    tau: int | None = None
    a_n: int | None = None
    q: int | None = None
    cells: int | None = None
    cutoff: int | None = None
    coefficient: float | None = None
    coupling: int | None = None
    enstrophy: list[float] | None = None


def _spec(spec):
    if isinstance(spec, ModelSpec):
        return spec
    try:
        return ModelSpec.model_validate(spec)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        raise ModelFormatError(loc, err["msg"]) from None


def build_builtin(spec):
    """Construct a Model from a ModelSpec (or a plain dict in the same schema)."""
    spec = _spec(spec)
    builder = {
        "tabular": _build_tabular,
        "tabular_mixed": _build_tabular,
        "curie_weiss": _build_curie_weiss,
        "three_state_skew": _build_three_state_skew,
        "point_vortex": _build_point_vortex,
        "miller_robert": _build_miller_robert,
    }[spec.kind]
    return builder(spec)


def _params(spec):
    return spec.model_dump(exclude_none=True)


def _build_tabular(spec):
    if spec.table_I is None or spec.table_H is None:
        raise ModelFormatError("table_I" if spec.table_I is None else "table_H", "required for tabular models")
    H = np.atleast_2d(np.array(spec.table_H, dtype=float))
    mixed = spec.kind == "tabular_mixed"
    sigma = spec.sigma if spec.sigma is not None else H.shape[0]
    tau = spec.tau if spec.tau is not None else (1 if mixed else 0)
    return Model(
        kind=spec.kind, sigma=sigma, tau=tau, table_I=spec.table_I, table_H=H, params=_params(spec)
    )


def _check_alphabet(alphabet, prior):
    if len(alphabet) < 2:
        raise ConfigurationError("alphabet size must be at least 2")
    if prior is not None and len(prior) != len(alphabet):
        raise ConfigurationError("prior and alphabet lengths differ")


def _overrides(spec, components, n):
    comps = list(components)
    if spec.kernel is not None:
        K = np.array(spec.kernel, dtype=float)
        if K.shape != (n, n):
            raise ConfigurationError(f"kernel must be {n} x {n}")
        comps[0] = Component("quadratic", K)
    if spec.linear is not None:
        a = np.array(spec.linear, dtype=float)
        if a.shape != (n,):
            raise ConfigurationError(f"linear coefficients must have length {n}")
        if len(comps) > 1:
            comps[1] = Component("linear", a)
        else:
            comps.append(Component("linear", a))
    return comps


def _build_curie_weiss(spec):
    alphabet = spec.alphabet or [-1.0, 1.0]
    prior = spec.prior or [0.5, 0.5]
    _check_alphabet(alphabet, prior)
    coupling = 1 if spec.coupling is None else spec.coupling
    if coupling not in (-1, 1):
        raise ConfigurationError("coupling must be +1 (ferromagnet) or -1 (antiferromagnet)")
    y = np.array(alphabet, dtype=float)
    comps = _overrides(spec, [Component("quadratic", -coupling * np.outer(y, y))], len(y))
    return Model(
        kind="curie_weiss", sigma=len(comps), tau=spec.tau or 0, alphabet=y, prior=prior,
        components=comps, a_n=spec.a_n, params=_params(spec),
    )


def _build_three_state_skew(spec):
    alphabet = spec.alphabet or [-2.0, 0.0, 1.0]
    prior = spec.prior or [0.1, 0.3, 0.6]
    _check_alphabet(alphabet, prior)
    if len(alphabet) != 3:
        raise ConfigurationError("three_state_skew needs exactly three letters")
    c = -1.0 if spec.coefficient is None else spec.coefficient
    y = np.array(alphabet, dtype=float)
    comps = _overrides(spec, [Component("quadratic", c * np.outer(y, y))], 3)
    return Model(
        kind="three_state_skew", sigma=len(comps), tau=spec.tau or 0, alphabet=y, prior=prior,
        components=comps, a_n=spec.a_n, params=_params(spec),
    )


def _build_point_vortex(spec):
    cells = 3 if spec.cells is None else spec.cells
    cutoff = 3 if spec.cutoff is None else spec.cutoff
    if cells < 1 or cells * cells < 2:
        raise ConfigurationError("point_vortex needs at least 2 grid cells")
    if cutoff < 1:
        raise ConfigurationError("Fourier cutoff must be at least 1")
    n = cells * cells
    prior = spec.prior or [1.0 / n] * n
    alphabet = spec.alphabet or [float(k) for k in range(n)]
    _check_alphabet(alphabet, prior)
    if len(alphabet) != n:
        raise ConfigurationError(f"point_vortex alphabet must list all {n} cells")
    comps = _overrides(spec, [Component("quadratic", torus_cell_kernel(cells, cutoff))], n)
    return Model(
        kind="point_vortex", sigma=len(comps), tau=spec.tau or 0, alphabet=alphabet, prior=prior,
        components=comps, a_n=spec.a_n, params=_params(spec),
    )


def _build_miller_robert(spec):
    q = 4 if spec.q is None else spec.q
    cutoff = 3 if spec.cutoff is None else spec.cutoff
    sigma = 2 if spec.sigma is None else spec.sigma
    if q < 1:
        raise ConfigurationError("q must be at least 1")
    if cutoff < 1:
        raise ConfigurationError("Fourier cutoff must be at least 1")
    if sigma not in (1, 2):
        raise ConfigurationError("miller_robert supports sigma in {1, 2}")
    alphabet = spec.alphabet or [-1.0, 0.0, 1.0]
    m = len(alphabet)
    prior = spec.prior or [1.0 / m] * m
    _check_alphabet(alphabet, prior)
    y = np.array(alphabet, dtype=float)
    comps = [Component("quadratic", np.kron(strip_cell_kernel(q, cutoff), np.outer(y, y)))]
    if sigma == 2:
        a = np.array(spec.enstrophy, dtype=float) if spec.enstrophy is not None else y**2
        if a.shape != y.shape:
            raise ConfigurationError("enstrophy must give one value per letter")
        comps.append(Component("linear", np.tile(a, q)))
    comps = _overrides(spec, comps, q * m)
    tau = spec.tau if spec.tau is not None else (1 if sigma == 2 else 0)
    return Model(
        kind="miller_robert", sigma=len(comps), tau=tau, alphabet=y, prior=prior, q=q,
        components=comps, a_n=spec.a_n, site_cutoff=cutoff, params=_params(spec),
    )


# --------------------------------------------------------------------------- shortcuts


def curie_weiss(**kw):
    return build_builtin({"kind": "curie_weiss", **kw})


def three_state_skew(**kw):
    return build_builtin({"kind": "three_state_skew", **kw})


def point_vortex(**kw):
    return build_builtin({"kind": "point_vortex", **kw})


def miller_robert(**kw):
    return build_builtin({"kind": "miller_robert", **kw})


def tabular(I, H):
    return build_builtin({"kind": "tabular", "table_I": list(I), "table_H": np.asarray(H, float).tolist()})


def tabular_mixed(I, H1, H2):
    return build_builtin({"kind": "tabular_mixed", "table_I": list(I), "table_H": [list(H1), list(H2)]})


def three_point_table():
    """Smallest nonequivalence witness: the middle point never minimizes I + beta*H."""
    return tabular([0.0, 0.5, 0.2], [0.0, 1.0, 2.0])


def two_point_table():
    return tabular([0.0, 0.0], [0.0, 1.0])


def worked_mixed_table():
    return tabular_mixed([0.0, 0.4, 0.3, 0.1], [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0])


def random_tabular(rng, max_size=8):
    """Random table with I, H uniform on [0, 1] and one forced zero of I."""
    n = int(rng.integers(2, max_size + 1))
    I = rng.uniform(0.0, 1.0, n)
    I[rng.integers(n)] = 0.0
    return tabular(I, rng.uniform(0.0, 1.0, n))


def random_tabular_mixed(rng, max_size=8, levels=3):
    """Random mixed table; H values on a small integer lattice so slices share values."""
    n = int(rng.integers(2, max_size + 1))
    I = rng.uniform(0.0, 1.0, n)
    I[rng.integers(n)] = 0.0
    H1 = rng.integers(0, levels, n).astype(float)
    H2 = rng.integers(0, levels, n).astype(float)
    return tabular_mixed(I, H1, H2)


BUILTINS = {
    "curie_weiss": curie_weiss,
    "three_state_skew": three_state_skew,
    "point_vortex": point_vortex,
    "miller_robert": miller_robert,
    "three_point_table": three_point_table,
    "two_point_table": two_point_table,
    "worked_mixed_table": worked_mixed_table,
}


# --------------------------------------------------------------------------- files


def load_model(path):
    """Read a model description file (or ``builtin:<name>``)."""
    path = str(path)
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        if name not in BUILTINS:
            raise ModelFormatError("kind", f"unknown builtin {name!r}")
        return BUILTINS[name]()
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError("<file>", f"not valid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ModelFormatError("<root>", "model description must be a JSON object")
    return build_builtin(raw)


def model_to_dict(model):
    return dict(model.params)


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n")


def search_nonconcave_skew(alphabets=None, priors=None, coefficients=(-1.0,), points=41, min_gap=1e-3):
    """Scan the three-state family for a parameter set whose entropy is not concave.

    Returns ``(spec_dict, gap)`` for the first hit, where ``gap`` is the largest
    distance between the sampled entropy and its concave hull, or ``None``.
    """
    from .lft import SampledCurve, concave_hull
    from .thermo import entropy_curve, repr_range

    alphabets = alphabets or [(-2.0, 0.0, 1.0), (-1.0, 0.0, 2.0), (-3.0, 0.0, 1.0)]
    priors = priors or [(0.1, 0.3, 0.6), (0.05, 0.35, 0.6), (0.2, 0.2, 0.6)]
    for alphabet in alphabets:
        for prior in priors:
            for c in coefficients:
                spec = {"kind": "three_state_skew", "alphabet": list(alphabet), "prior": list(prior), "coefficient": c}
                model = build_builtin(spec)
                if validate_model(model):
                    continue
                lo, hi = repr_range(model)[0]
                grid = np.linspace(lo, hi, points)
                curve = entropy_curve(model, grid)
                finite = np.isfinite(curve.values)
                if finite.sum() < 3:
                    continue
                hull = concave_hull(SampledCurve(grid[finite], curve.values[finite]))
                gap = float(np.max(hull.values - curve.values[finite]))
                if gap > min_gap:
                    return spec, gap
    return None
