"""Microstate Monte Carlo for the canonical, shell and mixed ensembles, plus an
exact type-class oracle for small mean-field systems.

Every chain resamples one site at a time from the prior, so the proposal
ratio cancels the prior ratio and the Metropolis acceptance reduces to
``min(1, exp(-a_n <beta, dH>))``.  Shell chains reject proposals that leave
``{|H_c - u_c| <= r}``.  Random numbers are drawn in chunks from a numpy
``Generator`` and consumed by a compiled kernel, so a fixed seed gives
bit-identical output.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .errors import CapacityError, ConfigurationError, FeasibilityError, StatisticalError
from .model import counts_to_cells, index_counts, microstate_energy, rate_value, repr_value, site_green
from .parallel import pmap

CANONICAL = "canonical"
MICROCANONICAL = "microcanonical"
MIXED = "mixed"
ENSEMBLES = (CANONICAL, MICROCANONICAL, MIXED)

CHUNK = 1 << 20
TYPE_CLASS_BUDGET = 1_000_000
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ChainConfig:
    """Chain settings. ``beta`` tilts every component (canonical); ``u``/``r``
    define the shell (microcanonical); ``beta1``/``u2``/``r`` the mixed chain."""

    ensemble: str
    a_n: int
    sweeps: int
    burn_in: int = 0
    seed: int = 0
    beta: tuple = ()
    u: tuple = ()
    r: float | None = None
    beta1: float | None = None
    u2: float | None = None
    blocks: int = 20
    anneal_sweeps: int = 2000
    proposal: str = "resample"

    def __post_init__(self):
        if self.ensemble not in ENSEMBLES:
            raise ConfigurationError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.a_n < 2:
            raise ConfigurationError("a_n must be at least 2")
        if self.sweeps < 1 or self.burn_in < 0:
            raise ConfigurationError("sweeps must be >= 1 and burn_in >= 0")
        if self.proposal != "resample":
            raise ConfigurationError("only single-site resampling from the prior is supported")
        object.__setattr__(self, "beta", tuple(float(b) for b in np.atleast_1d(self.beta)))
        object.__setattr__(self, "u", tuple(float(v) for v in np.atleast_1d(self.u)))
        if self.ensemble == CANONICAL and not self.beta:
            raise ConfigurationError("canonical chain needs beta")
        if self.ensemble == MICROCANONICAL and not self.u:
            raise ConfigurationError("microcanonical chain needs u")
        if self.ensemble == MIXED and (self.beta1 is None or self.u2 is None):
            raise ConfigurationError("mixed chain needs beta1 and u2")
        if self.ensemble != CANONICAL and (self.r is None or not self.r > 0):
            raise ConfigurationError("shell half-width r must be > 0")
        if self.r is not None and not self.r > 0:
            raise ConfigurationError("shell half-width r must be > 0")


@dataclass
class ChainResult:
    accepted: float
    mean_macrostate: np.ndarray
    shell_occupancy: float | None
    block_macrostates: np.ndarray
    mean_energy: np.ndarray
    abs_magnetization: float
    abs_magnetization_stderr: float
    split_rhat: float
    r_min: float | None
    irreducible: bool | None
    config: dict
    counts: np.ndarray = field(default=None, repr=False)
    energies: np.ndarray = field(default=None, repr=False)
    states: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "accepted": self.accepted,
            "mean_macrostate": np.asarray(self.mean_macrostate).tolist(),
            "shell_occupancy": self.shell_occupancy,
            "block_macrostates": np.asarray(self.block_macrostates).tolist(),
            "mean_energy": np.asarray(self.mean_energy).tolist(),
            "abs_magnetization": self.abs_magnetization,
            "abs_magnetization_stderr": self.abs_magnetization_stderr,
            "split_rhat": self.split_rhat,
            "r_min": self.r_min,
            "irreducible": self.irreducible,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported chain schema_version {d.get('schema_version')!r}")
        return cls(
            accepted=d["accepted"],
            mean_macrostate=np.array(d["mean_macrostate"]),
            shell_occupancy=d["shell_occupancy"],
            block_macrostates=np.array(d["block_macrostates"]),
            mean_energy=np.array(d["mean_energy"]),
            abs_magnetization=d["abs_magnetization"],
            abs_magnetization_stderr=d["abs_magnetization_stderr"],
            split_rhat=d["split_rhat"],
            r_min=d["r_min"],
            irreducible=d["irreducible"],
            config=d["config"],
        )

    def trace_rows(self):
        """(block index, H_n..., macrostate...) rows for CSV streaming."""
        if self.energies is None:
            return []
        nb = len(self.block_macrostates)
        per = max(1, len(self.energies) // max(nb, 1))
        rows = []
        for k in range(len(self.energies)):
            rows.append([min(k // per, nb - 1), *self.energies[k].tolist(), *self.counts[k].tolist()])
        return rows


# --------------------------------------------------------------------------- compiled kernel


@numba.njit(cache=True, nogil=True)
def _steps(idx, cell_of, m, quad, lin, Kv, H, coef, cons, lo, hi, site_comp, green, side, alpha, F,
           sites, letters, unif, n_steps, anneal, T0, T1, step0, burn_steps, rec_every, rec_counts,
           rec_H, counts, code, mpow, rec_states):
    """Run ``n_steps`` single-site proposals; returns (accepted, steps taken, code).

    ``anneal`` switches the target to exp(-n * dist / T) with dist the max-norm
    excess of the constrained components over the shell; it stops at the first
    configuration inside the shell.
    """
    n = idx.shape[0]
    S = H.shape[0]
    N = Kv.shape[1]
    dH = np.zeros(S)
    acc = 0
    taken = 0
    for t in range(n_steps):
        s = sites[t]
        b = letters[t]
        a = idx[s]
        taken += 1
        g = step0 + t
        if b != a:
            c = cell_of[s]
            ia = c * m + a
            ib = c * m + b
            for k in range(S):
                if k == site_comp:
                    dz = alpha[b] - alpha[a]
                    dH[k] = (2.0 * dz * F[s] + dz * dz * green[0]) / (2.0 * n * n)
                else:
                    dd = (quad[k, ia, ia] + quad[k, ib, ib] - 2.0 * quad[k, ia, ib]) / (n * n)
                    dH[k] = (Kv[k, ib] - Kv[k, ia]) / n + 0.5 * dd + (lin[k, ib] - lin[k, ia]) / n
            if anneal:
                d_old = 0.0
                d_new = 0.0
                for k in range(S):
                    if cons[k]:
                        e0 = max(H[k] - hi[k], lo[k] - H[k], 0.0)
                        e1 = max(H[k] + dH[k] - hi[k], lo[k] - H[k] - dH[k], 0.0)
                        d_old = max(d_old, e0)
                        d_new = max(d_new, e1)
                frac = t / max(n_steps - 1, 1)
                T = T0 * (T1 / T0) ** frac
                x = -n * (d_new - d_old) / T
                ok = x >= 0.0 or unif[t] < math.exp(x)
            else:
                ok = True
                for k in range(S):
                    if cons[k]:
                        hk = H[k] + dH[k]
                        if hk < lo[k] or hk > hi[k]:
                            ok = False
                if ok:
                    x = 0.0
                    for k in range(S):
                        x -= n * coef[k] * dH[k]
                    ok = x >= 0.0 or unif[t] < math.exp(x)
            if ok:
                acc += 1
                idx[s] = b
                counts[ia] -= 1
                counts[ib] += 1
                code += (b - a) * mpow[s]
                for k in range(S):
                    H[k] += dH[k]
                    if k == site_comp:
                        dz = alpha[b] - alpha[a]
                        sy = s // side
                        sx = s % side
                        for j in range(n):
                            jy = (j // side - sy) % side
                            jx = (j % side - sx) % side
                            F[j] += dz * green[jy * side + jx]
                    else:
                        for j in range(N):
                            Kv[k, j] += (quad[k, j, ib] - quad[k, j, ia]) / n
        else:
            acc += 1
        if rec_states.shape[0] > 0:
            rec_states[g] = code
        if anneal:
            inside = True
            for k in range(S):
                if cons[k] and (H[k] < lo[k] or H[k] > hi[k]):
                    inside = False
            if inside:
                return acc, taken, code
        elif g >= burn_steps and (g + 1 - burn_steps) % rec_every == 0:
            r = (g + 1 - burn_steps) // rec_every - 1
            if r < rec_counts.shape[0]:
                for j in range(N):
                    rec_counts[r, j] = counts[j]
                for k in range(S):
                    rec_H[r, k] = H[k]
    return acc, taken, code


# --------------------------------------------------------------------------- chain setup


class _Chain:
    """Mutable chain state for one model at one system size."""

    def __init__(self, model, n, coef, cons, lo, hi, seed):
        if model.is_tabular:
            raise ConfigurationError("tabular models have no microstate layer")
        if n % model.q:
            raise ConfigurationError(f"a_n = {n} is not divisible by q = {model.q}")
        self.model = model
        self.n = n
        self.m = model.m
        S = model.sigma
        N = model.q * model.m
        self.quad = np.zeros((S, N, N))
        self.lin = np.zeros((S, N))
        for k, comp in enumerate(model.components):
            if comp.kind == "quadratic":
                self.quad[k] = comp.data
            else:
                self.lin[k] = comp.data
        self.site_comp = -1
        self.side = 1
        self.green = np.zeros(1)
        if model.site_cutoff is not None:
            g = site_green(model, n)
            self.side = g.shape[0]
            self.green = np.ascontiguousarray(g.reshape(-1))
            self.site_comp = next(k for k, c in enumerate(model.components) if c.kind == "quadratic")
            self.quad[self.site_comp] = 0.0
        self.cell_of = (np.arange(n) // (n // model.q)).astype(np.int64)
        self.coef = np.asarray(coef, dtype=float)
        self.cons = np.asarray(cons, dtype=np.bool_)
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.alpha = np.asarray(model.alphabet, dtype=float)
        self.cdf = np.cumsum(model.prior)
        self.cdf[-1] = 1.0
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self.idx = np.searchsorted(self.cdf, self.rng.random(n), side="right").astype(np.int64)
        self.mpow = np.zeros(n, dtype=np.int64)
        if self.m ** n < 2**62:
            self.mpow = (self.m ** np.arange(n)).astype(np.int64)
        self._refresh()

    def _refresh(self):
        model, n = self.model, self.n
        counts = index_counts(model, self.idx)
        self.counts = counts.reshape(-1).astype(np.int64)
        v = counts.reshape(-1) / n
        self.Kv = np.einsum("kij,j->ki", self.quad, v)
        self.H = np.asarray(microstate_energy(model, self.alpha[self.idx]), dtype=float).copy()
        if not np.all(np.isfinite(self.H)):
            raise ConfigurationError("microstate energy is not finite")
        self.F = np.zeros(n)
        if self.site_comp >= 0:
            zeta = self.alpha[self.idx].reshape(self.side, self.side)
            g = self.green.reshape(self.side, self.side)
            self.F = np.real(np.fft.ifft2(np.fft.fft2(zeta) * np.fft.fft2(g))).reshape(-1)
        self.code = int(np.dot(self.idx, self.mpow)) if self.mpow.any() else 0

    def in_shell(self):
        c = self.cons
        return bool(np.all((self.H[c] >= self.lo[c]) & (self.H[c] <= self.hi[c])))

    def run(self, total, anneal=False, T0=1.0, T1=1e-3, burn_steps=0, rec_every=1, n_rec=0, record_states=False):
        N = self.Kv.shape[1]
        S = self.H.shape[0]
        rec_counts = np.zeros((n_rec, N), dtype=np.int64)
        rec_H = np.zeros((n_rec, S))
        rec_states = np.zeros(total if record_states else 0, dtype=np.int64)
        acc = 0
        done = 0
        while done < total:
            k = min(CHUNK, total - done)
            sites = self.rng.integers(0, self.n, size=k)
            letters = np.searchsorted(self.cdf, self.rng.random(k), side="right").astype(np.int64)
            unif = self.rng.random(k)
            if anneal:
                burn, every, rc, rh, rs = 0, 1, rec_counts[:0], rec_H[:0], rec_states[:0]
            else:
                burn, every, rc, rh, rs = burn_steps, rec_every, rec_counts, rec_H, rec_states
            a, taken, self.code = _steps(
                self.idx, self.cell_of, self.m, self.quad, self.lin, self.Kv, self.H, self.coef, self.cons,
                self.lo, self.hi, self.site_comp, self.green, self.side, self.alpha, self.F,
                sites, letters, unif, k, anneal, T0, T1, done, burn, every, rc, rh,
                self.counts, self.code, self.mpow, rs,
            )
            acc += a
            done += taken
            if anneal and taken < k:
                break
        return acc, done, rec_counts, rec_H, rec_states


def max_site_change(model, n):
    """Upper bound on |H_n(zeta') - H_n(zeta)| for one single-site change (max over components)."""
    N = model.q * model.m
    best = 0.0
    for k, comp in enumerate(model.components):
        if model.site_cutoff is not None and k == 0 and comp.kind == "quadratic":
            g = site_green(model, n)
            a = np.abs(model.alphabet)
            dz = float(model.alphabet.max() - model.alphabet.min())
            bound = (2 * dz * a.max() * np.abs(g).sum() + dz * dz * abs(g[0, 0])) / (2.0 * n * n)
            best = max(best, bound)
            continue
        for ia in range(N):
            for ib in range(N):
                if ia // model.m != ib // model.m or ia == ib:
                    continue
                d = np.zeros(N)
                d[ib] += 1.0 / n
                d[ia] -= 1.0 / n
                if comp.kind == "quadratic":
                    Kd = comp.data @ d
                    bound = np.abs(Kd).max() + 0.5 * abs(d @ Kd)
                else:
                    bound = abs(comp.data @ d)
                best = max(best, float(bound))
    return best


def _targets(model, config):
    S = model.sigma
    coef = np.zeros(S)
    cons = np.zeros(S, dtype=bool)
    lo = np.full(S, -np.inf)
    hi = np.full(S, np.inf)
    if config.ensemble == CANONICAL:
        beta = np.array(config.beta)
        if beta.shape != (S,):
            raise ConfigurationError(f"beta must have {S} component(s)")
        coef[:] = beta
    elif config.ensemble == MICROCANONICAL:
        u = np.array(config.u)
        if u.shape != (S,):
            raise ConfigurationError(f"u must have {S} component(s)")
        cons[:] = True
        lo, hi = u - config.r, u + config.r
    else:
        if S != 2:
            raise ConfigurationError("mixed chains need sigma = 2")
        coef[0] = config.beta1
        cons[1] = True
        lo[1], hi[1] = config.u2 - config.r, config.u2 + config.r
    return coef, cons, lo, hi


def _summarize(model, config, chain, acc, total, rec_counts, rec_H, states, r_min, occupancy_shell):
    n = config.a_n
    q, m = model.q, model.m
    cells = np.array([counts_to_cells(model, c.reshape(q, m), n) for c in rec_counts])
    mean_cells = cells.mean(axis=0)
    mags = np.abs(cells @ model.alphabet).mean(axis=1)
    nb = max(1, min(config.blocks, len(cells)))
    blocks = np.array([b.mean(axis=0) for b in np.array_split(cells, nb)])
    bmag = np.array([b.mean() for b in np.array_split(mags, nb)])
    stderr = float(bmag.std(ddof=1) / np.sqrt(nb)) if nb > 1 else float("nan")
    e = rec_H[:, 0]
    halves = np.array_split(e, 2)
    if len(e) >= 4:
        means = np.array([h.mean() for h in halves])
        within = np.mean([h.var(ddof=1) for h in halves])
        between = len(halves[0]) * means.var(ddof=1)
        ln = len(halves[0])
        rhat = float(np.sqrt(((ln - 1) / ln * within + between / ln) / within)) if within > 0 else 1.0
    else:
        rhat = float("nan")
    occupancy = None
    if occupancy_shell is not None:
        u, r = occupancy_shell
        occupancy = float(np.mean(np.all(np.abs(rec_H[:, : len(u)] - u) <= r, axis=1)))
    if config.ensemble != CANONICAL:
        c = chain.cons
        inside = np.all((rec_H[:, c] >= chain.lo[c]) & (rec_H[:, c] <= chain.hi[c]), axis=1)
        assert inside.all(), "shell chain recorded a sample outside the shell"
        occupancy = 1.0
    cfg = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(config).items()}
    return ChainResult(
        accepted=float(acc / total) if total else 0.0,
        mean_macrostate=mean_cells[0] if q == 1 else mean_cells,
        shell_occupancy=occupancy,
        block_macrostates=blocks[:, 0] if q == 1 else blocks,
        mean_energy=rec_H.mean(axis=0),
        abs_magnetization=float(mags.mean()),
        abs_magnetization_stderr=stderr,
        split_rhat=rhat,
        r_min=r_min,
        irreducible=None if r_min is None else bool(config.r >= r_min),
        config=cfg,
        counts=rec_counts,
        energies=rec_H,
        states=states if len(states) else None,
    )


def run_canonical_chain(model, config, record_states=False):
    """Metropolis chain with stationary law proportional to exp(-a_n <beta, H_n>) P_n."""
    if config.ensemble != CANONICAL:
        raise ConfigurationError("run_canonical_chain needs a canonical config")
    coef, cons, lo, hi = _targets(model, config)
    n = config.a_n
    chain = _Chain(model, n, coef, cons, lo, hi, config.seed)
    total = (config.burn_in + config.sweeps) * n
    acc, _, rc, rh, st = chain.run(total, burn_steps=config.burn_in * n, rec_every=n, n_rec=config.sweeps,
                                   record_states=record_states)
    shell = (np.array(config.u), config.r) if config.u and config.r is not None else None
    return _summarize(model, config, chain, acc, total, rc, rh, st, None, shell)


def find_shell_start(chain, sweeps):
    """Simulated annealing on the distance to the shell; raises FeasibilityError on failure."""
    if chain.in_shell():
        return
    for T0 in (1.0, 0.1):
        chain.run(sweeps * chain.n, anneal=True, T0=T0, T1=1e-4)
        if chain.in_shell():
            return
    raise FeasibilityError(
        f"no configuration inside the shell found after {2 * sweeps} annealing sweeps"
    )


def run_shell_chain(model, config):
    """Metropolis chain restricted to the shell; mixed configs also tilt H^1 by beta1."""
    if config.ensemble not in (MICROCANONICAL, MIXED):
        raise ConfigurationError("run_shell_chain needs a microcanonical or mixed config")
    from .optimize import repr_range

    coef, cons, lo, hi = _targets(model, config)
    ranges = repr_range(model)
    for k in np.flatnonzero(cons):
        if hi[k] < ranges[k][0] - 1e-12 or lo[k] > ranges[k][1] + 1e-12:
            raise FeasibilityError(
                f"shell [{lo[k]:.6g}, {hi[k]:.6g}] misses the range [{ranges[k][0]:.6g}, {ranges[k][1]:.6g}] of H^{k + 1}"
            )
    n = config.a_n
    chain = _Chain(model, n, coef, cons, lo, hi, config.seed)
    find_shell_start(chain, config.anneal_sweeps)
    r_min = max_site_change(model, n)
    total = (config.burn_in + config.sweeps) * n
    acc, _, rc, rh, st = chain.run(total, burn_steps=config.burn_in * n, rec_every=n, n_rec=config.sweeps)
    return _summarize(model, config, chain, acc, total, rc, rh, st, r_min, None)


def run_chain(model, config, **kw):
    if config.ensemble == CANONICAL:
        return run_canonical_chain(model, config, **kw)
    return run_shell_chain(model, config)


def run_chains(model, configs):
    """Independent chains, merged in input order."""
    return pmap(lambda c: run_chain(model, c), configs)


def r_ladder(model, config, radii):
    """Shell-chain results over a ladder of half-widths (sensitivity to r)."""
    out = []
    for r in radii:
        cfg = ChainConfig(**{**asdict(config), "r": float(r)})
        out.append((float(r), run_shell_chain(model, cfg)))
    return out


# --------------------------------------------------------------------------- exact chain law


def exact_transition_matrix(model, beta, n):
    """Full Metropolis transition matrix over all m^n configurations (tiny n only)."""
    m = model.m
    if m**n > 4096:
        raise CapacityError(f"{m}^{n} configurations exceed the exact transition budget")
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    configs = np.array(np.unravel_index(np.arange(m**n), (m,) * n, order="F")).T
    E = np.array([microstate_energy(model, model.alphabet[c]) @ beta for c in configs])
    P = np.zeros((m**n, m**n))
    mpow = m ** np.arange(n)
    for i, c in enumerate(configs):
        for s in range(n):
            for b in range(m):
                j = i + (b - c[s]) * mpow[s]
                if j == i:
                    P[i, i] += model.prior[b] / n
                    continue
                a = min(1.0, math.exp(-n * (E[j] - E[i])))
                P[i, j] += model.prior[b] / n * a
                P[i, i] += model.prior[b] / n * (1 - a)
    logw = np.array([np.log(model.prior[c]).sum() for c in configs]) - n * E
    pi = np.exp(logw - logsumexp(logw))
    return P, pi


# --------------------------------------------------------------------------- type classes


def compositions(n, m):
    """All count vectors of length m summing to n, as an (K, m) int array."""
    if m == 1:
        return np.array([[n]])
    rows = []
    for k in range(n + 1):
        for rest in compositions(n - k, m - 1):
            rows.append([k, *rest])
    return np.array(rows, dtype=np.int64)


def _composition_count(n, m):
    return math.comb(n + m - 1, m - 1)


@dataclass
class TypeClassTable:
    counts: np.ndarray
    logp: np.ndarray
    H: np.ndarray
    n: int

    def macrostates(self):
        return self.counts / self.n


def type_class_table(model, n, budget=TYPE_CLASS_BUDGET):
    """log P_n of every type class and its conserved values (single-cell mean-field models)."""
    if model.is_tabular or model.q != 1 or model.site_cutoff is not None:
        raise CapacityError("type-class enumeration supports single-cell mean-field models")
    K = _composition_count(n, model.m)
    if K > budget:
        raise CapacityError(f"{K} type classes for a_n = {n} exceed the budget of {budget}")
    C = compositions(n, model.m)
    logp = gammaln(n + 1) - gammaln(C + 1).sum(axis=1) + C @ np.log(model.prior)
    H = np.array([repr_value(model, c / n) for c in C])
    return TypeClassTable(C, logp, H, n)


def exact_shell_probability(model, u, r, n, budget=TYPE_CLASS_BUDGET, log=False):
    """P_n{ |H_n - u| <= r } (max norm) summed exactly over type classes."""
    table = type_class_table(model, n, budget)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    inside = np.all(np.abs(table.H - u) <= r, axis=1)
    if not inside.any():
        return -np.inf if log else 0.0
    lp = float(logsumexp(table.logp[inside]))
    return lp if log else float(np.exp(lp))


def shell_partition(model, edges, n, component=0, budget=TYPE_CLASS_BUDGET):
    """Exact probabilities of the half-open shells [e_k, e_{k+1}) (last one closed)."""
    table = type_class_table(model, n, budget)
    h = table.H[:, component]
    edges = np.asarray(edges, dtype=float)
    bins = np.searchsorted(edges, h, side="right") - 1
    bins[h == edges[-1]] = len(edges) - 2
    out = np.zeros(len(edges) - 1)
    for k in range(len(out)):
        sel = bins == k
        if sel.any():
            out[k] = np.exp(logsumexp(table.logp[sel]))
    return out


def tilted_log_weights(table, beta):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    lw = table.logp - table.n * (table.H @ beta)
    return lw - logsumexp(lw)


# --------------------------------------------------------------------------- rate decay


@dataclass
class RateDecay:
    slope: float
    ci: tuple
    reference: float
    relative_error: float
    method: str
    approximate: bool
    a_ns: list
    log_probs: list
    hits: list | None = None


def _in_ball(X, center, radius):
    return np.all(np.abs(X - center) <= radius + 1e-12, axis=1)


def ensemble_rate_at(model, config, center):
    """I_beta(center) = I + <beta, H> - phi(beta) (canonical) or I - J(u) on the slice."""
    from .thermo import entropy_point, free_energy

    if config.ensemble == CANONICAL:
        beta = np.array(config.beta)
        return float(rate_value(model, center) + beta @ repr_value(model, center) - free_energy(model, beta))
    if config.ensemble == MICROCANONICAL:
        return float(rate_value(model, center) + entropy_point(model, config.u))
    raise ConfigurationError("reference rate is defined for canonical and microcanonical configs")


def _exact_ball_logprob(model, config, center, radius, n):
    table = type_class_table(model, n)
    X = table.macrostates()
    ball = _in_ball(X, center, radius)
    if config.ensemble == CANONICAL:
        lw = tilted_log_weights(table, config.beta)
        return float(logsumexp(lw[ball])) if ball.any() else -np.inf
    if config.ensemble == MICROCANONICAL:
        shell = np.all(np.abs(table.H - np.array(config.u)) <= config.r, axis=1)
        if not shell.any():
            raise FeasibilityError(f"shell is empty at a_n = {n}")
        sel = shell & ball
        return float(logsumexp(table.logp[sel]) - logsumexp(table.logp[shell])) if sel.any() else -np.inf
    raise ConfigurationError("exact ball probabilities cover canonical and microcanonical configs")


def estimate_rate_decay(model, config, center, radius, a_ns, method="auto", min_hits=50):
    """Fit the slope of log P{Y_n in ball} against a_n and compare with -I(center).

    ``method`` is ``exact`` (type classes), ``chain`` (time-averaged occupancy of
    a chain at each a_n, flagged approximate) or ``auto`` (exact when the
    enumeration fits the budget).
    """
    a_ns = [int(n) for n in a_ns]
    if len(a_ns) < 3:
        raise ConfigurationError("at least three values of a_n are needed")
    center = np.asarray(center, dtype=float)
    if method == "auto":
        try:
            for n in a_ns:
                type_class_table(model, n)
            method = "exact"
        except CapacityError:
            method = "chain"
    hits = None
    if method == "exact":
        logs = [_exact_ball_logprob(model, config, center, radius, n) for n in a_ns]
    elif method == "chain":
        logs, hits = [], []
        for n in a_ns:
            cfg = ChainConfig(**{**asdict(config), "a_n": n})
            res = run_chain(model, cfg)
            cells = np.array([counts_to_cells(model, c.reshape(model.q, model.m), n) for c in res.counts])
            X = cells.reshape(len(cells), -1)
            k = int(_in_ball(X, center.reshape(-1), radius).sum())
            hits.append(k)
            logs.append(np.log(k / len(X)) if k else -np.inf)
        if hits[0] < min_hits:
            raise StatisticalError(f"only {hits[0]} ball hits at a_n = {a_ns[0]} (need {min_hits})", hits[0])
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    if not np.all(np.isfinite(logs)):
        raise StatisticalError("ball probability is zero at some a_n", 0 if hits is None else min(hits))
    fit = stats.linregress(a_ns, logs)
    t = stats.t.ppf(0.975, len(a_ns) - 2) if len(a_ns) > 2 else np.inf
    ci = (float(fit.slope - t * fit.stderr), float(fit.slope + t * fit.stderr))
    ref = -ensemble_rate_at(model, config, center)
    rel = abs(fit.slope - ref) / abs(ref) if ref != 0 else abs(fit.slope)
    return RateDecay(float(fit.slope), ci, ref, float(rel), method, method != "exact", a_ns,
                     [float(v) for v in logs], hits)


__all__ = [
    "ChainConfig", "ChainResult", "run_canonical_chain", "run_shell_chain", "run_chain", "run_chains",
    "r_ladder", "max_site_change", "exact_transition_matrix", "type_class_table", "exact_shell_probability",
    "shell_partition", "tilted_log_weights", "estimate_rate_decay", "RateDecay", "ensemble_rate_at",
]
