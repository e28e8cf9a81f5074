"""Independent reference computations used by the tests.

Nothing here imports the solvers under test: closed forms come from scalar
root finding, tabular quantities from plain Python loops.
"""

import itertools
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

# frozen reference values, each derived below and re-checked in test_oracles.py
CW_M_STAR_2 = 0.9575040240772688   # root of m = tanh(2m)
CW_S_AT_MINUS_EIGHTH = -0.13081203594113694  # binary entropy at p = 3/4, minus log 2
CW_PHI_2 = -0.32652388742692406      # min over m of I(m) - m^2
CW_SHELL_A4_GROUND = 0.125           # u = -1/2, a_n = 4: both aligned states, 2 / 2^4
CW_SHELL_A4_EIGHTH = 0.5            # u = -1/8, a_n = 4: |m| = 1/2, 8 / 2^4


def binary_rate(m):
    """Relative entropy of ((1-m)/2, (1+m)/2) w.r.t. the uniform prior."""
    out = 0.0
    for p in ((1 - m) / 2, (1 + m) / 2):
        if p > 0:
            out += p * math.log(2 * p)
    return out


def cw_entropy(u):
    """s(u) = -[log 2 + p log p + (1-p) log(1-p)], p = (1 + sqrt(-2u))/2, on [-1/2, 0]."""
    if u < -0.5 - 1e-15 or u > 1e-15:
        return -math.inf
    p = (1 + math.sqrt(max(-2 * u, 0.0))) / 2
    val = math.log(2)
    for t in (p, 1 - p):
        if t > 0:
            val += t * math.log(t)
    return -val


def cw_m_star(beta):
    if beta <= 1:
        return 0.0
    return brentq(lambda m: m - math.tanh(beta * m), 1e-9, 1.0)


def cw_free_energy(beta):
    """min over m in [-1, 1] of I(m) - beta m^2 / 2 (scalar bounded search + grid seed)."""
    f = lambda m: binary_rate(m) - beta * m * m / 2  # noqa: E731
    grid = np.linspace(-1, 1, 4001)
    k = int(np.argmin([f(m) for m in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return min(res.fun, f(grid[k]))


def table_entropy(I, H, u):
    vals = [i for i, h in zip(I, H) if h == u]
    return -min(vals) if vals else -math.inf


def table_free_energy(I, H, beta):
    return min(i + beta * h for i, h in zip(I, H))


def table_canonical(I, H, beta, tol=1e-8):
    best = table_free_energy(I, H, beta)
    return [k for k, (i, h) in enumerate(zip(I, H)) if i + beta * h <= best + tol]


def table_micro(I, H, u, tol=1e-8):
    feas = [(i, k) for k, (i, h) in enumerate(zip(I, H)) if h == u]
    if not feas:
        return []
    best = min(i for i, _ in feas)
    return [k for i, k in feas if i <= best + tol]


def upper_hull_values(x, y):
    """Concave majorant at the sample points by brute force over all chords."""
    x = list(x)
    y = list(y)
    out = []
    for k, xk in enumerate(x):
        best = y[k]
        for i, j in itertools.combinations(range(len(x)), 2):
            if x[i] <= xk <= x[j] and x[j] > x[i]:
                lam = (xk - x[i]) / (x[j] - x[i])
                best = max(best, (1 - lam) * y[i] + lam * y[j])
        out.append(best)
    return out


def brute_nonequivalent(I, H):
    """u values (distinct H) strictly below the concave hull of the sampled entropy."""
    us = sorted(set(H))
    s = [table_entropy(I, H, u) for u in us]
    hull = upper_hull_values(us, s)
    eps = max(1e-9, 1e-6 * (max(s) - min(s)))
    return {u for u, a, b in zip(us, s, hull) if b - a > eps}


def multinomial_shell(prior, alphabet_energy, n, u, r):
    """P_n{|H_n - u| <= r} by enumerating all m^n configurations (tiny n)."""
    m = len(prior)
    total = 0.0
    for cfg in itertools.product(range(m), repeat=n):
        counts = np.bincount(cfg, minlength=m)
        h = alphabet_energy(counts / n)
        if abs(h - u) <= r:
            total += math.prod(prior[c] for c in cfg)
    return total
