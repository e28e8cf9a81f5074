"""Truncated Fourier approximations of the periodic Green's function of -Laplacian.

All kernels are sums of |2 pi xi|^-2 exp(2 pi i <xi, x - x'>) over nonzero
integer wave vectors with max-norm at most ``cutoff``.  Cell kernels average the
sum over pairs of cells, which multiplies each mode by a squared sinc factor.
"""

import itertools

import numpy as np


def _wave_vectors(cutoff):
    rng = range(-cutoff, cutoff + 1)
    return np.array([xi for xi in itertools.product(rng, rng) if xi != (0, 0)], dtype=float)


def _sinc(t):
    # np.sinc is sin(pi t)/(pi t)
    return np.sinc(t / np.pi)


def torus_cell_kernel(cells, cutoff):
    """Cell-pair averaged kernel on a ``cells`` x ``cells`` grid of the unit torus.

    Returns an array of shape (cells**2, cells**2); cell ``k`` sits at row
    ``k // cells`` and column ``k % cells``.
    """
    xi = _wave_vectors(cutoff)
    weight = 1.0 / (4.0 * np.pi**2 * np.sum(xi**2, axis=1))
    weight = weight * (_sinc(np.pi * xi[:, 0] / cells) * _sinc(np.pi * xi[:, 1] / cells)) ** 2
    idx = np.arange(cells * cells)
    centers = np.stack([(idx % cells + 0.5) / cells, (idx // cells + 0.5) / cells], axis=1)
    diff = centers[:, None, :] - centers[None, :, :]
    phase = 2.0 * np.pi * np.einsum("abk,jk->abj", diff, xi)
    kernel = np.cos(phase) @ weight
    return 0.5 * (kernel + kernel.T)


def strip_cell_kernel(q, cutoff):
    """Kernel between ``q`` horizontal strips of the unit torus.

    Averaging over a full horizontal period kills every mode with a nonzero
    first component, so only xi = (0, k) survives.
    """
    k = np.array([k for k in range(-cutoff, cutoff + 1) if k != 0], dtype=float)
    weight = _sinc(np.pi * k / q) ** 2 / (4.0 * np.pi**2 * k**2)
    centers = (np.arange(q) + 0.5) / q
    diff = centers[:, None] - centers[None, :]
    kernel = np.cos(2.0 * np.pi * diff[:, :, None] * k[None, None, :]) @ weight
    # modes with q | k carry an exactly zero sinc weight; clear the rounding residue
    kernel = kernel - kernel.mean(axis=1, keepdims=True) if q > 1 else kernel
    return 0.5 * (kernel + kernel.T)


def lattice_green(side, cutoff):
    """Site-level kernel g(d) on a ``side`` x ``side`` periodic lattice.

    Returned as an array indexed by displacement ``[dy, dx]`` in lattice units.
    """
    xi = _wave_vectors(cutoff)
    weight = 1.0 / (4.0 * np.pi**2 * np.sum(xi**2, axis=1))
    d = np.arange(side) / side
    dx, dy = np.meshgrid(d, d)
    phase = 2.0 * np.pi * (dx[..., None] * xi[:, 0] + dy[..., None] * xi[:, 1])
    return np.cos(phase) @ weight
