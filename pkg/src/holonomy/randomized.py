"""Random purifications, tangent vectors and smooth curves for property checks."""

from __future__ import annotations

import numpy as np

from .curves import DensityCurve, TimeGrid
from .linalg_core import dagger, random_hermitian, random_skew_hermitian, random_unitary

__all__ = [
    "random_curve",
    "random_partition",
    "random_purification",
    "random_spectrum",
    "random_level_tangent",
]


def random_partition(n: int, rng: np.random.Generator) -> tuple:
    """Random composition of n, e.g. (2, 1) for n = 3."""
    sizes, left = [], n
    while left:
        k = int(rng.integers(1, left + 1))
        sizes.append(k)
        left -= k
    return tuple(sizes)


def random_spectrum(sizes: tuple, rng: np.random.Generator, min_gap: float = 0.05) -> np.ndarray:
    """Positive values summing to one, repeated by ``sizes``, distinct values at least ``min_gap`` apart."""
    m = len(sizes)
    while True:
        vals = rng.uniform(0.2, 1.0, m)
        if m == 1 or np.min(np.diff(np.sort(vals))) > 1.5 * min_gap:
            break
    p = np.repeat(vals, sizes)
    p = np.sort(p / p.sum())
    return p


def random_purification(n: int, rng: np.random.Generator, degenerate: bool = True) -> np.ndarray:
    """psi = V diag(sqrt p) W with a random multiplicity pattern for psi^dagger psi."""
    sizes = random_partition(n, rng) if degenerate else (1,) * n
    p = random_spectrum(sizes, rng, min_gap=0.05 / n)
    v = random_unitary(n, rng)
    w = random_unitary(n, rng)
    return (v * np.sqrt(p)) @ w


def random_level_tangent(psi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A vector K psi, K skew-Hermitian, tangent to the level set through psi."""
    return random_skew_hermitian(psi.shape[0], rng) @ psi


def random_curve(n: int, rng: np.random.Generator, steps: int = 200, t1: float = 1.0,
                 isospectral: bool = False) -> DensityCurve:
    """rho(t) = V(t) diag(p(t)) V(t)^dagger with V(t) = exp(-i (H0 t + H1 t^2 / 2)).

    The eigenvalues p_k(t) stay separated so the spectral frames are trackable.
    """
    grid = TimeGrid(0.0, t1, steps)
    t = grid.samples
    h0 = random_hermitian(n, rng)
    h1 = random_hermitian(n, rng)
    base = np.sort(rng.uniform(0.5, 1.5, n)) + np.arange(n) * 0.8
    amp = np.zeros(n) if isospectral else rng.uniform(-0.2, 0.2, n)
    freq = rng.uniform(0.5, 3.0, n)
    p = base[None, :] + amp[None, :] * np.sin(freq[None, :] * t[:, None])
    p = p / p.sum(axis=1, keepdims=True)
    gen = h0[None] * t[:, None, None] + h1[None] * (t[:, None, None] ** 2 / 2)
    w, e = np.linalg.eigh(gen)
    v = (e * np.exp(-1j * w)[:, None, :]) @ dagger(e)
    rho = (v * p[:, None, :]) @ dagger(v)
    return DensityCurve(grid, (rho + dagger(rho)) / 2)
