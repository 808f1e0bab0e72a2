"""Dense complex-matrix kernel: Hilbert-Schmidt geometry, Hermitian
eigensystems, exponentials and the positive Sylvester solve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOL, HBAR, Tolerances
from .errors import PreconditionError

__all__ = [
    "EigenSystem",
    "as_matrix",
    "check_hermitian",
    "check_skew_hermitian",
    "dagger",
    "eig_hermitian",
    "hs_inner",
    "hs_norm",
    "matrix_exp",
    "metric_G",
    "polar_unitary",
    "random_density",
    "random_hermitian",
    "random_skew_hermitian",
    "random_unitary",
    "solve_sylvester_pos",
    "sqrtm_psd",
    "symplectic_Omega",
]


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a square, finite ``complex128`` array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise PreconditionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise PreconditionError(f"{name} has non-finite entries")
    return m


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise PreconditionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def hermiticity_defect(m: np.ndarray) -> float:
    scale = np.linalg.norm(m)
    return 0.0 if scale == 0 else float(np.linalg.norm(m - dagger(m)) / scale)


def check_hermitian(m, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m, name)
    if hermiticity_defect(m) > tol.hermiticity_tol:
        raise PreconditionError(f"{name} is not Hermitian (relative defect {hermiticity_defect(m):.3g})")
    return m


def check_skew_hermitian(m, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m, name)
    scale = np.linalg.norm(m)
    if scale and np.linalg.norm(m + dagger(m)) > tol.hermiticity_tol * scale:
        raise PreconditionError(f"{name} is not skew-Hermitian")
    return m


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt product Tr(A^dagger B)."""
    a = as_matrix(a, "A")
    b = as_matrix(b, "B")
    _same_dim(a, b)
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(a))


def metric_G(x, y, hbar: float = HBAR) -> float:
    """Riemannian metric hbar Tr(X^dagger Y + Y^dagger X)."""
    return 2.0 * hbar * hs_inner(x, y).real


def symplectic_Omega(x, y, hbar: float = HBAR) -> float:
    """Symplectic form -i hbar Tr(X^dagger Y - Y^dagger X)."""
    return 2.0 * hbar * hs_inner(x, y).imag


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues, unitary eigenvector columns, degeneracy clusters.

    ``clusters`` is a tuple of index tuples; indices within a cluster are
    contiguous because the values are sorted.
    """

    values: np.ndarray
    vectors: np.ndarray
    clusters: tuple

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def cluster_sizes(self) -> tuple:
        return tuple(len(c) for c in self.clusters)

    @property
    def cluster_of(self) -> np.ndarray:
        """Cluster label of every eigen-index."""
        lab = np.empty(self.dim, dtype=np.int64)
        for j, c in enumerate(self.clusters):
            lab[list(c)] = j
        return lab

    def projectors(self) -> list:
        """Orthogonal projections onto each eigenspace."""
        out = []
        for c in self.clusters:
            v = self.vectors[:, list(c)]
            out.append(v @ dagger(v))
        return out

    def matrix(self) -> np.ndarray:
        return (self.vectors * self.values) @ dagger(self.vectors)

    def inverse(self) -> np.ndarray:
        return (self.vectors / self.values) @ dagger(self.vectors)

    def min_gap(self) -> float:
        """Smallest gap between neighbouring clusters (inf for one cluster)."""
        if len(self.clusters) < 2:
            return float("inf")
        means = [float(np.mean(self.values[list(c)])) for c in self.clusters]
        return float(np.min(np.diff(means)))


def cluster_values(values: np.ndarray, degeneracy_tol: float) -> tuple:
    """Single-linkage clustering of sorted values by a gap threshold.

    The threshold scales with the spectral radius so that it is meaningful
    both for density matrices and for unnormalised operators.
    """
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    thresh = degeneracy_tol * scale
    clusters, current = [], [0]
    for k in range(1, len(values)):
        if values[k] - values[k - 1] > thresh:
            clusters.append(tuple(current))
            current = []
        current.append(k)
    clusters.append(tuple(current))
    return tuple(clusters)


def eig_hermitian(m, degeneracy_tol: float | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> EigenSystem:
    m = check_hermitian(m, tol)
    dtol = tol.degeneracy_tol if degeneracy_tol is None else degeneracy_tol
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return EigenSystem(values=w, vectors=v, clusters=cluster_values(w, dtol))


def matrix_exp(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Matrix exponential.

    Skew-Hermitian and Hermitian inputs go through an eigendecomposition so
    that unitarity (resp. Hermiticity) is exact to rounding.
    """
    m = as_matrix(m)
    scale = np.linalg.norm(m)
    if scale == 0:
        return np.eye(m.shape[0], dtype=np.complex128)
    if np.linalg.norm(m + dagger(m)) <= tol.hermiticity_tol * scale:
        h = 1j * m
        w, v = np.linalg.eigh((h + dagger(h)) / 2)
        return (v * np.exp(-1j * w)) @ dagger(v)
    if np.linalg.norm(m - dagger(m)) <= tol.hermiticity_tol * scale:
        w, v = np.linalg.eigh((m + dagger(m)) / 2)
        return (v * np.exp(w)) @ dagger(v)
    return scipy.linalg.expm(m)


def sylvester_in_eigenbasis(values: np.ndarray, vectors: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve G rho + rho G = rhs for rho = V diag(values) V^dagger (any stacking)."""
    t = dagger(vectors) @ rhs @ vectors
    t = t / (values[..., :, None] + values[..., None, :])
    return vectors @ t @ dagger(vectors)


def solve_sylvester_pos(rho, rhs, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian G with G rho + rho G = rhs, for positive-definite rho."""
    rho = check_hermitian(rho, tol, "rho")
    rhs = check_hermitian(rhs, tol, "rhs")
    _same_dim(rho, rhs)
    w, v = np.linalg.eigh((rho + dagger(rho)) / 2)
    if w[0] <= tol.pd_floor:
        raise PreconditionError(f"rho is not positive-definite (smallest eigenvalue {w[0]:.3g})")
    g = sylvester_in_eigenbasis(w, v, (rhs + dagger(rhs)) / 2)
    return (g + dagger(g)) / 2


def sqrtm_psd(m) -> np.ndarray:
    """Positive square root of a positive-semidefinite Hermitian matrix."""
    m = np.asarray(m, dtype=np.complex128)
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def polar_unitary(m) -> np.ndarray:
    """Unitary factor U of the polar decomposition m = U P."""
    u, _, vh = np.linalg.svd(np.asarray(m, dtype=np.complex128))
    return u @ vh


# random generators used by property checks and gauge sweeps

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + dagger(z)) / 2


def random_skew_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    return 1j * random_hermitian(n, rng)


def random_density(n: int, rng: np.random.Generator, min_eig: float = 0.01) -> np.ndarray:
    """Random invertible density matrix with eigenvalues >= min_eig."""
    p = rng.dirichlet(np.ones(n))
    p = min_eig + (1 - n * min_eig) * p
    u = random_unitary(n, rng)
    return (u * p) @ dagger(u)
