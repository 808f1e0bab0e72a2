"""Geometry of the standard purification bundle psi -> psi psi^dagger.

The momentum map of the right unitary action is stored as the Hermitian
matrix psi^dagger psi. Real subspaces of the tangent space are handled by
realification: an n x n complex matrix becomes a vector in R^(2 n^2), and
the metric G becomes 2 hbar times the Euclidean product.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, HBAR, Tolerances
from .errors import PreconditionError
from .linalg_core import (
    EigenSystem,
    as_matrix,
    check_hermitian,
    dagger,
    eig_hermitian,
    solve_sylvester_pos,
    sqrtm_psd,
)

__all__ = [
    "DensityOperator",
    "MomentumValue",
    "Purification",
    "Subspace",
    "TangentVector",
    "expected_dimension",
    "kernel_dJ_project",
    "mech_connection",
    "momentum",
    "project",
    "realify",
    "subspace_basis",
    "uhlmann_vertical_project",
    "unrealify",
]


@dataclass(frozen=True)
class DensityOperator:
    mat: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = check_hermitian(self.mat, self.tol, "density operator")
        tr = np.trace(m)
        if abs(tr - 1) > self.tol.trace_tol:
            raise PreconditionError(f"density operator trace is {tr.real:.17g}, expected 1")
        w = np.linalg.eigvalsh((m + dagger(m)) / 2)
        if w[0] < self.tol.pd_floor:
            raise PreconditionError(
                f"density operator is not invertible (smallest eigenvalue {w[0]:.3g})")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class Purification:
    mat: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = as_matrix(self.mat, "purification")
        nrm = np.linalg.norm(m)
        if abs(nrm - 1) > self.tol.norm_tol:
            raise PreconditionError(f"purification has HS norm {nrm:.17g}, expected 1")
        smin = np.linalg.svd(m, compute_uv=False)[-1]
        if smin < self.tol.sv_floor:
            raise PreconditionError(f"purification is not invertible (smallest singular value {smin:.3g})")
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_density(cls, rho, tol: Tolerances = DEFAULT_TOL) -> "Purification":
        """The positive square root, the canonical purification."""
        r = rho.mat if isinstance(rho, DensityOperator) else check_hermitian(rho, tol)
        s = sqrtm_psd(r)
        return cls(s / np.linalg.norm(s), tol)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def right(self, u) -> "Purification":
        """The right action psi -> psi U."""
        return Purification(self.mat @ u, self.tol)

    def left(self, u) -> "Purification":
        return Purification(u @ self.mat, self.tol)


@dataclass(frozen=True)
class TangentVector:
    base: Purification
    dir: np.ndarray

    def __post_init__(self):
        d = as_matrix(self.dir, "tangent direction")
        if d.shape != self.base.mat.shape:
            raise PreconditionError(f"dimension mismatch: {d.shape} vs {self.base.mat.shape}")
        scale = max(np.linalg.norm(d), 1.0)
        if abs(np.vdot(self.base.mat, d).real) > self.base.tol.tangency_tol * scale:
            raise PreconditionError("direction is not tangent to the unit sphere at the base point")
        object.__setattr__(self, "dir", d)

    def with_dir(self, d) -> "TangentVector":
        return TangentVector(self.base, d)


@dataclass(frozen=True)
class MomentumValue:
    """Hermitian representative psi^dagger psi of the momentum J(psi)."""

    mat: np.ndarray

    def pairing(self, xi, hbar: float = HBAR) -> float:
        """J(psi) xi = i hbar Tr(psi^dagger psi xi) for skew-Hermitian xi."""
        return float((1j * hbar * np.trace(self.mat @ xi)).real)


def project(psi: Purification, tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    m = psi.mat @ dagger(psi.mat)
    return DensityOperator((m + dagger(m)) / 2, tol)


def momentum(psi: Purification) -> MomentumValue:
    m = dagger(psi.mat) @ psi.mat
    return MomentumValue((m + dagger(m)) / 2)


def uhlmann_vertical_project(x: TangentVector, tol: Tolerances = DEFAULT_TOL) -> TangentVector:
    """G-orthogonal projection onto {psi xi : xi skew-Hermitian}.

    The optimal xi solves rho~ xi + xi rho~ = psi^dagger X - X^dagger psi with
    rho~ = psi^dagger psi; the residual is then Uhlmann-horizontal.
    """
    psi = x.base.mat
    rt = dagger(psi) @ psi
    rhs = 1j * (dagger(psi) @ x.dir - dagger(x.dir) @ psi)
    h = solve_sylvester_pos((rt + dagger(rt)) / 2, (rhs + dagger(rhs)) / 2, tol)
    xi = -1j * h
    return x.with_dir(psi @ xi)


def kernel_dJ_project(x: TangentVector, tol: Tolerances = DEFAULT_TOL) -> TangentVector:
    """G-orthogonal projection onto Ker dJ = {X : X^dagger psi + psi^dagger X = 0}.

    The orthogonal complement of the kernel is {psi H : H Hermitian}; H solves
    rho~ H + H rho~ = psi^dagger X + X^dagger psi.
    """
    psi = x.base.mat
    rt = dagger(psi) @ psi
    rhs = dagger(psi) @ x.dir + dagger(x.dir) @ psi
    h = solve_sylvester_pos((rt + dagger(rt)) / 2, (rhs + dagger(rhs)) / 2, tol)
    return x.with_dir(x.dir - psi @ h)


def mech_connection(phi: Purification, x: TangentVector, ref_spectrum: EigenSystem,
                    tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Mechanical connection form sum_j P_j phi^dagger X P_j (psi^dagger psi)^-1.

    ``ref_spectrum`` is the eigensystem of psi^dagger psi for the level set
    that contains ``phi``.
    """
    ref = ref_spectrum.matrix()
    f = phi.mat
    if np.linalg.norm(dagger(f) @ f - ref) > tol.level_tol:
        raise PreconditionError("phi is not on the level set of the reference spectrum")
    d = x.dir
    if d.shape != f.shape:
        raise PreconditionError(f"dimension mismatch: {d.shape} vs {f.shape}")
    scale = max(np.linalg.norm(d), 1.0)
    if np.linalg.norm(dagger(d) @ f + dagger(f) @ d) > tol.tangency_tol * scale:
        raise PreconditionError("X is not tangent to the level set")
    v = ref_spectrum.vectors
    t = dagger(v) @ (dagger(f) @ d) @ v
    lab = ref_spectrum.cluster_of
    t = np.where(lab[:, None] == lab[None, :], t, 0.0) / ref_spectrum.values[None, :]
    a = v @ t @ dagger(v)
    return (a - dagger(a)) / 2


# --------------------------------------------------------------------------
# subspaces of T_psi S(H)
# --------------------------------------------------------------------------

class Subspace(enum.Enum):
    UhlmannVertical = "uhlmann_vertical"
    UhlmannHorizontal = "uhlmann_horizontal"
    TangentS_psi = "tangent_level_set"
    MechHorizontal = "mech_horizontal"
    K_perp = "k_perp"
    L = "l"
    TangentSphere = "tangent_sphere"
    TangentQ = "tangent_q"


def realify(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def unrealify(v: np.ndarray, n: int) -> np.ndarray:
    return (v[: n * n] + 1j * v[n * n:]).reshape(n, n)


def hermitian_basis(n: int) -> list:
    """Orthonormal (HS) real basis of the Hermitian n x n matrices."""
    out = []
    for k in range(n):
        e = np.zeros((n, n), complex)
        e[k, k] = 1
        out.append(e)
    for k in range(n):
        for l in range(k + 1, n):
            e = np.zeros((n, n), complex)
            e[k, l] = e[l, k] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((n, n), complex)
            e[k, l] = -1j / np.sqrt(2)
            e[l, k] = 1j / np.sqrt(2)
            out.append(e)
    return out


def isotropy_algebra_basis(spec: EigenSystem) -> list:
    """Basis of u(psi): skew-Hermitian matrices commuting with psi^dagger psi."""
    out = []
    v = spec.vectors
    for c in spec.clusters:
        for h in hermitian_basis(len(c)):
            blk = np.zeros((spec.dim, spec.dim), complex)
            idx = np.array(c)
            blk[np.ix_(idx, idx)] = 1j * h
            out.append(v @ blk @ dagger(v))
    return out


def _orthonormal_columns(vectors: list, rank_tol: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the span; singular values below rank_tol * scale count as zero.

    ``scale`` defaults to the largest singular value.
    """
    if not vectors:
        return np.zeros((0, 0))
    a = np.column_stack(vectors)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if s.size == 0 or ref == 0:
        return np.zeros((a.shape[0], 0))
    r = int(np.sum(s > rank_tol * ref))
    return u[:, :r]


def _complement(qa: np.ndarray, qb: np.ndarray, rank_tol: float) -> np.ndarray:
    """Orthonormal basis of span(qa) minus its projection on span(qb)."""
    r = qa - qb @ (qb.T @ qa) if qb.size else qa
    # qa has orthonormal columns, so the residual is measured on an absolute scale
    return _orthonormal_columns(list(r.T), rank_tol, scale=1.0) if r.size else r


def level_q(spec: EigenSystem) -> int:
    return int(sum(m * m for m in spec.cluster_sizes))


def expected_dimension(which: Subspace, n: int, q: int) -> int:
    return {
        Subspace.UhlmannVertical: n * n,
        Subspace.UhlmannHorizontal: n * n - 1,
        Subspace.TangentS_psi: n * n,
        Subspace.MechHorizontal: n * n - q,
        Subspace.K_perp: q - 1,
        Subspace.L: n * n - 1,
        Subspace.TangentSphere: 2 * n * n - 1,
        Subspace.TangentQ: 2 * n * n - q,
    }[which]


def _raw_bases(psi: np.ndarray, spec: EigenSystem, rank_tol: float) -> dict:
    n = psi.shape[0]
    herm = hermitian_basis(n)
    unit = realify(psi) / np.linalg.norm(psi)

    def sphere_tangent(vs):
        return [v - unit * (unit @ v) for v in vs]

    std = []
    for k in range(2 * n * n):
        e = np.zeros(2 * n * n)
        e[k] = 1
        std.append(e)
    b = {}
    b[Subspace.TangentSphere] = _orthonormal_columns(sphere_tangent(std), rank_tol)
    b[Subspace.UhlmannVertical] = _orthonormal_columns([realify(psi @ (1j * h)) for h in herm], rank_tol)
    b[Subspace.UhlmannHorizontal] = _orthonormal_columns(
        sphere_tangent([realify(h @ psi) for h in herm]), rank_tol)
    b[Subspace.TangentS_psi] = _orthonormal_columns([realify((1j * h) @ psi) for h in herm], rank_tol)
    vert_level = _orthonormal_columns([realify(psi @ eta) for eta in isotropy_algebra_basis(spec)], rank_tol)
    b[Subspace.MechHorizontal] = _complement(b[Subspace.TangentS_psi], vert_level, rank_tol)
    b[Subspace.TangentQ] = _orthonormal_columns(
        list(b[Subspace.UhlmannVertical].T) + list(b[Subspace.TangentS_psi].T), rank_tol)
    b[Subspace.K_perp] = _complement(b[Subspace.TangentSphere], b[Subspace.TangentQ], rank_tol)
    b[Subspace.L] = _orthonormal_columns(
        list(b[Subspace.MechHorizontal].T) + list(b[Subspace.K_perp].T), rank_tol)
    return b


def subspace_basis(psi: Purification, which: Subspace, spectrum: EigenSystem | None = None,
                   hbar: float = HBAR, tol: Tolerances = DEFAULT_TOL) -> list:
    """G-orthonormal basis of a real subspace of T_psi S(H).

    Raises ``PreconditionError`` when the numerical rank disagrees with the
    dimension count n^2, n^2 - q, q - 1, ... implied by the clusters of
    psi^dagger psi.
    """
    m = psi.mat
    n = m.shape[0]
    spec = spectrum if spectrum is not None else eig_hermitian(dagger(m) @ m, tol=tol)
    cols = _raw_bases(m, spec, tol.rank_tol)[which]
    want = expected_dimension(which, n, level_q(spec))
    got = cols.shape[1] if cols.ndim == 2 else 0
    if got != want:
        raise PreconditionError(
            f"{which.name}: numerical rank {got} differs from expected dimension {want}; "
            "degeneracy clusters are inconsistent")
    scale = 1.0 / np.sqrt(2.0 * hbar)
    return [unrealify(c, n) * scale for c in cols.T]


def subspace_rank(psi: Purification, which: Subspace, spectrum: EigenSystem | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> int:
    """Numerical rank of the generating set, without the dimension check."""
    m = psi.mat
    spec = spectrum if spectrum is not None else eig_hermitian(dagger(m) @ m, tol=tol)
    cols = _raw_bases(m, spec, tol.rank_tol)[which]
    return cols.shape[1] if cols.ndim == 2 else 0
