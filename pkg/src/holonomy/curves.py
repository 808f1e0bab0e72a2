"""Uniformly sampled evolution curves and smooth spectral tracking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .bundle import DensityOperator
from .config import DEFAULT_TOL, HBAR, Tolerances
from .errors import CrossingError, PreconditionError
from .linalg_core import check_hermitian, cluster_values, dagger

__all__ = [
    "DensityCurve",
    "SampledCurve",
    "SpectralPath",
    "TimeGrid",
    "UnitaryCurve",
    "bloch_curve",
    "bloch_density",
    "conjugate_evolution",
    "derivative",
    "derivatives",
    "evolve_unitary",
    "parallel_transport_driving",
    "step_generators",
    "track_spectrum",
]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.t0) and np.isfinite(self.t1)) or self.t1 <= self.t0:
            raise PreconditionError(f"time grid needs t1 > t0, got [{self.t0}, {self.t1}]")
        if int(self.steps) != self.steps or self.steps < 1:
            raise PreconditionError(f"time grid needs a positive integer step count, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.steps

    @property
    def samples(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        s = self.samples
        return (s[:-1] + s[1:]) / 2

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t0, self.t1, self.steps * factor)


@dataclass(frozen=True)
class SampledCurve:
    """A curve of n x n matrices, one per grid sample, stored as one array."""

    grid: TimeGrid
    mats: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.mats, dtype=np.complex128)
        if m.ndim != 3 or m.shape[0] != self.grid.steps + 1 or m.shape[1] != m.shape[2]:
            raise PreconditionError(
                f"curve needs {self.grid.steps + 1} square samples, got array of shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise PreconditionError("curve has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "mats", m)

    @property
    def dim(self) -> int:
        return self.mats.shape[1]

    def __len__(self) -> int:
        return self.mats.shape[0]


@dataclass(frozen=True)
class UnitaryCurve(SampledCurve):
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        super().__post_init__()
        m = self.mats
        eye = np.eye(self.dim)
        defect = np.max(np.linalg.norm(dagger(m) @ m - eye, axis=(1, 2)))
        if defect > self.tol.orthonormality_tol:
            raise PreconditionError(f"unitary curve sample off the unitary group by {defect:.3g}")
        if np.linalg.norm(m[0] - eye) > self.tol.orthonormality_tol:
            raise PreconditionError("unitary curve must start at the identity")

    def reversed(self) -> "UnitaryCurve":
        """The evolution run backwards: U'(t) = U(tau - t) U(tau)^dagger."""
        m = self.mats[::-1] @ dagger(self.mats[-1])
        return UnitaryCurve(self.grid, m, self.tol)


@dataclass(frozen=True)
class DensityCurve(SampledCurve):
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        super().__post_init__()
        m = self.mats
        t = self.grid.samples
        scale = np.linalg.norm(m, axis=(1, 2))
        herm = np.linalg.norm(m - dagger(m), axis=(1, 2))
        bad = np.nonzero(herm > self.tol.hermiticity_tol * scale)[0]
        if bad.size:
            raise PreconditionError(f"density curve sample at t={t[bad[0]]:.6g} is not Hermitian")
        tr = np.trace(m, axis1=1, axis2=2)
        bad = np.nonzero(np.abs(tr - 1) > self.tol.trace_tol)[0]
        if bad.size:
            raise PreconditionError(f"density curve sample at t={t[bad[0]]:.6g} has trace {tr[bad[0]].real:.17g}")
        w = np.linalg.eigvalsh((m + dagger(m)) / 2)
        bad = np.nonzero(w[:, 0] < self.tol.pd_floor)[0]
        if bad.size:
            raise PreconditionError(f"density curve sample at t={t[bad[0]]:.6g} is not invertible")
        if len(m) > 1:
            jump = np.linalg.norm(np.diff(m, axis=0), axis=(1, 2))
            bad = np.nonzero(jump > self.tol.continuity_bound * self.grid.dt)[0]
            if bad.size:
                raise PreconditionError(
                    f"density curve jumps by {jump[bad[0]]:.3g} between t={t[bad[0]]:.6g} and the next sample")

    def sample(self, i: int) -> DensityOperator:
        return DensityOperator(self.mats[i], self.tol)

    def reversed(self) -> "DensityCurve":
        return DensityCurve(self.grid, self.mats[::-1], self.tol)


@dataclass(frozen=True)
class SpectralPath:
    """Eigenvalues p_k(t) and continuous eigenframes |psi_k(t)> of a density curve.

    Frames are gauge fixed so that <psi_k(t_i)|psi_k(t_i+1)> > 0 and, within
    each degenerate cluster, the block of overlaps is Hermitian positive.
    """

    grid: TimeGrid
    eigenvalues: np.ndarray
    frames: np.ndarray
    clusters: tuple
    cluster_history: tuple

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def reconstruct(self) -> np.ndarray:
        f = self.frames
        return (f * self.eigenvalues[:, None, :]) @ dagger(f)


def derivative(curve, i: int) -> np.ndarray:
    """Second-order finite-difference velocity of a sampled curve at sample ``i``."""
    mats = curve.mats
    N = mats.shape[0]
    if N < 3:
        raise PreconditionError("derivative needs at least three samples")
    if not 0 <= i < N:
        raise PreconditionError(f"sample index {i} outside 0..{N - 1}")
    dt = curve.grid.dt
    if i == 0:
        return (-3 * mats[0] + 4 * mats[1] - mats[2]) / (2 * dt)
    if i == N - 1:
        return (3 * mats[-1] - 4 * mats[-2] + mats[-3]) / (2 * dt)
    return (mats[i + 1] - mats[i - 1]) / (2 * dt)


def derivatives(curve) -> np.ndarray:
    """``derivative`` at every sample, vectorised."""
    mats = curve.mats
    if mats.shape[0] < 3:
        raise PreconditionError("derivative needs at least three samples")
    dt = curve.grid.dt
    out = np.empty_like(mats)
    out[1:-1] = (mats[2:] - mats[:-2]) / (2 * dt)
    out[0] = (-3 * mats[0] + 4 * mats[1] - mats[2]) / (2 * dt)
    out[-1] = (3 * mats[-1] - 4 * mats[-2] + mats[-3]) / (2 * dt)
    return out


def _stack_hamiltonians(H_of_t: Callable, times: np.ndarray, tol: Tolerances) -> np.ndarray:
    return np.stack([check_hermitian(H_of_t(float(t)), tol, "Hamiltonian") for t in times])


def evolve_unitary(H_of_t: Callable, grid: TimeGrid, hbar: float = HBAR,
                   tol: Tolerances = DEFAULT_TOL) -> UnitaryCurve:
    """Propagator of dU/dt = -(i/hbar) H(t) U by the exponential midpoint rule."""
    hs = _stack_hamiltonians(H_of_t, grid.midpoints, tol)
    steps = _kernels.expm_hermitian_stack(hs, -1j * grid.dt / hbar)
    return UnitaryCurve(grid, _kernels.left_cumprod(steps), tol)


def conjugate_evolution(u: UnitaryCurve, rho0: DensityOperator) -> DensityCurve:
    if rho0.dim != u.dim:
        raise PreconditionError(f"dimension mismatch: unitary {u.dim} vs state {rho0.dim}")
    m = u.mats @ rho0.mat @ dagger(u.mats)
    return DensityCurve(u.grid, (m + dagger(m)) / 2, rho0.tol)


def bloch_density(x, y, z) -> np.ndarray:
    """1/2 (I + x sx + y sy + z sz), broadcasting over array inputs."""
    x, y, z = (np.asarray(c, dtype=float)[..., None, None] for c in (x, y, z))
    eye = np.eye(2, dtype=np.complex128)
    return 0.5 * (eye + x * PAULI[0] + y * PAULI[1] + z * PAULI[2])


def _sample_function(f, t: np.ndarray) -> np.ndarray:
    if np.isscalar(f):
        return np.full_like(t, float(f))
    try:
        v = np.asarray(f(t), dtype=float)
        if v.shape == t.shape:
            return v
        if v.ndim == 0:
            return np.full_like(t, float(v))
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(s))) for s in t])


def bloch_curve(x, y, z, grid: TimeGrid, tol: Tolerances = DEFAULT_TOL) -> DensityCurve:
    t = grid.samples
    bx, by, bz = (_sample_function(f, t) for f in (x, y, z))
    r = np.sqrt(bx ** 2 + by ** 2 + bz ** 2)
    bad = np.nonzero(r >= 1 - tol.pd_margin)[0]
    if bad.size:
        raise PreconditionError(f"Bloch vector leaves the open ball at t={t[bad[0]]:.6g} (r={r[bad[0]]:.6g})")
    return DensityCurve(grid, bloch_density(bx, by, bz), tol)


def _split_pattern(w: np.ndarray, degeneracy_tol: float) -> np.ndarray:
    scale = np.maximum(np.max(np.abs(w), axis=-1, keepdims=True), np.finfo(float).tiny)
    return np.diff(w, axis=-1) > degeneracy_tol * scale


def _cluster_bounds(clusters: tuple) -> tuple:
    starts = np.array([c[0] for c in clusters], dtype=np.int64)
    sizes = np.array([len(c) for c in clusters], dtype=np.int64)
    return starts, sizes


def track_spectrum(rho: DensityCurve, tol: Tolerances | None = None) -> SpectralPath:
    """Eigendecompose every sample and make the eigenframes continuous.

    Raises ``CrossingError`` if the degeneracy pattern changes or the
    overlap-maximising assignment of eigenvectors between consecutive
    samples is not the identity, i.e. eigenvalues cross.
    """
    tol = rho.tol if tol is None else tol
    m = rho.mats
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    t = rho.grid.samples
    clusters = cluster_values(w[0], tol.degeneracy_tol)
    pattern = _split_pattern(w, tol.degeneracy_tol)
    bad = np.nonzero(np.any(pattern != pattern[0], axis=-1))[0]
    if bad.size:
        raise CrossingError("eigenvalue cluster structure changes along the curve", float(t[bad[0]]))
    starts, sizes = _cluster_bounds(clusters)
    if len(clusters) > 1:
        ov = np.abs(dagger(v[:-1]) @ v[1:]) ** 2
        c = len(clusters)
        lab = np.repeat(np.arange(c), sizes)
        weight = np.zeros((ov.shape[0], c, c))
        for a in range(c):
            for b in range(c):
                weight[:, a, b] = ov[:, lab == a][:, :, lab == b].sum(axis=(1, 2))
        diag = np.einsum("kaa->ka", weight)
        suspicious = np.nonzero(np.any(diag < weight.max(axis=2) - 1e-12, axis=1)
                                | np.any(diag < 0.5 * sizes[None, :], axis=1))[0]
        for i in suspicious:
            _, cols = linear_sum_assignment(-weight[i])
            if np.any(cols != np.arange(c)):
                raise CrossingError("eigenvalues cross between consecutive samples", float(t[i + 1]))
    frames = _kernels.align_frames(v, starts, sizes)
    frames.setflags(write=False)
    w.setflags(write=False)
    return SpectralPath(rho.grid, w, frames, clusters, (clusters,) * len(t))


def step_generators(u: SampledCurve) -> np.ndarray:
    """Body-frame generators log(U_i^dagger U_i+1) / dt, one per step."""
    m = u.mats
    return _kernels.unitary_logs(dagger(m[:-1]) @ m[1:]) / u.grid.dt


def _offblock(b: np.ndarray, lab: np.ndarray) -> np.ndarray:
    return np.where(lab[:, None] == lab[None, :], 0.0, b)


def parallel_transport_driving(H_of_t: Callable, rho0: DensityOperator, grid: TimeGrid,
                               hbar: float = HBAR, tol: Tolerances = DEFAULT_TOL) -> UnitaryCurve:
    """Unitary that moves rho0 like H(t) does, minus all dynamical phases.

    In the eigenbasis of rho0 the body-frame generator U^dagger dU/dt is the
    generator of H with its same-eigenvalue blocks removed, so
    <psi_k(t)|d/dt psi_l(t)> = 0 whenever p_k = p_l. The removed part commutes
    with rho(t), hence rho(t) is the same curve H(t) produces.
    """
    w, e = np.linalg.eigh(rho0.mat)
    clu = cluster_values(w, tol.degeneracy_tol)
    lab = np.empty(len(w), dtype=np.int64)
    for j, c in enumerate(clu):
        lab[list(c)] = j
    dt = grid.dt

    def body(t, u):
        g = -1j * _stack_hamiltonians(H_of_t, [t], tol)[0] / hbar
        b = dagger(e) @ dagger(u) @ g @ u @ e
        return e @ _offblock(b, lab) @ dagger(e)

    def expm_skew(a):
        return _kernels.expm_hermitian_stack((1j * a)[None], -1j)[0]

    mats = np.empty((grid.steps + 1, len(w), len(w)), dtype=np.complex128)
    cur = np.eye(len(w), dtype=np.complex128)
    mats[0] = cur
    for i, t in enumerate(grid.samples[:-1]):
        half = cur @ expm_skew(body(t, cur) * dt / 2)
        cur = cur @ expm_skew(body(t + dt / 2, half) * dt)
        mats[i + 1] = cur
    return UnitaryCurve(grid, mats, tol)
