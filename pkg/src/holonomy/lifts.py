"""Horizontal lifts of density-operator curves for the three connections.

All lifts work on the stacked sample arrays of :mod:`holonomy.curves` and
return a :class:`LiftResult` whose ``psi`` array has one purification per
grid sample.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .bundle import Purification
from .config import DEFAULT_TOL, Tolerances
from .curves import DensityCurve, SpectralPath, TimeGrid, UnitaryCurve
from .errors import ConditioningWarning, ConvergenceError, PreconditionError
from .linalg_core import EigenSystem, dagger, eig_hermitian, sqrtm_psd

__all__ = [
    "LiftMethod",
    "LiftResult",
    "OrderedExpState",
    "horizontality_residual",
    "mechanical_lift",
    "open_lift_velocity_split",
    "open_system_lift",
    "ordered_exp_correction",
    "uhlmann_lift",
]


class LiftMethod(enum.Enum):
    Uhlmann = "uhlmann"
    Mechanical = "mechanical"
    OpenSystem = "open"


@dataclass(frozen=True)
class LiftResult:
    grid: TimeGrid
    psi: np.ndarray
    method: LiftMethod
    max_projection_residual: float
    max_horizontality_residual: float
    ref_spectrum: EigenSystem | None = None
    frames: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    basis: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return self.psi.shape[0]

    def purification(self, i: int, tol: Tolerances = DEFAULT_TOL) -> Purification:
        return Purification(self.psi[i], tol)

    @property
    def start(self) -> np.ndarray:
        return self.psi[0]

    @property
    def end(self) -> np.ndarray:
        return self.psi[-1]


@dataclass(frozen=True)
class OrderedExpState:
    """Accumulated exp_+ factor W at grid position ``index``."""

    W: np.ndarray
    index: int = 0

    @classmethod
    def identity(cls, n: int) -> "OrderedExpState":
        return cls(np.eye(n, dtype=np.complex128), 0)

    def advance(self, increment: np.ndarray) -> "OrderedExpState":
        """Compose exp(-increment) on the left (later times act last)."""
        step = _kernels.expm_hermitian_stack((1j * increment)[None], 1j)[0]
        return OrderedExpState(step @ self.W, self.index + 1)


def _projection_residual(psi: np.ndarray, rhos: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(psi @ dagger(psi) - rhos, axis=(1, 2))))


def _check_start(psi0, rho0: np.ndarray, tol: Tolerances) -> np.ndarray:
    m = psi0.mat if isinstance(psi0, Purification) else Purification(psi0, tol).mat
    if m.shape != rho0.shape:
        raise PreconditionError(f"dimension mismatch: purification {m.shape} vs state {rho0.shape}")
    gap = np.linalg.norm(m @ dagger(m) - rho0)
    if gap > tol.lift_proj_tol:
        raise PreconditionError(f"initial purification does not project onto rho(t0) (off by {gap:.3g})")
    return m


def _warn_if_ill_conditioned(spec: EigenSystem, tol: Tolerances) -> None:
    gap = spec.min_gap()
    if gap < tol.conditioning_gap:
        warnings.warn(
            f"smallest gap between eigenvalue clusters is {gap:.3g}; the connection is poorly conditioned",
            ConditioningWarning, stacklevel=3)


# --------------------------------------------------------------------------
# Uhlmann
# --------------------------------------------------------------------------

def uhlmann_lift(rho: DensityCurve, psi0=None, tol: Tolerances | None = None) -> LiftResult:
    """Integrate d psi/dt = G psi with G rho + rho G = d rho/dt.

    Each step uses the exponential midpoint rule, so psi_i^dagger psi_i+1 is
    Hermitian exactly. Whenever the drift off the fibre over rho(t_i+1)
    exceeds a tenth of ``lift_proj_tol`` the step is replaced by the unique
    point sqrt(rho) Q over rho(t_i+1) whose overlap with psi_i is positive
    Hermitian (Q the polar factor of sqrt(rho) psi_i). That point differs from
    the exact horizontal lift by O(dt^3) per step, so the order is unchanged.
    """
    tol = rho.tol if tol is None else tol
    rhos = rho.mats
    if psi0 is None:
        s = sqrtm_psd(rhos[0])
        psi0 = s / np.linalg.norm(s)
    p0 = _check_start(psi0, rhos[0], tol)
    psi, corrections, status = _kernels.uhlmann_propagate(
        rhos, p0, rho.grid.dt, tol.lift_proj_tol, tol.pd_floor)
    if status:
        t = rho.grid.samples[status - 1]
        raise PreconditionError(f"density curve is near-singular near t={t:.6g}")
    proj = _projection_residual(psi, rhos)
    if proj > tol.lift_proj_tol:
        raise ConvergenceError(f"Uhlmann lift drifted off the fibre by {proj:.3g}")
    res = _uhlmann_residual(psi, rho.grid.dt, "chord")
    return LiftResult(rho.grid, psi, LiftMethod.Uhlmann, proj, res,
                      diagnostics={"corrections": corrections})


def _uhlmann_residual(psi: np.ndarray, dt: float, scheme: str) -> float:
    if scheme == "chord":
        m = dagger(psi[:-1]) @ psi[1:]
        r = (dagger(m) - m) / dt
    elif scheme == "central":
        d = np.empty_like(psi)
        d[1:-1] = (psi[2:] - psi[:-2]) / (2 * dt)
        d[0] = (-3 * psi[0] + 4 * psi[1] - psi[2]) / (2 * dt)
        d[-1] = (3 * psi[-1] - 4 * psi[-2] + psi[-3]) / (2 * dt)
        m = dagger(d) @ psi
        r = m - dagger(m)
    else:
        raise ValueError(f"unknown derivative scheme {scheme!r}")
    return float(np.max(np.linalg.norm(r, axis=(1, 2))))


# --------------------------------------------------------------------------
# mechanical
# --------------------------------------------------------------------------

def _spectral_data(ref_spectrum: EigenSystem):
    return ref_spectrum.vectors, 1.0 / ref_spectrum.values, ref_spectrum.cluster_of


def ordered_exp_correction(psi, ref_spectrum: EigenSystem | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Stack of W(t_i) with dW/dt = -A(d psi/dt) W and W(t0) = I.

    ``psi`` is a stack of purifications on one level set. Each step factor is
    the inverse polar unitary of the eigenvalue-cluster blocks of
    psi_i^dagger psi_i+1, so it lies in the isotropy group by construction and
    the corrected overlaps phi_i^dagger phi_i+1 have Hermitian positive
    blocks. This agrees with exp(-A dt) up to O(dt^3) per step.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if ref_spectrum is None:
        ref_spectrum = eig_hermitian(dagger(psi[0]) @ psi[0], tol=tol)
    ref = ref_spectrum.matrix()
    drift = np.max(np.linalg.norm(dagger(psi) @ psi - ref, axis=(1, 2)))
    if drift > tol.level_tol:
        raise PreconditionError(f"curve leaves the level set of psi(t0)^dagger psi(t0) (drift {drift:.3g})")
    _warn_if_ill_conditioned(ref_spectrum, tol)
    starts = [c[0] for c in ref_spectrum.clusters]
    sizes = [len(c) for c in ref_spectrum.clusters]
    steps = _kernels.polar_connection_steps(psi, ref_spectrum.vectors, starts, sizes)
    w = _kernels.left_cumprod(steps)
    comm = np.max(np.linalg.norm(w @ ref - ref @ w, axis=(1, 2)))
    if comm > 1e-8:
        raise ConvergenceError(f"exp_+ factor left the isotropy group (commutator {comm:.3g})")
    return w


def mechanical_lift(U: UnitaryCurve, psi0, tol: Tolerances | None = None) -> LiftResult:
    """phi(t) = U(t) psi0 W(t), the horizontal lift through psi0 of U(t) rho0 U(t)^dagger."""
    tol = U.tol if tol is None else tol
    m0 = psi0.mat if isinstance(psi0, Purification) else Purification(psi0, tol).mat
    if m0.shape[0] != U.dim:
        raise PreconditionError(f"dimension mismatch: unitary {U.dim} vs purification {m0.shape[0]}")
    spec = eig_hermitian(dagger(m0) @ m0, tol=tol)
    psi = U.mats @ m0
    w = ordered_exp_correction(psi, spec, tol)
    phi = psi @ w
    rho0 = m0 @ dagger(m0)
    proj = _projection_residual(phi, U.mats @ rho0 @ dagger(U.mats))
    res = _mechanical_residual(phi, spec, U.grid.dt)
    level = float(np.max(np.linalg.norm(dagger(phi) @ phi - spec.matrix(), axis=(1, 2))))
    return LiftResult(U.grid, phi, LiftMethod.Mechanical, proj, res, ref_spectrum=spec,
                      diagnostics={"W": w, "level_drift": level})


def _mechanical_residual(phi: np.ndarray, spec: EigenSystem, dt: float) -> float:
    inc = _kernels.connection_increments(phi, *_spectral_data(spec))
    return float(np.max(np.linalg.norm(inc, axis=(1, 2)))) / dt


# --------------------------------------------------------------------------
# open system
# --------------------------------------------------------------------------

def _frame_generators(frames: np.ndarray, dt: float) -> np.ndarray:
    """Skew-Hermitian F^dagger dF/dt at every sample, from step logarithms."""
    logs = _kernels.unitary_logs(dagger(frames[:-1]) @ frames[1:]) / dt
    out = np.empty_like(frames)
    out[1:-1] = (logs[:-1] + logs[1:]) / 2
    out[0] = logs[0]
    out[-1] = logs[-1]
    if len(logs) > 1:
        out[0] = 1.5 * logs[0] - 0.5 * logs[1]
        out[-1] = 1.5 * logs[-1] - 0.5 * logs[-2]
    return out


def _cluster_labels(clusters: tuple, n: int) -> np.ndarray:
    lab = np.empty(n, dtype=np.int64)
    for j, c in enumerate(clusters):
        lab[list(c)] = j
    return lab


def _transport_frames(spec: SpectralPath) -> np.ndarray:
    """Re-phase / rotate tracked eigenframes so that <phi_k|d phi_l> = 0 within clusters."""
    f = spec.frames
    dt = spec.grid.dt
    out = np.array(f, copy=True)
    singles = [c[0] for c in spec.clusters if len(c) == 1]
    if singles and f.shape[0] >= 3:
        idx = np.array(singles)
        # <psi_k|psi_k'> by central differences; the two end samples use the
        # adjacent chord, which keeps the rule second order overall
        vel = np.empty_like(f[:, :, idx])
        cols = f[:, :, idx]
        vel[1:-1] = (cols[2:] - cols[:-2]) / (2 * dt)
        vel[0] = (cols[1] - cols[0]) / dt
        vel[-1] = (cols[-1] - cols[-2]) / dt
        conn = np.einsum("tik,tik->tk", np.conj(cols), vel)
        # theta_k(t) = i int <psi_k|d psi_k>, trapezoid rule
        theta = np.zeros((f.shape[0], len(idx)))
        integrand = -conn.imag
        theta[1:] = np.cumsum((integrand[1:] + integrand[:-1]) * dt / 2, axis=0)
        out[:, :, idx] = cols * np.exp(1j * theta)[:, None, :]
    multi = [c for c in spec.clusters if len(c) > 1]
    for c in multi:
        idx = np.array(c)
        cols = f[:, :, idx]
        m = dagger(cols[:-1]) @ cols[1:]
        a_dt = (m - dagger(m)) / 2
        steps = _kernels.expm_hermitian_stack(1j * a_dt, 1j)
        x = _kernels.left_cumprod(steps)
        out[:, :, idx] = cols @ x
    return out


def open_system_lift(spec: SpectralPath, basis=None, rho: DensityCurve | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> LiftResult:
    """psi(t) = sum_k sqrt(p_k(t)) |phi_k(t)><k| with parallel-transported frames."""
    n = spec.dim
    b = np.eye(n, dtype=np.complex128) if basis is None else np.asarray(basis, dtype=np.complex128)
    if b.shape != (n, n) or np.linalg.norm(dagger(b) @ b - np.eye(n)) > tol.orthonormality_tol:
        raise PreconditionError("label basis must be an orthonormal set of n kets")
    phi = _transport_frames(spec)
    sq = np.sqrt(np.clip(spec.eigenvalues, 0.0, None))
    psi = (phi * sq[:, None, :]) @ dagger(b)
    target = spec.reconstruct() if rho is None else rho.mats
    proj = _projection_residual(psi, target)
    res = _open_residual(phi, spec, spec.grid.dt)
    return LiftResult(spec.grid, psi, LiftMethod.OpenSystem, proj, res,
                      frames=phi, eigenvalues=np.asarray(spec.eigenvalues), basis=b,
                      diagnostics={"clusters": spec.clusters})


def _open_residual(phi: np.ndarray, spec_or_clusters, dt: float, scheme: str = "chord") -> float:
    """Largest |<phi_k|phi_l'>| over same-cluster pairs.

    ``chord`` takes the skew part of <phi_k(t_i)|phi_l(t_i+1)> / dt, the
    discrete analogue used for the other two lifts; ``central`` uses the
    averaged step logarithms at every sample.
    """
    if phi.shape[0] < 2:
        return 0.0
    clusters = getattr(spec_or_clusters, "clusters", spec_or_clusters)
    lab = _cluster_labels(clusters, phi.shape[1])
    mask = lab[:, None] == lab[None, :]
    if scheme == "chord":
        m = dagger(phi[:-1]) @ phi[1:]
        gen = (m - dagger(m)) / (2 * dt)
    elif scheme == "central":
        gen = _frame_generators(phi, dt)
    else:
        raise ValueError(f"unknown derivative scheme {scheme!r}")
    return float(np.max(np.abs(gen[:, mask])))


def open_lift_velocity_split(lift: LiftResult) -> tuple:
    """The two partial velocities of Psi(u, v) = sum_k sqrt(p_k(v)) |phi_k(u)><k| on the diagonal.

    Returns stacks (d_u, d_v) with d_u + d_v equal to the lift velocity.
    """
    if lift.method is not LiftMethod.OpenSystem:
        raise PreconditionError("velocity split is defined for open-system lifts only")
    dt = lift.grid.dt
    phi, p, b = lift.frames, lift.eigenvalues, lift.basis
    sq = np.sqrt(p)
    gen = _frame_generators(phi, dt)
    dphi = phi @ gen
    d_u = (dphi * sq[:, None, :]) @ dagger(b)
    dsq = np.empty_like(sq)
    dsq[1:-1] = (sq[2:] - sq[:-2]) / (2 * dt)
    dsq[0] = (-3 * sq[0] + 4 * sq[1] - sq[2]) / (2 * dt)
    dsq[-1] = (3 * sq[-1] - 4 * sq[-2] + sq[-3]) / (2 * dt)
    d_v = (phi * dsq[:, None, :]) @ dagger(b)
    return d_u, d_v


# --------------------------------------------------------------------------
# residual dispatch
# --------------------------------------------------------------------------

def horizontality_residual(lift: LiftResult, rho: DensityCurve | None = None,
                           scheme: str = "chord") -> float:
    """Largest method-appropriate horizontality defect along the lift.

    Uhlmann: ||psi'^dagger psi - psi^dagger psi'||_F. Mechanical: ||A(psi')||_F.
    Open system: largest |<phi_k|phi_l'>| over pairs in one eigenvalue cluster.
    """
    if rho is not None:
        if rho.grid != lift.grid:
            raise PreconditionError("lift and curve are sampled on different grids")
        if rho.dim != lift.psi.shape[1]:
            raise PreconditionError("lift and curve have different dimensions")
    dt = lift.grid.dt
    if lift.method is LiftMethod.Uhlmann:
        return _uhlmann_residual(lift.psi, dt, scheme)
    if lift.method is LiftMethod.Mechanical:
        spec = lift.ref_spectrum
        if spec is None:
            spec = eig_hermitian(dagger(lift.psi[0]) @ lift.psi[0])
        return _mechanical_residual(lift.psi, spec, dt)
    if lift.frames is None:
        raise PreconditionError("open-system lift carries no frames")
    return _open_residual(lift.frames, lift.diagnostics["clusters"], dt, scheme)


def residual_of_unlifted(U: UnitaryCurve, psi0, tol: Tolerances = DEFAULT_TOL) -> float:
    """||A(psi')|| for the bare curve U(t) psi0, before any exp_+ correction."""
    m0 = psi0.mat if isinstance(psi0, Purification) else np.asarray(psi0, dtype=np.complex128)
    spec = eig_hermitian(dagger(m0) @ m0, tol=tol)
    return _mechanical_residual(U.mats @ m0, spec, U.grid.dt)
