"""Geometric phases from lifts: Uhlmann, interferometric and open-system."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bundle import DensityOperator, Purification
from .config import DEFAULT_TOL, Tolerances
from .curves import DensityCurve, UnitaryCurve, step_generators, track_spectrum
from .errors import PreconditionError
from .lifts import LiftResult, mechanical_lift, open_system_lift, uhlmann_lift
from .linalg_core import cluster_values, dagger, random_unitary, sqrtm_psd

__all__ = [
    "PhaseMethod",
    "PhaseResult",
    "circular_distance",
    "interferometric_phase_general",
    "interferometric_phase_parallel",
    "open_system_phase",
    "parallel_transport_residual",
    "phase_gauge_check",
    "principal_arg",
    "uhlmann_phase",
]


class PhaseMethod(enum.Enum):
    Uhlmann = "uhlmann"
    InterferometricParallel = "interferometric_parallel"
    Interferometric = "interferometric"
    OpenSystem = "open"


def principal_arg(z: complex) -> float:
    """arg z in (-pi, pi]."""
    a = float(np.angle(z))
    return np.pi if a == -np.pi else a


def circular_distance(a: float, b: float) -> float:
    return abs(principal_arg(np.exp(1j * (a - b))))


@dataclass(frozen=True)
class PhaseResult:
    trace_value: complex
    method: PhaseMethod
    steps: int
    max_residual: float = 0.0
    lift: LiftResult | None = field(default=None, repr=False, compare=False)
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def phase(self) -> float:
        return principal_arg(self.trace_value)

    @property
    def phase_2pi(self) -> float:
        """The phase lifted to [0, 2 pi)."""
        v = float(np.mod(self.phase, 2 * np.pi))
        return 0.0 if v >= 2 * np.pi else v  # -tiny mod 2 pi rounds up to 2 pi

    @property
    def visibility(self) -> float:
        return float(abs(self.trace_value))


def _default_purification(rho0: np.ndarray) -> np.ndarray:
    s = sqrtm_psd(rho0)
    return s / np.linalg.norm(s)


def uhlmann_phase(rho: DensityCurve, psi0=None, tol: Tolerances | None = None) -> PhaseResult:
    """arg Tr(psi(0)^dagger psi(tau)) along the Uhlmann-horizontal lift."""
    lift = uhlmann_lift(rho, psi0, tol)
    tr = complex(np.vdot(lift.start, lift.end))
    return PhaseResult(tr, PhaseMethod.Uhlmann, rho.grid.steps,
                       max(lift.max_projection_residual, lift.max_horizontality_residual), lift,
                       diagnostics={"corrections": lift.diagnostics["corrections"]})


def parallel_transport_residual(U: UnitaryCurve, rho0: DensityOperator,
                                tol: Tolerances | None = None) -> float:
    """Largest |<psi_k(t)|d/dt psi_l(t)>| over eigenvector pairs with equal eigenvalue."""
    tol = rho0.tol if tol is None else tol
    w, v = np.linalg.eigh(rho0.mat)
    lab = np.empty(len(w), dtype=np.int64)
    for j, c in enumerate(cluster_values(w, tol.degeneracy_tol)):
        lab[list(c)] = j
    gen = dagger(v) @ step_generators(U) @ v
    return float(np.max(np.abs(gen[:, lab[:, None] == lab[None, :]])))


def interferometric_phase_parallel(U: UnitaryCurve, rho0: DensityOperator,
                                   tol: Tolerances | None = None) -> PhaseResult:
    """arg Tr(U(tau) rho0) for a parallel-transporting U."""
    tol = rho0.tol if tol is None else tol
    if rho0.dim != U.dim:
        raise PreconditionError(f"dimension mismatch: unitary {U.dim} vs state {rho0.dim}")
    res = parallel_transport_residual(U, rho0, tol)
    if res > tol.parallel_tol:
        raise PreconditionError(
            f"U does not parallel transport rho0 (residual {res:.3g} > {tol.parallel_tol:g}); "
            "use interferometric_phase_general")
    tr = complex(np.trace(U.mats[-1] @ rho0.mat))
    return PhaseResult(tr, PhaseMethod.InterferometricParallel, U.grid.steps, res,
                       diagnostics={"parallel_residual": res})


def interferometric_phase_general(U: UnitaryCurve, rho0: DensityOperator, psi0=None,
                                  tol: Tolerances | None = None) -> PhaseResult:
    """arg Tr(psi^dagger U(tau) psi W(tau)) with W the exp_+ correction."""
    tol = rho0.tol if tol is None else tol
    if rho0.dim != U.dim:
        raise PreconditionError(f"dimension mismatch: unitary {U.dim} vs state {rho0.dim}")
    if psi0 is None:
        psi0 = _default_purification(rho0.mat)
    m0 = psi0.mat if isinstance(psi0, Purification) else Purification(psi0, tol).mat
    gap = np.linalg.norm(m0 @ dagger(m0) - rho0.mat)
    if gap > tol.lift_proj_tol:
        raise PreconditionError(f"psi0 does not purify rho0 (off by {gap:.3g})")
    lift = mechanical_lift(U, m0, tol)
    tr = complex(np.vdot(m0, lift.end))
    return PhaseResult(tr, PhaseMethod.Interferometric, U.grid.steps,
                       max(lift.max_projection_residual, lift.max_horizontality_residual), lift)


def open_system_phase(rho: DensityCurve, basis=None, tol: Tolerances | None = None) -> PhaseResult:
    """arg Tr(psi(0)^dagger psi(tau)) for psi = sum_k sqrt(p_k) |phi_k><k|."""
    tol = rho.tol if tol is None else tol
    spec = track_spectrum(rho, tol)
    lift = open_system_lift(spec, basis, rho, tol)
    tr = complex(np.vdot(lift.start, lift.end))
    f = lift.frames
    p = lift.eigenvalues
    spectral = complex(np.sum(np.sqrt(p[0] * p[-1]) * np.einsum("ik,ik->k", np.conj(f[0]), f[-1])))
    return PhaseResult(tr, PhaseMethod.OpenSystem, rho.grid.steps,
                       max(lift.max_projection_residual, lift.max_horizontality_residual), lift,
                       diagnostics={"spectral_sum": spectral, "spectral_sum_gap": abs(spectral - tr)})


def phase_gauge_check(compute: Callable, n_gauges: int = 8, seed: int = 0) -> float:
    """Largest pairwise circular deviation of phases over random gauge choices.

    ``compute(gauge)`` must return a PhaseResult; ``gauge`` is ``None`` for the
    reference run and a ``numpy.random.Generator`` for each randomised run.
    """
    rng = np.random.default_rng(seed)
    phases = [compute(None).phase]
    for _ in range(n_gauges):
        phases.append(compute(rng).phase)
    return max((circular_distance(a, b) for a, b in itertools.combinations(phases, 2)), default=0.0)


def gauge_runner(method: PhaseMethod, rho: DensityCurve | None = None, U: UnitaryCurve | None = None,
                 rho0: DensityOperator | None = None, tol: Tolerances = DEFAULT_TOL) -> Callable:
    """A ``compute(gauge)`` closure for ``phase_gauge_check``.

    Uhlmann and interferometric phases are recomputed from psi0 V with V a
    random unitary (for the interferometric phase this changes the level set
    as well as the point in it); the open-system phase from a random label
    basis.
    """
    if method is PhaseMethod.Uhlmann:
        base = _default_purification(rho.mats[0])

        def run(g):
            v = np.eye(rho.dim) if g is None else random_unitary(rho.dim, g)
            return uhlmann_phase(rho, base @ v, tol)
    elif method is PhaseMethod.Interferometric:
        base = _default_purification(rho0.mat)

        def run(g):
            v = np.eye(rho0.dim) if g is None else random_unitary(rho0.dim, g)
            return interferometric_phase_general(U, rho0, base @ v, tol)
    elif method is PhaseMethod.OpenSystem:
        def run(g):
            b = None if g is None else random_unitary(rho.dim, g)
            return open_system_phase(rho, b, tol)
    else:
        def run(g):
            return interferometric_phase_parallel(U, rho0, tol)
    return run
