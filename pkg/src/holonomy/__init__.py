"""Geometric phases of mixed quantum states.

Three routes to a phase along a curve of density operators: the Uhlmann
holonomy, the interferometric phase of a unitary evolution (corrected by a
time-ordered exponential when the evolution is not parallel transporting) and
the open-system phase built from a smoothly tracked spectral decomposition.
"""

from .bundle import DensityOperator, Purification, Subspace, TangentVector, mech_connection, momentum
from .config import DEFAULT_TOL, Tolerances
from .curves import DensityCurve, SpectralPath, TimeGrid, UnitaryCurve, bloch_curve, evolve_unitary, track_spectrum
from .errors import ConditioningWarning, ConfigError, ConvergenceError, CrossingError, HolonomyError, PreconditionError
from .lifts import LiftMethod, mechanical_lift, open_system_lift, ordered_exp_correction, uhlmann_lift
from .phases import (
    PhaseMethod,
    PhaseResult,
    interferometric_phase_general,
    interferometric_phase_parallel,
    open_system_phase,
    uhlmann_phase,
)
from .scenarios import (
    PRESETS,
    get_preset,
    scenario_constant,
    scenario_easy,
    scenario_parallel_transport_qubit,
    scenario_slater_rotation,
    scenario_slater_triangle,
    scenario_trefoil,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "PRESETS",
    "ConditioningWarning",
    "ConfigError",
    "ConvergenceError",
    "CrossingError",
    "DensityCurve",
    "DensityOperator",
    "HolonomyError",
    "LiftMethod",
    "PhaseMethod",
    "PhaseResult",
    "PreconditionError",
    "Purification",
    "SpectralPath",
    "Subspace",
    "TangentVector",
    "TimeGrid",
    "Tolerances",
    "UnitaryCurve",
    "bloch_curve",
    "evolve_unitary",
    "get_preset",
    "interferometric_phase_general",
    "interferometric_phase_parallel",
    "mech_connection",
    "mechanical_lift",
    "momentum",
    "open_system_lift",
    "open_system_phase",
    "ordered_exp_correction",
    "scenario_constant",
    "scenario_easy",
    "scenario_parallel_transport_qubit",
    "scenario_slater_rotation",
    "scenario_slater_triangle",
    "scenario_trefoil",
    "track_spectrum",
    "uhlmann_lift",
    "uhlmann_phase",
]
