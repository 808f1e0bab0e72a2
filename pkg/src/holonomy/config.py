"""Numerical tolerances and physical constants shared by every module."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

# The connection form is independent of hbar, so phases do not depend on it.
HBAR = 1.0


@dataclass(frozen=True)
class Tolerances:
    hermiticity_tol: float = 1e-10
    orthonormality_tol: float = 1e-10
    reconstruction_tol: float = 1e-10
    degeneracy_tol: float = 1e-8
    trace_tol: float = 1e-10
    norm_tol: float = 1e-10
    solve_tol: float = 1e-10
    pd_floor: float = 1e-10
    sv_floor: float = 1e-10
    pd_margin: float = 2e-10
    level_tol: float = 1e-8
    tangency_tol: float = 1e-8
    lift_proj_tol: float = 1e-7
    continuity_bound: float = 100.0
    parallel_tol: float = 1e-5
    rank_tol: float = 1e-9
    conditioning_gap: float = 1e-4

    def replace(self, **overrides: float) -> "Tolerances":
        names = {f.name for f in dataclasses.fields(self)}
        unknown = set(overrides) - names
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def scaled(self, factor: float) -> "Tolerances":
        """Every tolerance divided by ``factor`` (bounds on speed are left alone)."""
        fields = {
            f.name: getattr(self, f.name) / factor
            for f in dataclasses.fields(self)
            if f.name != "continuity_bound"
        }
        return dataclasses.replace(self, **fields)


DEFAULT_TOL = Tolerances()
