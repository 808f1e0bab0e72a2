"""Built-in evolution scenarios with closed-form phase targets.

Each builder returns a :class:`Scenario`; ``Scenario.build()`` samples the
curves. Building twice with the same parameters gives bitwise-equal arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable

import numpy as np

from .bundle import DensityOperator
from .config import DEFAULT_TOL, Tolerances
from .curves import (
    PAULI,
    DensityCurve,
    TimeGrid,
    UnitaryCurve,
    bloch_curve,
    bloch_density,
    conjugate_evolution,
    parallel_transport_driving,
)
from .errors import PreconditionError

__all__ = [
    "PRESETS",
    "ExpectationKind",
    "PhaseExpectation",
    "Scenario",
    "ScenarioData",
    "easy_exp_plus_reference",
    "easy_horizontal_W",
    "easy_phase_reference",
    "get_preset",
    "scenario_constant",
    "scenario_easy",
    "scenario_parallel_transport_qubit",
    "scenario_slater_rotation",
    "scenario_slater_triangle",
    "scenario_trefoil",
    "slater_rotation_ratio",
    "slater_triangle_ratio",
]


class ExpectationKind(enum.Enum):
    ClosedFormPhase = "closed_form_phase"
    TangentRatio = "tangent_ratio"
    ComplexTrace = "complex_trace"


@dataclass(frozen=True)
class PhaseExpectation:
    kind: ExpectationKind
    value: complex | float
    tolerance: float
    note: str = ""

    def __post_init__(self):
        if not self.tolerance > 0:
            raise PreconditionError("expectation tolerance must be positive")


@dataclass(frozen=True)
class ScenarioData:
    rho: DensityCurve
    unitary: UnitaryCurve | None
    rho0: DensityOperator
    expected: PhaseExpectation | None
    parallel_transporting: bool = False
    extras: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Scenario:
    name: str
    parameters: MappingProxyType
    builder: Callable = field(repr=False, compare=False)

    def build(self) -> ScenarioData:
        return self.builder()


def _scenario(name: str, params: dict, builder: Callable) -> Scenario:
    return Scenario(name, MappingProxyType(dict(params)), builder)


def _pauli_dot(n) -> np.ndarray:
    return n[0] * PAULI[0] + n[1] * PAULI[1] + n[2] * PAULI[2]


def _rotation(axis, angle) -> np.ndarray:
    """exp(-i angle/2 axis.sigma) for a unit axis, broadcasting over ``angle``."""
    angle = np.asarray(angle, dtype=float)[..., None, None]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * _pauli_dot(axis)


# --------------------------------------------------------------------------
# the two-level "easy" example
# --------------------------------------------------------------------------

def easy_phase_reference(theta: float, p1: float) -> float:
    """arg(p1 e^{i pi (1 + cos theta)} + p2 e^{i pi (1 - cos theta)})."""
    p2 = 1 - p1
    c = np.cos(theta)
    return float(np.angle(p1 * np.exp(1j * np.pi * (1 + c)) + p2 * np.exp(1j * np.pi * (1 - c))))


def easy_exp_plus_reference(omega: float, theta: float, t) -> np.ndarray:
    """diag(e^{i omega t cos theta}, e^{-i omega t cos theta}), as quoted for exp_+."""
    a = omega * np.asarray(t, dtype=float) * np.cos(theta)
    out = np.zeros(np.shape(a) + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = np.exp(1j * a)
    out[..., 1, 1] = np.exp(-1j * a)
    return out


def easy_horizontal_W(omega: float, theta: float, t) -> np.ndarray:
    """The factor that actually annihilates the connection along U(t) psi0.

    Along psi(t) = U(t) diag(sqrt p) the connection equals
    i omega cos(theta) sigma_z, so dW/dt = -A W integrates to the inverse of
    ``easy_exp_plus_reference``.
    """
    return np.conj(easy_exp_plus_reference(omega, theta, t))


def easy_phase_horizontal(theta: float, p1: float) -> float:
    """Loop phase carried by the horizontal factor ``easy_horizontal_W`` at tau = pi/omega."""
    return -easy_phase_reference(theta, p1)


def scenario_easy(omega: float = 1.0, theta: float = np.pi / 3, p1: float = 0.8,
                  tau: float | None = None, steps: int = 2000,
                  tol: Tolerances = DEFAULT_TOL) -> Scenario:
    if not 0 < p1 < 1 or abs(p1 - 0.5) <= tol.degeneracy_tol:
        raise PreconditionError("p1 must lie in (0, 1) and differ from 1/2")
    if omega == 0:
        raise PreconditionError("omega must be non-zero")
    tau = np.pi / abs(omega) if tau is None else float(tau)
    params = dict(omega=omega, theta=theta, p1=p1, tau=tau, steps=steps)

    def build():
        grid = TimeGrid(0.0, tau, steps)
        t = grid.samples[:, None, None]
        ns = np.sin(theta) * PAULI[0] + np.cos(theta) * PAULI[2]
        u = np.cos(omega * t) * np.eye(2) + 1j * np.sin(omega * t) * ns
        u[0] = np.eye(2)
        U = UnitaryCurve(grid, u, tol)
        rho0 = DensityOperator(np.diag([p1, 1 - p1]).astype(np.complex128), tol)
        expected = None
        if np.isclose(abs(omega) * tau, np.pi, rtol=0, atol=1e-12):
            expected = PhaseExpectation(ExpectationKind.ClosedFormPhase,
                                        easy_phase_reference(theta, p1), 1e-5)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0, expected,
                            parallel_transporting=abs(np.cos(theta)) < 1e-12,
                            extras={"hamiltonian": -omega * ns})
    return _scenario("easy", params, build)


# --------------------------------------------------------------------------
# Slater's qubit examples
# --------------------------------------------------------------------------

def slater_rotation_chi(r: float, xi: float) -> complex:
    return complex(np.sqrt(complex((r * r - 2 - r * r * np.cos(2 * xi)) / 2)))


def slater_rotation_ratio(r: float, xi: float, branch: str = "literal") -> float:
    """tan(gamma)/tan(Gamma) for one full rotation about (0, sin xi, cos xi).

    ``literal`` evaluates pi chi tan(pi cos xi) coth(pi chi) / (pi cos xi) in
    complex arithmetic; ``real`` uses chi~ = |chi| with cot in place of coth.
    """
    c = np.cos(xi)
    chi = slater_rotation_chi(r, xi)
    if branch == "literal":
        val = np.pi * chi * np.tan(np.pi * c) / np.tanh(np.pi * chi) / (np.pi * c)
        return float(val.real) if abs(val.imag) <= 1e-9 * max(1.0, abs(val)) else complex(val)
    if branch == "real":
        a = abs(chi)
        return float(np.pi * a * np.tan(np.pi * c) / np.tan(np.pi * a) / (np.pi * c))
    raise ValueError(f"unknown branch {branch!r}")


def scenario_slater_rotation(r: float = 0.5, xi: float = np.pi / 3, steps: int = 2000,
                             tol: Tolerances = DEFAULT_TOL) -> Scenario:
    if not 0 < r < 1:
        raise PreconditionError("Bloch radius r must lie in (0, 1)")
    params = dict(r=r, xi=xi, steps=steps)

    def build():
        grid = TimeGrid(0.0, 1.0, steps)
        axis = np.array([0.0, np.sin(xi), np.cos(xi)])
        u = _rotation(axis, 2 * np.pi * grid.samples)
        u[0] = np.eye(2)
        U = UnitaryCurve(grid, u, tol)
        rho0 = DensityOperator(bloch_density(0.0, 0.0, r), tol)
        expected = None
        if abs(np.sin(xi)) > 1e-12:
            expected = PhaseExpectation(ExpectationKind.TangentRatio,
                                        slater_rotation_ratio(r, xi, "literal"), 1e-2)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0, expected,
                            extras={"hamiltonian": np.pi * _pauli_dot(axis)})
    return _scenario("slater_rotation", params, build)


def _unit(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def slater_triangle_ratio(r, theta1, phi1, theta2, phi2) -> float:
    den = r * r * ((1 + np.cos(theta1)) * (1 + np.cos(theta2))
                   + np.cos(phi1 - phi2) * np.sin(theta1) * np.sin(theta2))
    return float(1 + (4 - 10 * r ** 2 + 6 * r ** 4) / den)


def geodesic_triangle_unitary(vertices, grid: TimeGrid) -> np.ndarray:
    """Samples of the piecewise rotation driving a Bloch vector along geodesic arcs.

    Arc j runs over one third of the interval and rotates about
    a x b / |a x b|, which is perpendicular to the moving Bloch vector, so
    every eigenvector has zero dynamical phase.
    """
    legs = len(vertices)
    if grid.steps % legs:
        raise PreconditionError(f"step count must be a multiple of {legs} so vertices land on samples")
    per = grid.steps // legs
    u = np.empty((grid.steps + 1, 2, 2), dtype=np.complex128)
    u[0] = np.eye(2)
    acc = np.eye(2, dtype=np.complex128)
    s = np.arange(1, per + 1) / per
    for j in range(legs):
        a, b = vertices[j], vertices[(j + 1) % legs]
        cross = np.cross(a, b)
        norm = np.linalg.norm(cross)
        if norm < 1e-12:
            raise PreconditionError("consecutive triangle vertices coincide or are antipodal")
        angle = np.arctan2(norm, float(np.dot(a, b)))
        seg = _rotation(cross / norm, angle * s) @ acc
        u[j * per + 1:(j + 1) * per + 1] = seg
        acc = seg[-1]
    return u


def scenario_slater_triangle(r: float = 0.5, theta1: float = np.pi / 2, phi1: float = 0.0,
                             theta2: float = np.pi / 2, phi2: float = np.pi / 2,
                             steps: int = 3000, tol: Tolerances = DEFAULT_TOL) -> Scenario:
    if not 0 < r < 1:
        raise PreconditionError("Bloch radius r must lie in (0, 1)")
    params = dict(r=r, theta1=theta1, phi1=phi1, theta2=theta2, phi2=phi2, steps=steps)

    def build():
        verts = [np.array([0.0, 0.0, 1.0]), _unit(theta1, phi1), _unit(theta2, phi2)]
        grid = TimeGrid(0.0, 3.0, steps)
        U = UnitaryCurve(grid, geodesic_triangle_unitary(verts, grid), tol)
        rho0 = DensityOperator(bloch_density(0.0, 0.0, r), tol)
        expected = PhaseExpectation(ExpectationKind.TangentRatio,
                                    slater_triangle_ratio(r, theta1, phi1, theta2, phi2), 2e-2)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0, expected,
                            parallel_transporting=True, extras={"vertices": verts})
    return _scenario("slater_triangle", params, build)


# --------------------------------------------------------------------------
# the trefoil-shaped non-isospectral loop
# --------------------------------------------------------------------------

TREFOIL_REFERENCE_TRACE = 0.17 - 0.49j
# Richardson extrapolation (4 T_8000 - T_4000) / 3 of this package's open-system trace
TREFOIL_REGRESSION_TRACE = 0.16807069524194407 - 0.4928874722999419j
TREFOIL_REGRESSION_TOL = 1e-5


def trefoil_xyz(t):
    t = np.asarray(t, dtype=float)
    return 0.5 * np.cos(t), 0.25 * np.sin(t), 0.5 * np.sin(t / 2) ** 2


def trefoil_radius(t):
    t = np.asarray(t, dtype=float)
    return 0.25 * np.sqrt(4 * np.cos(t) ** 2 + np.sin(t) ** 2 + 4 * np.sin(t / 2) ** 4)


def scenario_trefoil(steps: int = 4000, tol: Tolerances = DEFAULT_TOL) -> Scenario:
    if steps < 1000:
        raise PreconditionError("trefoil needs at least 1000 steps")

    def build():
        grid = TimeGrid(0.0, 2 * np.pi, steps)
        rho = bloch_curve(lambda t: trefoil_xyz(t)[0], lambda t: trefoil_xyz(t)[1],
                          lambda t: trefoil_xyz(t)[2], grid, tol)
        expected = PhaseExpectation(ExpectationKind.ComplexTrace, TREFOIL_REFERENCE_TRACE, 0.01)
        return ScenarioData(rho, None, rho.sample(0), expected)
    return _scenario("trefoil", dict(steps=steps), build)


# --------------------------------------------------------------------------
# parallel-transporting qubit drivings
# --------------------------------------------------------------------------

def _path_velocity(path: Callable, t: float, h: float = 1e-6) -> np.ndarray:
    return (np.asarray(path(t + h)) - np.asarray(path(t - h))) / (2 * h)


def bloch_path_hamiltonian(path: Callable, velocity: Callable | None = None,
                           twist: Callable | float = 0.0) -> Callable:
    """H(t) = 1/2 (n x n').sigma + 1/2 twist(t) n.sigma, which carries n(0) along n(t)."""
    def H(t):
        n = np.asarray(path(t), dtype=float)
        dn = np.asarray(velocity(t) if velocity is not None else _path_velocity(path, t), dtype=float)
        tw = twist(t) if callable(twist) else twist
        return 0.5 * _pauli_dot(np.cross(n, dn)) + 0.5 * tw * _pauli_dot(n)
    return H


def circle_path(theta0: float):
    def n(t):
        return np.array([np.sin(theta0) * np.cos(t), np.sin(theta0) * np.sin(t), np.cos(theta0)])

    def dn(t):
        return np.array([-np.sin(theta0) * np.sin(t), np.sin(theta0) * np.cos(t), 0.0])
    return n, dn


def qubit_loop_phase(r: float, solid_angle: float) -> float:
    """arg(cos(Omega/2) - i r sin(Omega/2)), i.e. -arctan(r tan(Omega/2)) on the principal branch."""
    return float(np.angle(np.cos(solid_angle / 2) - 1j * r * np.sin(solid_angle / 2)))


def scenario_parallel_transport_qubit(r: float = 0.5, path: str = "circle", theta0: float = np.pi / 3,
                                      twist: float = 1.0, steps: int = 2000,
                                      tol: Tolerances = DEFAULT_TOL) -> Scenario:
    """Bloch vector of length r carried once around a loop with zero dynamical phases.

    ``path`` is ``circle`` (latitude circle at colatitude theta0), ``triangle``
    (octant triangle through the poles) or ``constant``. ``twist`` adds an
    arbitrary rotation about n(t) to the driving that the construction must
    remove.
    """
    if not 0 < r < 1:
        raise PreconditionError("Bloch radius r must lie in (0, 1)")
    params = dict(r=r, path=path, theta0=theta0, twist=twist, steps=steps)

    def build():
        if path == "circle":
            n, dn = circle_path(theta0)
            grid = TimeGrid(0.0, 2 * np.pi, steps)
            omega = 2 * np.pi * (1 - np.cos(theta0))
            H = bloch_path_hamiltonian(n, dn, twist)
        elif path == "triangle":
            verts = [np.array([0.0, 0.0, 1.0]), _unit(np.pi / 2, 0.0), _unit(np.pi / 2, np.pi / 2)]
            grid = TimeGrid(0.0, 3.0, steps)
            base = geodesic_triangle_unitary(verts, grid)
            U = UnitaryCurve(grid, base, tol)
            rho0 = DensityOperator(bloch_density(0.0, 0.0, r), tol)
            expected = PhaseExpectation(ExpectationKind.ClosedFormPhase, qubit_loop_phase(r, np.pi / 2), 1e-6)
            return ScenarioData(conjugate_evolution(U, rho0), U, rho0, expected, parallel_transporting=True)
        elif path == "constant":
            grid = TimeGrid(0.0, 1.0, steps)
            n, omega = (lambda t: np.array([0.0, 0.0, 1.0])), 0.0

            def H(t):
                return 0.5 * twist * PAULI[2]
        else:
            raise PreconditionError(f"unknown Bloch path {path!r}")
        v0 = np.asarray(n(0.0))
        rho0 = DensityOperator(bloch_density(*(r * v0)), tol)
        U = parallel_transport_driving(H, rho0, grid, tol=tol)
        expected = PhaseExpectation(ExpectationKind.ClosedFormPhase, qubit_loop_phase(r, omega), 1e-4)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0, expected, parallel_transporting=True,
                            extras={"solid_angle": omega})
    return _scenario(f"pt_{path}", params, build)


def scenario_constant(p1: float = 0.7, steps: int = 200, tol: Tolerances = DEFAULT_TOL) -> Scenario:
    def build():
        grid = TimeGrid(0.0, 1.0, steps)
        U = UnitaryCurve(grid, np.broadcast_to(np.eye(2), (steps + 1, 2, 2)), tol)
        rho0 = DensityOperator(np.diag([p1, 1 - p1]).astype(np.complex128), tol)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0,
                            PhaseExpectation(ExpectationKind.ClosedFormPhase, 0.0, 1e-12),
                            parallel_transporting=True)
    return _scenario("constant", dict(p1=p1, steps=steps), build)


# --------------------------------------------------------------------------
# preset registry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    factory: Callable
    defaults: MappingProxyType
    default_method: str
    summary: str

    def make(self, overrides: dict | None = None, tol: Tolerances = DEFAULT_TOL) -> Scenario:
        kw = dict(self.defaults)
        for k, v in (overrides or {}).items():
            if k not in kw:
                raise KeyError(k)
            kw[k] = v
        return self.factory(tol=tol, **kw)


def _preset(name, factory, defaults, method, summary):
    return Preset(name, factory, MappingProxyType(defaults), method, summary)


PRESETS = {p.name: p for p in [
    _preset("easy", scenario_easy, dict(omega=1.0, theta=np.pi / 3, p1=0.8, tau=None, steps=2000),
            "all", "qubit under H = -omega n.sigma with n = (sin theta, 0, cos theta)"),
    _preset("slater_rotation", scenario_slater_rotation, dict(r=0.5, xi=np.pi / 3, steps=2000),
            "all", "one full rotation of a Bloch vector (0, 0, r) about (0, sin xi, cos xi)"),
    _preset("slater_triangle", scenario_slater_triangle,
            dict(r=0.5, theta1=np.pi / 2, phi1=0.0, theta2=np.pi / 2, phi2=np.pi / 2, steps=3000),
            "all", "geodesic triangle (0,0) -> (theta1,phi1) -> (theta2,phi2) -> (0,0)"),
    _preset("trefoil", scenario_trefoil, dict(steps=4000),
            "open", "non-isospectral loop x = cos(t)/2, y = sin(t)/4, z = sin^2(t/2)/2"),
    _preset("pt_circle", scenario_parallel_transport_qubit,
            dict(r=0.5, path="circle", theta0=np.pi / 3, twist=1.0, steps=2000),
            "all", "parallel-transporting drive around a latitude circle"),
    _preset("pt_triangle", scenario_parallel_transport_qubit,
            dict(r=0.5, path="triangle", theta0=0.0, twist=0.0, steps=3000),
            "all", "parallel-transporting drive around the octant triangle"),
    _preset("constant", scenario_constant, dict(p1=0.7, steps=200),
            "all", "stationary state"),
]}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown scenario preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
