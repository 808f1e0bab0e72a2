"""Acceptance suite: every published number and structural claim, checked numerically.

Each criterion yields one or more :class:`CheckRow`. Rows flagged
``informational`` document a related quantity (for instance the value obtained
with the opposite sign convention) and do not take part in the verdict.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bundle import (
    Purification,
    Subspace,
    TangentVector,
    expected_dimension,
    level_q,
    mech_connection,
    realify,
    subspace_basis,
    subspace_rank,
    unrealify,
)
from .config import DEFAULT_TOL
from .curves import TimeGrid, evolve_unitary, track_spectrum
from .lifts import open_lift_velocity_split, open_system_lift, ordered_exp_correction, uhlmann_lift
from .linalg_core import (
    dagger,
    eig_hermitian,
    metric_G,
    random_hermitian,
    random_unitary,
)
from .phases import (
    circular_distance,
    interferometric_phase_general,
    open_system_phase,
    principal_arg,
    uhlmann_phase,
)
from .randomized import random_curve, random_level_tangent, random_purification
from .scenarios import (
    TREFOIL_REFERENCE_TRACE,
    TREFOIL_REGRESSION_TOL,
    TREFOIL_REGRESSION_TRACE,
    easy_exp_plus_reference,
    easy_horizontal_W,
    easy_phase_horizontal,
    easy_phase_reference,
    scenario_constant,
    scenario_easy,
    scenario_parallel_transport_qubit,
    scenario_slater_rotation,
    scenario_slater_triangle,
    scenario_trefoil,
    slater_rotation_ratio,
    slater_triangle_ratio,
)

__all__ = ["CRITERIA", "CheckRow", "Criterion", "format_table", "run_suite", "warm_up"]

PROPERTY_TRIALS = 200
PROPERTY_SEED = 20240611


@dataclass(frozen=True)
class CheckRow:
    criterion: int
    name: str
    measured: float | complex | str
    expected: float | complex | str
    tolerance: float
    passed: bool
    note: str = ""
    informational: bool = False


@dataclass
class CriterionResult:
    number: int
    title: str
    rows: list = field(default_factory=list)
    runtime_s: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(r.passed for r in self.rows if not r.informational)


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    check: Callable  # (factor) -> list of CheckRow


class _Rows:
    """Row collector for one criterion; ``factor`` divides every comparison tolerance."""

    def __init__(self, number: int, factor: float):
        self.number = number
        self.factor = factor
        self.rows = []

    def close(self, name, measured, expected, tol, distance=None, note="", informational=False):
        """Absolute comparison; ``distance`` overrides |measured - expected|."""
        t = tol / self.factor
        d = abs(measured - expected) if distance is None else distance
        self.rows.append(CheckRow(self.number, name, measured, expected, t, bool(d <= t), note, informational))

    def relative(self, name, measured, expected, tol, note="", informational=False):
        t = tol / self.factor
        ok = bool(np.isfinite(measured) and abs(measured - expected) <= t * abs(expected))
        self.rows.append(CheckRow(self.number, name, measured, expected, t, ok, note, informational))

    def bound(self, name, measured, limit, below=True, note="", scale_limit=True):
        lim = limit / self.factor if scale_limit else limit
        ok = measured <= lim if below else measured > lim
        exp = f"<= {lim:.3g}" if below else f"> {lim:.3g}"
        self.rows.append(CheckRow(self.number, name, measured, exp, lim, bool(ok), note))

    def runtime(self, name, seconds, limit):
        self.bound(f"{name} runtime_s", seconds, limit, note="wall clock, compiled kernels", scale_limit=False)


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def warm_up() -> None:
    """Compile and cache every kernel on a tiny problem so runtimes exclude compilation."""
    data = scenario_easy(steps=12).build()
    uhlmann_phase(data.rho)
    interferometric_phase_general(data.unitary, data.rho0)
    open_system_phase(data.rho)
    scenario_parallel_transport_qubit(steps=12).build()


# --------------------------------------------------------------------------
# 1-2: the "easy" qubit
# --------------------------------------------------------------------------

EASY_TIMES = (0.5, 1.0, np.pi)
EASY_POINTS = ((1.0, np.pi / 3, 0.8), (1.0, 0.4, 0.7), (1.0, 1.2, 0.6), (2.0, np.pi / 4, 0.9), (0.5, 2.0, 0.3))


def _easy_W(omega, theta, p1, t, steps):
    data = scenario_easy(omega=omega, theta=theta, p1=p1, tau=t, steps=steps).build()
    psi0 = np.diag(np.sqrt([p1, 1 - p1])).astype(np.complex128)
    return ordered_exp_correction(data.unitary.mats @ psi0)[-1]


def check_easy_exp_plus(factor: float = 1.0) -> list:
    out = _Rows(1, factor)
    total = 0.0
    for t in EASY_TIMES:
        w, dt = _timed(lambda: _easy_W(1.0, np.pi / 3, 0.8, t, 2000))
        total += dt
        err = float(np.max(np.abs(w - easy_exp_plus_reference(1.0, np.pi / 3, t))))
        out.close(f"W(t={t:.6g}) vs quoted closed form, max entry error", err, 0.0, 1e-6)
        err_h = float(np.max(np.abs(w - easy_horizontal_W(1.0, np.pi / 3, t))))
        out.close(f"W(t={t:.6g}) vs diag(e^-i w t cos th, e^+i w t cos th)", err_h, 0.0, 1e-6,
                  note="conjugate closed form solving dW/dt = -A W", informational=True)
    out.runtime("three exp_+ evaluations", total, 1.0)
    return out.rows


def check_easy_loop_phase(factor: float = 1.0) -> list:
    out = _Rows(2, factor)
    out.close("quoted formula at (p1=0.8, theta=pi/3)", easy_phase_reference(np.pi / 3, 0.8), -np.pi / 2, 1e-12,
              note="arithmetic of the closed form")
    total = 0.0
    for omega, theta, p1 in EASY_POINTS:
        def go():
            data = scenario_easy(omega=omega, theta=theta, p1=p1, steps=2000).build()
            return interferometric_phase_general(data.unitary, data.rho0).phase
        ph, dt = _timed(go)
        total += dt
        label = f"(omega={omega:.4g}, theta={theta:.4g}, p1={p1:.3g})"
        ref = easy_phase_reference(theta, p1)
        out.close(f"loop phase {label}", ph, ref, 1e-5, distance=circular_distance(ph, ref))
        alt = easy_phase_horizontal(theta, p1)
        out.close(f"loop phase {label}, sign-corrected formula", ph, alt, 1e-5,
                  distance=circular_distance(ph, alt), informational=True)
    out.runtime("five loop phases", total, 2.0)
    return out.rows


# --------------------------------------------------------------------------
# 3: trefoil
# --------------------------------------------------------------------------

def check_trefoil(factor: float = 1.0) -> list:
    out = _Rows(3, factor)

    def go():
        return open_system_phase(scenario_trefoil(steps=4000).build().rho)
    res, dt = _timed(go)
    z = complex(res.trace_value)
    out.close("trace real part", z.real, TREFOIL_REFERENCE_TRACE.real, 0.01)
    out.close("trace imaginary part", z.imag, TREFOIL_REFERENCE_TRACE.imag, 0.01)
    out.close("phase mod 2 pi", res.phase_2pi, 5.04, 0.05, distance=circular_distance(res.phase_2pi, 5.04))
    out.close("trace vs extrapolated regression value", z, TREFOIL_REGRESSION_TRACE, TREFOIL_REGRESSION_TOL,
              note="frozen 4000/8000-step extrapolation", informational=True)
    out.runtime("open-system phase, 4000 steps", dt, 5.0)
    return out.rows


# --------------------------------------------------------------------------
# 4-5: Slater's tangent ratios
# --------------------------------------------------------------------------

def _tan_ratio(data):
    g = interferometric_phase_general(data.unitary, data.rho0).phase
    big = uhlmann_phase(data.rho).phase
    return np.tan(g) / np.tan(big), g, big


SLATER_ROTATION_POINTS = ((0.5, np.pi / 3), (0.9, np.pi / 4))


def check_slater_rotation(factor: float = 1.0) -> list:
    out = _Rows(4, factor)
    total = 0.0
    for r, xi in SLATER_ROTATION_POINTS:
        (ratio, g, big), dt = _timed(lambda: _tan_ratio(scenario_slater_rotation(r=r, xi=xi).build()))
        total += dt
        lit = slater_rotation_ratio(r, xi, "literal")
        real = slater_rotation_ratio(r, xi, "real")
        cands = {"literal": lit, "real": real}
        errs = {k: (abs(ratio - v) / abs(v) if isinstance(v, float) and np.isfinite(v) and v != 0 else np.inf)
                for k, v in cands.items()}
        branch = min(errs, key=errs.get)
        out.relative(f"tan ratio (r={r:.3g}, xi={xi:.4g}), {branch} branch", float(ratio), float(np.real(cands[branch])),
                     1e-2, note=f"gamma={g:.10f}, Gamma={big:.10f}, literal={lit}, real={real}")
    out.runtime("two rotation scenarios", total, 10.0)
    return out.rows


def check_slater_triangle(factor: float = 1.0) -> list:
    out = _Rows(5, factor)
    args = dict(r=0.5, theta1=np.pi / 2, phi1=0.0, theta2=np.pi / 2, phi2=np.pi / 2)
    out.close("closed-form ratio", slater_triangle_ratio(**args), 8.5, 1e-9, note="arithmetic of the closed form")
    (ratio, g, big), dt = _timed(lambda: _tan_ratio(scenario_slater_triangle(**args).build()))
    out.relative("measured tan ratio", float(ratio), 8.5, 2e-2, note=f"gamma={g:.10f}, Gamma={big:.10f}")
    out.runtime("triangle scenario", dt, 10.0)
    return out.rows


# --------------------------------------------------------------------------
# 6: reduction chain
# --------------------------------------------------------------------------

def check_reduction_chain(factor: float = 1.0) -> list:
    out = _Rows(6, factor)
    iso = [
        ("easy (0.8, pi/3)", scenario_easy()),
        ("easy (0.7, 0.4)", scenario_easy(theta=0.4, p1=0.7)),
        ("easy theta=pi/2", scenario_easy(theta=np.pi / 2)),
        ("slater_rotation (0.9, pi/4)", scenario_slater_rotation(r=0.9, xi=np.pi / 4)),
        ("slater_triangle", scenario_slater_triangle()),
    ]
    for label, sc in iso:
        data = sc.build()
        a = open_system_phase(data.rho).phase
        b = interferometric_phase_general(data.unitary, data.rho0).phase
        out.close(f"{label}: open-system vs interferometric", a, b, 2e-3, distance=circular_distance(a, b))
    pt = [
        ("pt_circle", scenario_parallel_transport_qubit(path="circle")),
        ("pt_triangle", scenario_parallel_transport_qubit(path="triangle", steps=3000)),
        ("pt_circle r=0.9, twist=2", scenario_parallel_transport_qubit(r=0.9, theta0=1.0, twist=2.0)),
        ("constant", scenario_constant()),
    ]
    for label, sc in pt:
        data = sc.build()
        a = interferometric_phase_general(data.unitary, data.rho0).phase
        b = principal_arg(np.trace(data.unitary.mats[-1] @ data.rho0.mat))
        out.close(f"{label}: interferometric vs arg Tr(U rho)", a, b, 1e-6, distance=circular_distance(a, b))
    return out.rows


# --------------------------------------------------------------------------
# 7: property suites
# --------------------------------------------------------------------------

def _dims(k: int) -> int:
    return 2 + k % 3


def _prop_connection(rng, trials):
    cov = member = 0.0
    for k in range(trials):
        n = _dims(k)
        phi = Purification(random_purification(n, rng))
        x = TangentVector(phi, random_level_tangent(phi.mat, rng))
        spec = eig_hermitian(dagger(phi.mat) @ phi.mat)
        a = mech_connection(phi, x, spec)
        u = random_unitary(n, rng)
        phi_u = phi.right(u)
        spec_u = eig_hermitian(dagger(phi_u.mat) @ phi_u.mat)
        a_u = mech_connection(phi_u, TangentVector(phi_u, x.dir @ u), spec_u)
        cov = max(cov, float(np.linalg.norm(a_u - dagger(u) @ a @ u)))
        ref = spec.matrix()
        member = max(member, float(np.linalg.norm(a + dagger(a))), float(np.linalg.norm(a @ ref - ref @ a)))
    return cov, member


def _prop_momentum(rng, trials):
    worst = 0.0
    for k in range(trials):
        n = _dims(k)
        h0, h1 = random_hermitian(n, rng), random_hermitian(n, rng)
        U = evolve_unitary(lambda t: h0 + t * h1, TimeGrid(0.0, 1.0, 40))
        psi0 = random_purification(n, rng)
        psi = U.mats @ psi0
        j0 = dagger(psi0) @ psi0
        worst = max(worst, float(np.max(np.linalg.norm(dagger(psi) @ psi - j0, axis=(1, 2)))))
    return worst


def _prop_dimensions(rng, trials):
    worst = 0
    for k in range(trials):
        n = _dims(k)
        psi = Purification(random_purification(n, rng))
        spec = eig_hermitian(dagger(psi.mat) @ psi.mat)
        q = level_q(spec)
        for which in Subspace:
            worst = max(worst, abs(subspace_rank(psi, which, spec) - expected_dimension(which, n, q)))
    return worst


def _prop_intersection(rng, trials):
    worst_sv, deficiency = np.inf, 0
    for k in range(trials):
        n = _dims(k)
        psi = Purification(random_purification(n, rng))
        m = psi.mat
        cols = []
        for j in range(2 * n * n):
            e = np.zeros(2 * n * n)
            e[j] = 1.0
            x = unrealify(e, n)
            cols.append(np.concatenate([realify(dagger(x) @ m + dagger(m) @ x), realify(dagger(x) @ m - dagger(m) @ x)]))
        sv = np.linalg.svd(np.array(cols).T, compute_uv=False)
        worst_sv = min(worst_sv, float(sv[-1]))
        basis = subspace_basis(psi, Subspace.TangentS_psi) + subspace_basis(psi, Subspace.UhlmannHorizontal)
        gram = np.array([[metric_G(a, b) for b in basis] for a in basis])
        rank = int(np.linalg.matrix_rank(gram, tol=DEFAULT_TOL.rank_tol))
        deficiency = max(deficiency, 2 * n * n - 1 - rank)
    return worst_sv, deficiency


def _prop_uhlmann(rng, trials):
    worst = 0.0
    for k in range(trials):
        lift = uhlmann_lift(random_curve(_dims(k), rng, steps=200))
        worst = max(worst, lift.max_horizontality_residual)
    return worst


def _prop_open_split(rng, trials, probes=4):
    tangency = orth_alg = orth_basis = 0.0
    for k in range(trials):
        n = _dims(k)
        rho = random_curve(n, rng, steps=200)
        lift = open_system_lift(track_spectrum(rho), rho=rho)
        d_u, d_v = open_lift_velocity_split(lift)
        psi = lift.psi
        tangency = max(tangency, float(np.max(np.linalg.norm(dagger(d_u) @ psi + dagger(psi) @ d_u, axis=(1, 2)))))
        a = dagger(psi) @ d_v
        b = d_v @ dagger(psi)
        orth_alg = max(orth_alg, float(np.max(np.linalg.norm(a - dagger(a), axis=(1, 2)))),
                       float(np.max(np.linalg.norm(b - dagger(b), axis=(1, 2)))))
        for i in rng.choice(len(psi), size=probes, replace=False):
            p = Purification(psi[i] / np.linalg.norm(psi[i]))
            for which in (Subspace.UhlmannVertical, Subspace.TangentS_psi):
                for e in subspace_basis(p, which):
                    orth_basis = max(orth_basis, abs(metric_G(d_v[i], e)))
    return tangency, orth_alg, orth_basis


def check_properties(factor: float = 1.0, trials: int = PROPERTY_TRIALS, seed: int = PROPERTY_SEED) -> list:
    out = _Rows(7, factor)
    note = f"{trials} trials, n in (2, 3, 4), seed {seed}"
    rng = np.random.default_rng(seed)
    cov, member = _prop_connection(rng, trials)
    out.bound("gauge covariance of A under psi -> psi U", cov, 1e-10, note=note)
    out.bound("A is skew-Hermitian and commutes with psi^dagger psi", member, 1e-10, note=note)
    out.bound("momentum drift along Schroedinger flows", _prop_momentum(rng, trials), 1e-8, note=note)
    out.bound("max |numerical rank - dimension count| over all subspaces", _prop_dimensions(rng, trials), 0,
              note=note, scale_limit=False)
    sv, deficiency = _prop_intersection(rng, trials)
    out.bound("smallest singular value of X -> (X^dagger psi + psi^dagger X, X^dagger psi - psi^dagger X)",
              sv, DEFAULT_TOL.rank_tol, below=False, note=note, scale_limit=False)
    out.bound("rank deficiency of T S(psi) + Uhlmann horizontal Gram matrix", deficiency, 0,
              note=note, scale_limit=False)
    out.bound("Uhlmann-lift horizontality residual", _prop_uhlmann(rng, trials), 1e-6, note=note)
    tangency, orth_alg, orth_basis = _prop_open_split(rng, trials)
    out.bound("open lift: d_u tangent to the level set", tangency, 1e-6, note=note)
    out.bound("open lift: psi^dagger d_v and d_v psi^dagger Hermitian", orth_alg, 1e-6, note=note)
    out.bound("open lift: G(d_v, e) for vertical and Ker dJ basis vectors", orth_basis, 1e-6, note=note)
    return out.rows


# --------------------------------------------------------------------------
# 8: distinctness
# --------------------------------------------------------------------------

def check_distinctness(factor: float = 1.0) -> list:
    out = _Rows(8, factor)
    for label, sc in (("slater_rotation (0.5, pi/3)", scenario_slater_rotation(r=0.5, xi=np.pi / 3)),
                      ("slater_triangle r=0.5", scenario_slater_triangle())):
        data = sc.build()
        g = interferometric_phase_general(data.unitary, data.rho0).phase
        big = uhlmann_phase(data.rho).phase
        out.bound(f"{label}: |gamma - Gamma|", circular_distance(g, big), 0.01, below=False,
                  note=f"gamma={g:.10f}, Gamma={big:.10f}", scale_limit=False)
    return out.rows


# --------------------------------------------------------------------------
# 9: second-order convergence
# --------------------------------------------------------------------------

def _ratios(values):
    """Error ratios e_N / e_2N against a Richardson value built from the two finest levels."""
    v = [np.asarray(x, dtype=np.complex128) for x in values]
    ref = (4 * v[-1] - v[-2]) / 3
    errs = [float(np.max(np.abs(x - ref))) for x in v[:-1]]
    return [errs[i] / errs[i + 1] for i in range(len(errs) - 1)], errs


def check_convergence(factor: float = 1.0) -> list:
    out = _Rows(9, factor)
    cases = (
        ("item 1: W(pi)", 500, lambda s: _easy_W(1.0, np.pi / 3, 0.8, np.pi, s)),
        ("item 2: loop phase (theta=0.4, p1=0.7)", 500, lambda s: np.exp(1j * interferometric_phase_general(
            *(lambda d: (d.unitary, d.rho0))(scenario_easy(theta=0.4, p1=0.7, steps=s).build())).phase)),
        ("item 3: trefoil trace", 1000, lambda s: open_system_phase(scenario_trefoil(steps=s).build().rho).trace_value),
    )
    for label, base, fn in cases:
        vals = [fn(base * 2 ** k) for k in range(4)]
        ratios, errs = _ratios(vals)
        for j, q in enumerate(ratios):
            steps = base * 2 ** j
            out.close(f"{label}: error ratio {steps} -> {2 * steps} steps", q, 4.0, 1.0,
                      note=f"errors {errs[j]:.3e} -> {errs[j + 1]:.3e}")
    return out.rows


CRITERIA = (
    Criterion(1, "easy_exp_plus", check_easy_exp_plus),
    Criterion(2, "easy_loop_phase", check_easy_loop_phase),
    Criterion(3, "trefoil", check_trefoil),
    Criterion(4, "slater_rotation", check_slater_rotation),
    Criterion(5, "slater_triangle", check_slater_triangle),
    Criterion(6, "reduction_chain", check_reduction_chain),
    Criterion(7, "properties", check_properties),
    Criterion(8, "phase_distinctness", check_distinctness),
    Criterion(9, "convergence", check_convergence),
)


def select(filter_text: str | None = None) -> list:
    if not filter_text:
        return list(CRITERIA)
    key = filter_text.lower()
    return [c for c in CRITERIA if key in c.title or key == str(c.number)]


def run_criterion(crit: Criterion, factor: float = 1.0) -> CriterionResult:
    res = CriterionResult(crit.number, crit.title)
    t = time.perf_counter()
    try:
        res.rows = crit.check(factor)
    except Exception as e:  # collected, not fail-fast
        res.error = f"{type(e).__name__}: {e}"
    res.runtime_s = time.perf_counter() - t
    return res


def run_suite(filter_text: str | None = None, factor: float = 1.0) -> list:
    if not factor > 0:
        raise ValueError("tighten factor must be positive")
    chosen = select(filter_text)
    if chosen:
        warm_up()
    return [run_criterion(c, factor) for c in chosen]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (complex, np.complexfloating)):
        z = complex(v)
        return f"{z.real:.10g}{'-' if z.imag < 0 else '+'}{abs(z.imag):.10g}i"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def format_table(results: list) -> str:
    lines = []
    for res in results:
        verdict = "PASS" if res.passed else "FAIL"
        lines.append(f"[{verdict}] criterion {res.number} {res.title} ({res.runtime_s:.2f} s)")
        if res.error:
            lines.append(f"    error: {res.error}")
        for r in res.rows:
            tag = ("info" if r.passed else "info!") if r.informational else ("ok" if r.passed else "FAIL")
            lines.append(f"    {tag:<5} {r.name}: measured {_fmt(r.measured)}, expected {_fmt(r.expected)}, "
                         f"tol {r.tolerance:.3g}" + (f"  [{r.note}]" if r.note else ""))
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"
