"""Execute a RunConfig: build scenarios, compute phases, collect rows."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bundle import DensityOperator
from .curves import (
    PAULI,
    TimeGrid,
    bloch_curve,
    bloch_density,
    conjugate_evolution,
    evolve_unitary,
    parallel_transport_driving,
)
from .errors import ConfigError
from .phases import (
    PhaseMethod,
    PhaseResult,
    gauge_runner,
    interferometric_phase_general,
    open_system_phase,
    phase_gauge_check,
    principal_arg,
    uhlmann_phase,
)
from .report import ReportRow
from .runconfig import BlochSource, HamiltonianSource, PresetSource, RunConfig
from .scenarios import PRESETS, ScenarioData

__all__ = ["build_source", "run", "worker_count"]

_METHOD_ORDER = ("uhlmann", "interferometric", "open")
_PHASE_METHOD = {"uhlmann": PhaseMethod.Uhlmann, "interferometric": PhaseMethod.Interferometric,
                 "open": PhaseMethod.OpenSystem}


def worker_count() -> int:
    """Value of HOLONOMY_THREADS, else the number of usable cores."""
    raw = os.environ.get("HOLONOMY_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"HOLONOMY_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError(f"HOLONOMY_THREADS must be a positive integer, got {raw!r}")
        return n
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


def build_source(source, steps: int, tol, overrides: dict | None = None) -> ScenarioData:
    if isinstance(source, PresetSource):
        params = dict(source.parameters)
        params.update(overrides or {})
        params["steps"] = steps
        return PRESETS[source.preset].make(params, tol).build()
    grid = TimeGrid(source.t0, source.t1, steps)
    if isinstance(source, BlochSource):
        rho = bloch_curve(source.x, source.y, source.z, grid, tol)
        return ScenarioData(rho, None, rho.sample(0), None)
    if isinstance(source, HamiltonianSource):
        comps = (source.hx, source.hy, source.hz)

        def H(t):
            c = [float(e(t)) for e in comps]
            return c[0] * PAULI[0] + c[1] * PAULI[1] + c[2] * PAULI[2]
        rho0 = DensityOperator(bloch_density(*source.bloch0), tol)
        if source.parallel_transport:
            U = parallel_transport_driving(H, rho0, grid, tol=tol)
        else:
            U = evolve_unitary(H, grid, tol=tol)
        return ScenarioData(conjugate_evolution(U, rho0), U, rho0, None,
                            parallel_transporting=source.parallel_transport)
    raise TypeError(f"unknown scenario source {source!r}")


def _compute(method: str, data: ScenarioData, tol) -> PhaseResult:
    if method == "uhlmann":
        return uhlmann_phase(data.rho, tol=tol)
    if method == "interferometric":
        if data.unitary is None:
            raise ConfigError("method 'interferometric' needs a unitary evolution", field="method")
        return interferometric_phase_general(data.unitary, data.rho0, tol=tol)
    if method == "open":
        return open_system_phase(data.rho, tol=tol)
    raise ConfigError(f"unknown method {method!r}", field="method")


def _row(label, method, trace, residual, steps, wall) -> ReportRow:
    trace = complex(trace)
    return ReportRow(label, method, principal_arg(trace), trace.real, trace.imag, abs(trace),
                     float(residual), int(steps), float(wall))


def _job(cfg: RunConfig, label: str, source, overrides: dict) -> list:
    tol = cfg.tolerances
    steps = cfg.steps_for(source)
    data = build_source(source, steps, tol, overrides)
    methods = [m for m in _METHOD_ORDER if m in cfg.methods_for(source)]
    rows, results = [], {}
    for m in methods:
        t = time.perf_counter()
        res = _compute(m, data, tol)
        wall = time.perf_counter() - t if cfg.record_walltime else 0.0
        results[m] = res
        rows.append(_row(label, m, res.trace_value, res.max_residual, steps, wall))
        if cfg.gauge_checks:
            t = time.perf_counter()
            runner = gauge_runner(_PHASE_METHOD[m], rho=data.rho, U=data.unitary, rho0=data.rho0, tol=tol)
            dev = phase_gauge_check(runner, cfg.gauge_checks, cfg.seed)
            wall = time.perf_counter() - t if cfg.record_walltime else 0.0
            rows.append(_row(label, f"gauge:{m}", np.exp(1j * dev), dev, steps, wall))
    if len(methods) > 1:
        for i, a in enumerate(methods):
            for b in methods[i + 1:]:
                ta, tb = results[a].trace_value, results[b].trace_value
                rel = ta * np.conj(tb)
                rel = rel / abs(rel) if abs(rel) > 0 else 1.0
                res = max(results[a].max_residual, results[b].max_residual)
                rows.append(_row(label, f"delta:{b}-{a}", np.conj(rel), res, steps, 0.0))
    return rows


def _label(name: str, param: str, value: float) -> str:
    return f"{name}[{param}={format(float(value), '.12g')}]"


def run(cfg: RunConfig) -> list:
    """Rows for every scenario, sweep point and method, in config order."""
    jobs = []
    for src in cfg.sources:
        if cfg.sweep is None:
            jobs.append((src.name, src, {}))
        else:
            for v in cfg.sweep.values:
                jobs.append((_label(src.name, cfg.sweep.param, v), src, {cfg.sweep.param: float(v)}))
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        chunks = [_job(cfg, *j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda j: _job(cfg, *j), jobs))
    return [r for c in chunks for r in c]
