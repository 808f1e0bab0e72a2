"""JSON run configuration: parsing, validation and defaults.

A config is one JSON object::

    {
      "scenario": "trefoil" | {...inline...} | [ ...several... ],
      "parameters": {"steps": 4000},          # preset overrides
      "method": "uhlmann" | "interferometric" | "open" | "all",
      "steps": 4000,
      "tolerances": {"lift_proj_tol": 1e-7},
      "output": {"path": "-", "format": "text" | "csv" | "json-lines"},
      "seed": 0,
      "gauge_checks": 0,
      "record_walltime": false,            # true fills walltime_s (output no longer byte-stable)
      "degrees": false,
      "sweep": {"param": "r", "range": "0.1:0.9:9"}
    }

Inline scenarios are either a Bloch curve::

    {"type": "bloch", "x": "cos(t)/2", "y": "sin(t)/4", "z": "sin(t/2)^2/2",
     "interval": [0, "2*pi"], "name": "my_curve"}

or a qubit Hamiltonian H = hx sx + hy sy + hz sz acting on a Bloch state::

    {"type": "hamiltonian", "h": {"x": "1", "y": "0", "z": "cos(t)"},
     "rho0": {"bloch": [0, 0, 0.5]}, "interval": [0, "pi"],
     "parallel_transport": false}

A list entry may also name a preset: ``{"preset": "easy", "parameters": {...}}``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import ConfigError
from .expr import Expression, compile_expression
from .scenarios import PRESETS

__all__ = [
    "BlochSource",
    "HamiltonianSource",
    "METHODS",
    "OutputSpec",
    "PresetSource",
    "RunConfig",
    "SweepSpec",
    "parse_config",
    "parse_range",
]

METHODS = ("uhlmann", "interferometric", "open", "all")
FORMATS = ("text", "csv", "json-lines")
_TOP_KEYS = {"scenario", "parameters", "method", "steps", "tolerances", "output", "seed",
             "gauge_checks", "record_walltime", "degrees", "sweep", "name"}


@dataclass(frozen=True)
class PresetSource:
    preset: str
    parameters: MappingProxyType
    name: str

    @property
    def default_method(self) -> str:
        return PRESETS[self.preset].default_method

    @property
    def default_steps(self) -> int:
        return int(PRESETS[self.preset].defaults["steps"])

    @property
    def unitary_available(self) -> bool:
        return self.preset != "trefoil"


@dataclass(frozen=True)
class BlochSource:
    x: Expression
    y: Expression
    z: Expression
    t0: float
    t1: float
    name: str
    default_method = "open"
    default_steps = 2000
    unitary_available = False


@dataclass(frozen=True)
class HamiltonianSource:
    hx: Expression
    hy: Expression
    hz: Expression
    bloch0: tuple
    t0: float
    t1: float
    parallel_transport: bool
    name: str
    default_method = "all"
    default_steps = 2000
    unitary_available = True


@dataclass(frozen=True)
class OutputSpec:
    path: str = "-"
    format: str = "text"


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    count: int

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    sources: tuple
    method: str = "all"
    steps: int | None = None
    tolerances: Tolerances = DEFAULT_TOL
    output: OutputSpec = OutputSpec()
    seed: int = 0
    gauge_checks: int = 0
    record_walltime: bool = False
    degrees: bool = False
    sweep: SweepSpec | None = None
    method_explicit: bool = field(default=False, compare=False)

    def methods_for(self, source) -> tuple:
        m = self.method if self.method_explicit else source.default_method
        if m == "all":
            out = ["uhlmann"]
            if source.unitary_available:
                out.append("interferometric")
            out.append("open")
            return tuple(out)
        return (m,)

    def steps_for(self, source) -> int:
        if self.steps is not None:
            return self.steps
        if isinstance(source, PresetSource) and "steps" in source.parameters:
            return int(source.parameters["steps"])
        return source.default_steps

    def with_sweep(self, sweep: SweepSpec | None) -> "RunConfig":
        return dataclasses.replace(self, sweep=sweep)


def parse_range(text: str, field: str = "range") -> tuple:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError("range must look like a:b:n", field=field)
    try:
        a = float(compile_expression(parts[0], field)(0.0))
        b = float(compile_expression(parts[1], field)(0.0))
        n = int(parts[2])
    except ValueError:
        raise ConfigError("range must look like a:b:n with integer n", field=field) from None
    if n < 1:
        raise ConfigError("range count must be at least 1", field=field)
    return a, b, n


def _number(v, field: str) -> float:
    if isinstance(v, bool):
        raise ConfigError("expected a number", field=field)
    e = compile_expression(v, field)
    if not e.constant:
        raise ConfigError("expected a constant expression", field=field)
    out = float(e(0.0))
    if not np.isfinite(out):
        raise ConfigError("value must be finite", field=field)
    return out


def _int(v, field: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError("expected an integer", field=field)
    if v < minimum:
        raise ConfigError(f"must be at least {minimum}", field=field)
    return v


def _bool(v, field: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError("expected true or false", field=field)
    return v


def _reject_unknown(obj: dict, allowed: set, prefix: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s): {', '.join(extra)}", field=f"{prefix}{extra[0]}")


def _interval(obj: dict, prefix: str) -> tuple:
    iv = obj.get("interval", [0, 1])
    if not isinstance(iv, list) or len(iv) != 2:
        raise ConfigError("interval must be a two-element list", field=f"{prefix}interval")
    t0, t1 = _number(iv[0], f"{prefix}interval[0]"), _number(iv[1], f"{prefix}interval[1]")
    if not t1 > t0:
        raise ConfigError("interval end must exceed its start", field=f"{prefix}interval")
    return t0, t1


def _preset_params(preset: str, params, prefix: str) -> MappingProxyType:
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise ConfigError("parameters must be an object", field=f"{prefix}parameters")
    defaults = PRESETS[preset].defaults
    out = {}
    for k, v in params.items():
        f = f"{prefix}parameters.{k}"
        if k not in defaults:
            raise ConfigError(f"preset {preset!r} has no parameter {k!r}; "
                              f"known: {', '.join(defaults)}", field=f)
        d = defaults[k]
        if k == "steps":
            out[k] = _int(v, f, 1)
        elif isinstance(d, str):
            if not isinstance(v, str):
                raise ConfigError("expected a string", field=f)
            out[k] = v
        else:
            out[k] = _number(v, f)
    return MappingProxyType(out)


def _source(spec, params, idx: str, name_hint: str | None):
    prefix = f"scenario{idx}."
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ConfigError(f"unknown preset {spec!r}; known: {', '.join(sorted(PRESETS))}",
                              field=f"scenario{idx}")
        return PresetSource(spec, _preset_params(spec, params, ""), name_hint or spec)
    if not isinstance(spec, dict):
        raise ConfigError("scenario must be a preset name, an object or a list", field=f"scenario{idx}")
    if "preset" in spec:
        _reject_unknown(spec, {"preset", "parameters", "name"}, prefix)
        p = spec["preset"]
        if p not in PRESETS:
            raise ConfigError(f"unknown preset {p!r}", field=f"{prefix}preset")
        return PresetSource(p, _preset_params(p, spec.get("parameters"), prefix), spec.get("name", p))
    kind = spec.get("type")
    if kind == "bloch":
        _reject_unknown(spec, {"type", "x", "y", "z", "interval", "name"}, prefix)
        comps = [compile_expression(spec.get(c, 0), f"{prefix}{c}") for c in "xyz"]
        t0, t1 = _interval(spec, prefix)
        return BlochSource(*comps, t0, t1, spec.get("name", name_hint or "inline"))
    if kind == "hamiltonian":
        _reject_unknown(spec, {"type", "h", "rho0", "interval", "parallel_transport", "name"}, prefix)
        h = spec.get("h")
        if not isinstance(h, dict):
            raise ConfigError("h must be an object with x, y, z components", field=f"{prefix}h")
        _reject_unknown(h, {"x", "y", "z"}, f"{prefix}h.")
        comps = [compile_expression(h.get(c, 0), f"{prefix}h.{c}") for c in "xyz"]
        r0 = spec.get("rho0")
        if not isinstance(r0, dict) or set(r0) != {"bloch"}:
            raise ConfigError("rho0 must be {\"bloch\": [x, y, z]}", field=f"{prefix}rho0")
        b = r0["bloch"]
        if not isinstance(b, list) or len(b) != 3:
            raise ConfigError("bloch vector needs three components", field=f"{prefix}rho0.bloch")
        bv = tuple(_number(v, f"{prefix}rho0.bloch[{i}]") for i, v in enumerate(b))
        if np.linalg.norm(bv) >= 1:
            raise ConfigError("initial Bloch vector must lie inside the unit ball", field=f"{prefix}rho0.bloch")
        t0, t1 = _interval(spec, prefix)
        pt = _bool(spec.get("parallel_transport", False), f"{prefix}parallel_transport")
        return HamiltonianSource(*comps, bv, t0, t1, pt, spec.get("name", name_hint or "inline"))
    raise ConfigError("inline scenario type must be 'bloch' or 'hamiltonian'", field=f"{prefix}type")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"syntax error: {e.msg}", line=e.lineno, column=e.colno) from None
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object")
    _reject_unknown(obj, _TOP_KEYS, "")
    if "scenario" not in obj:
        raise ConfigError("missing required key", field="scenario")
    spec = obj["scenario"]
    params = obj.get("parameters")
    if isinstance(spec, list):
        if params is not None:
            raise ConfigError("put parameters inside each list entry", field="parameters")
        if not spec:
            raise ConfigError("scenario list is empty", field="scenario")
        sources = tuple(_source(s, None, f"[{i}]", None) for i, s in enumerate(spec))
    else:
        if params is not None and not isinstance(spec, str):
            raise ConfigError("top-level parameters apply to preset names only", field="parameters")
        sources = (_source(spec, params, "", obj.get("name")),)

    method = obj.get("method", "all")
    if method not in METHODS:
        raise ConfigError(f"must be one of {', '.join(METHODS)}", field="method")
    explicit = "method" in obj
    if explicit and method == "interferometric":
        for s in sources:
            if not s.unitary_available:
                raise ConfigError(
                    f"method 'interferometric' needs a unitary evolution, but scenario {s.name!r} "
                    "is a bare density-operator curve", field="method")

    steps = obj.get("steps")
    if steps is not None:
        steps = _int(steps, "steps", 1)

    tol_obj = obj.get("tolerances", {})
    if not isinstance(tol_obj, dict):
        raise ConfigError("tolerances must be an object", field="tolerances")
    try:
        tol = DEFAULT_TOL.replace(**{k: _number(v, f"tolerances.{k}") for k, v in tol_obj.items()})
    except KeyError as e:
        name = sorted(set(tol_obj) - {f.name for f in dataclasses.fields(Tolerances)})[0]
        raise ConfigError(f"unknown tolerance {name!r}", field=f"tolerances.{name}") from e
    for f in dataclasses.fields(tol):
        if not getattr(tol, f.name) > 0:
            raise ConfigError("tolerances must be positive", field=f"tolerances.{f.name}")

    out_obj = obj.get("output", {})
    if not isinstance(out_obj, dict):
        raise ConfigError("output must be an object", field="output")
    _reject_unknown(out_obj, {"path", "format"}, "output.")
    fmt = out_obj.get("format", "text")
    if fmt not in FORMATS:
        raise ConfigError(f"must be one of {', '.join(FORMATS)}", field="output.format")
    path = out_obj.get("path", "-")
    if not isinstance(path, str) or not path:
        raise ConfigError("expected a non-empty string", field="output.path")

    sweep = None
    if "sweep" in obj:
        sw = obj["sweep"]
        if not isinstance(sw, dict):
            raise ConfigError("sweep must be an object", field="sweep")
        _reject_unknown(sw, {"param", "range"}, "sweep.")
        if "param" not in sw or "range" not in sw:
            raise ConfigError("sweep needs param and range", field="sweep")
        a, b, n = parse_range(sw["range"], "sweep.range")
        sweep = SweepSpec(str(sw["param"]), a, b, n)

    cfg = RunConfig(
        sources=sources,
        method=method,
        steps=steps,
        tolerances=tol,
        output=OutputSpec(path, fmt),
        seed=_int(obj.get("seed", 0), "seed"),
        gauge_checks=_int(obj.get("gauge_checks", 0), "gauge_checks"),
        record_walltime=_bool(obj.get("record_walltime", False), "record_walltime"),
        degrees=_bool(obj.get("degrees", False), "degrees"),
        sweep=sweep,
        method_explicit=explicit,
    )
    if sweep is not None:
        validate_sweep(cfg, sweep)
    return cfg


def validate_sweep(cfg: RunConfig, sweep: SweepSpec) -> None:
    for s in cfg.sources:
        if not isinstance(s, PresetSource):
            raise ConfigError("sweeps apply to preset scenarios only", field="sweep.param")
        defaults = PRESETS[s.preset].defaults
        if sweep.param not in defaults or isinstance(defaults[sweep.param], str):
            raise ConfigError(f"preset {s.preset!r} has no numeric parameter {sweep.param!r}",
                              field="sweep.param")
        if sweep.param == "steps":
            raise ConfigError("steps cannot be swept", field="sweep.param")
