import json

import numpy as np
import pytest

from holonomy.errors import ConfigError
from holonomy.runconfig import (
    BlochSource,
    HamiltonianSource,
    PresetSource,
    SweepSpec,
    parse_config,
    parse_range,
    validate_sweep,
)
from holonomy.runner import build_source, run, worker_count
from holonomy.scenarios import scenario_trefoil


def cfg(obj):
    return parse_config(json.dumps(obj))


INLINE_TREFOIL = {"type": "bloch", "x": "cos(t)/2", "y": "sin(t)/4", "z": "sin(t/2)^2/2",
                  "interval": [0, "2*pi"], "name": "inline_trefoil"}


def test_preset_defaults():
    c = cfg({"scenario": "trefoil"})
    (src,) = c.sources
    assert isinstance(src, PresetSource)
    assert c.steps_for(src) == 4000
    assert c.methods_for(src) == ("open",)
    assert c.output.format == "text" and c.output.path == "-"
    assert not c.record_walltime


def test_method_all_skips_interferometric_without_unitary():
    c = cfg({"scenario": ["trefoil", "easy"], "method": "all"})
    assert c.methods_for(c.sources[0]) == ("uhlmann", "open")
    assert c.methods_for(c.sources[1]) == ("uhlmann", "interferometric", "open")


def test_inline_trefoil_matches_preset():
    c = cfg({"scenario": INLINE_TREFOIL, "steps": 1000})
    (src,) = c.sources
    assert isinstance(src, BlochSource) and src.name == "inline_trefoil"
    assert src.t1 == pytest.approx(2 * np.pi)
    a = build_source(src, 1000, c.tolerances)
    b = scenario_trefoil(1000).build()
    assert np.allclose(a.rho.mats, b.rho.mats, atol=1e-15)


def test_hamiltonian_source():
    c = cfg({"scenario": {"type": "hamiltonian", "h": {"x": "1", "y": 0, "z": "cos(t)"},
                          "rho0": {"bloch": [0, 0, 0.5]}, "interval": [0, "pi"]}, "steps": 100})
    (src,) = c.sources
    assert isinstance(src, HamiltonianSource)
    data = build_source(src, 100, c.tolerances)
    assert data.unitary.grid.steps == 100


def test_preset_parameters_and_tolerances():
    c = cfg({"scenario": "easy", "parameters": {"theta": "pi/2", "p1": 0.7},
             "tolerances": {"lift_proj_tol": 1e-8}})
    assert c.sources[0].parameters["theta"] == pytest.approx(np.pi / 2)
    assert c.tolerances.lift_proj_tol == 1e-8


@pytest.mark.parametrize("doc, field", [
    ({}, "scenario"),
    ({"scenario": "nope"}, "scenario"),
    ({"scenario": "easy", "method": "fast"}, "method"),
    ({"scenario": "trefoil", "method": "interferometric"}, "method"),
    ({"scenario": "easy", "parameters": {"r": 1}}, "parameters"),
    ({"scenario": "easy", "tolerances": {"bogus": 1}}, "tolerances.bogus"),
    ({"scenario": "easy", "tolerances": {"level_tol": -1}}, "tolerances.level_tol"),
    ({"scenario": "easy", "output": {"format": "xml"}}, "output.format"),
    ({"scenario": "easy", "steps": 0}, "steps"),
    ({"scenario": "easy", "colour": 1}, "colour"),
    ({"scenario": [], "method": "all"}, "scenario"),
    ({"scenario": {"type": "bloch", "x": "t", "y": 0, "z": 0, "interval": [1, 0]}}, "interval"),
    ({"scenario": {"type": "wave"}}, "type"),
    ({"scenario": "easy", "sweep": {"param": "steps", "range": "1:2:2"}}, "sweep.param"),
])
def test_config_errors_name_the_field(doc, field):
    with pytest.raises(ConfigError) as info:
        cfg(doc)
    assert field in str(info.value)


def test_syntax_error_reports_position():
    with pytest.raises(ConfigError, match="line 2, column"):
        parse_config('{"scenario":\n  "easy",,}')


def test_parse_range():
    assert parse_range("0.1:0.9:5") == (0.1, 0.9, 5)
    assert parse_range("0:pi:3")[1] == pytest.approx(np.pi)
    for bad in ("1:2", "1:2:x", "1:2:0", "a:b:c"):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_sweep_validation():
    c = cfg({"scenario": "slater_rotation"})
    validate_sweep(c, SweepSpec("r", 0.1, 0.9, 3))
    with pytest.raises(ConfigError):
        validate_sweep(c, SweepSpec("theta", 0.1, 0.9, 3))
    with pytest.raises(ConfigError):
        validate_sweep(cfg({"scenario": "pt_circle"}), SweepSpec("path", 0, 1, 2))
    with pytest.raises(ConfigError, match="preset"):
        validate_sweep(cfg({"scenario": INLINE_TREFOIL}), SweepSpec("r", 0, 1, 2))


def test_run_rows_and_sweep_labels():
    c = cfg({"scenario": "slater_rotation", "steps": 200, "sweep": {"param": "r", "range": "0.2:0.4:2"}})
    rows = run(c)
    assert [r.scenario for r in rows[:1]] == ["slater_rotation[r=0.2]"]
    methods = [r.method for r in rows if r.scenario == "slater_rotation[r=0.4]"]
    assert methods == ["uhlmann", "interferometric", "open", "delta:interferometric-uhlmann",
                       "delta:open-uhlmann", "delta:open-interferometric"]
    assert all(r.walltime_s == 0 for r in rows)


def test_gauge_rows():
    rows = run(cfg({"scenario": "easy", "steps": 300, "method": "open", "gauge_checks": 2}))
    assert [r.method for r in rows] == ["open", "gauge:open"]
    assert rows[1].max_residual <= 1e-5


def test_worker_count(monkeypatch):
    monkeypatch.setenv("HOLONOMY_THREADS", "3")
    assert worker_count() == 3
    for bad in ("0", "x", "-2"):
        monkeypatch.setenv("HOLONOMY_THREADS", bad)
        with pytest.raises(ConfigError):
            worker_count()
    monkeypatch.delenv("HOLONOMY_THREADS")
    assert worker_count() >= 1
