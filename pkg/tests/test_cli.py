import json
import os
import subprocess
import sys

import pytest

from holonomy.cli import main
from holonomy.report import CSV_COLUMNS, read_csv


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def run_cli(*args, env=None):
    full = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "holonomy", *args], capture_output=True, text=True, env=full)


EASY = {"scenario": ["easy", "constant"], "steps": 400, "output": {"format": "csv"}}


def test_compute_csv(tmp_path, capsys):
    assert main(["compute", write(tmp_path, EASY)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)
    rows = read_csv(out)
    assert {r.scenario for r in rows} == {"easy", "constant"}
    assert all(r.steps == 400 for r in rows)


def test_compute_is_byte_stable_across_thread_counts(tmp_path):
    cfg = write(tmp_path, EASY)
    a = run_cli("compute", cfg, env={"HOLONOMY_THREADS": "1"})
    b = run_cli("compute", cfg, env={"HOLONOMY_THREADS": "4"})
    c = run_cli("compute", cfg, env={"HOLONOMY_THREADS": "4"})
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout == c.stdout


def test_format_and_output_overrides(tmp_path, capsys):
    target = tmp_path / "rows.jsonl"
    assert main(["compute", write(tmp_path, EASY), "--format", "json-lines", "--output", str(target)]) == 0
    lines = target.read_text().splitlines()
    assert json.loads(lines[0])["scenario"] == "easy"
    assert capsys.readouterr().out == ""


def test_degrees_only_for_text(tmp_path, capsys):
    cfg = write(tmp_path, {"scenario": "constant"})
    assert main(["compute", cfg, "--degrees"]) == 0
    assert "phase_deg" in capsys.readouterr().out
    assert main(["compute", cfg, "--degrees", "--format", "csv"]) == 1


def test_sweep(tmp_path, capsys):
    cfg = write(tmp_path, {"scenario": "slater_rotation", "steps": 200, "method": "uhlmann",
                           "output": {"format": "csv"}})
    assert main(["sweep", cfg, "--param", "r", "--range", "0.1:0.3:3"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [r.scenario for r in rows] == ["slater_rotation[r=0.1]", "slater_rotation[r=0.2]",
                                          "slater_rotation[r=0.3]"]
    assert main(["sweep", cfg, "--param", "steps", "--range", "1:2:2"]) == 1
    assert main(["sweep", cfg, "--param", "r", "--range", "0.5:1.0:2"]) == 2


def test_presets(capsys):
    assert main(["presets"]) == 0
    text = capsys.readouterr().out
    assert "trefoil  (default method: open)" in text
    assert main(["presets", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {p["name"] for p in doc} >= {"easy", "trefoil", "slater_triangle"}


@pytest.mark.parametrize("doc, code", [
    ("{not json", 1),
    ({"scenario": "trefoil", "method": "interferometric"}, 1),
    ({"scenario": {"type": "bloch", "x": "t", "y": 0, "z": 0, "interval": [0, 2]}}, 2),
    ({"scenario": "easy", "parameters": {"p1": 0.5}}, 2),
])
def test_exit_codes(tmp_path, doc, code, capsys):
    assert main(["compute", write(tmp_path, doc)]) == code
    assert capsys.readouterr().err.startswith("holonomy: ")


def test_usage_errors(tmp_path):
    assert main(["frobnicate"]) == 1
    assert main(["compute", str(tmp_path / "missing.json")]) == 1
    assert main(["verify-paper", "--tighten", "0"]) == 1
    assert main(["verify-paper", "--filter", "no-such-criterion"]) == 1


def test_bad_thread_count(tmp_path):
    r = run_cli("compute", write(tmp_path, EASY), env={"HOLONOMY_THREADS": "zero"})
    assert r.returncode == 1
    assert "HOLONOMY_THREADS" in r.stderr


def test_stdin_config():
    r = subprocess.run([sys.executable, "-m", "holonomy", "compute", "-"], input='{"scenario": "constant"}',
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[0].startswith("scenario")


def test_verify_paper_filter_and_tighten(capsys):
    assert main(["verify-paper", "--filter", "trefoil"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion 3 trefoil" in out
    assert "1/1 criteria passed" in out
    assert main(["verify-paper", "--filter", "trefoil", "--tighten", "100"]) == 3
    assert "[FAIL] criterion 3" in capsys.readouterr().out
