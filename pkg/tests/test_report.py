import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holonomy.report import CSV_COLUMNS, OutputError, ReportRow, emit, read_csv, render

ROW = ReportRow("easy", "open", -np.pi / 2, 1e-17, -0.6, 0.6, 3.5e-13, 2000, 0.0)


def test_csv_single_row():
    text = render([ROW], "csv")
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "easy,open,-1.5707963267948966,1.0000000000000001e-17,-0.59999999999999998,"\
        "0.59999999999999998,3.5000000000000002e-13,2000,0"


def test_csv_empty_is_header_only():
    assert render([], "csv") == ",".join(CSV_COLUMNS) + "\n"


def test_csv_quotes_labels_with_commas():
    row = ReportRow("a,b", "open", 0.0, 1.0, 0.0, 1.0, 0.0, 1, 0.0)
    assert read_csv(render([row], "csv")) == [row]


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.floats(-3.14159, np.pi), finite, finite, st.floats(0, 10), st.integers(1, 10**6))
def test_csv_round_trip(phase, re, im, res, steps):
    row = ReportRow("s", "uhlmann", phase, re, im, abs(complex(re, im)), res, steps, 0.0)
    assert read_csv(render([row], "csv")) == [row]


def test_json_lines():
    out = render([ROW, ROW], "json-lines").splitlines()
    assert len(out) == 2
    assert json.loads(out[0])["phase_rad"] == ROW.phase_rad
    assert list(json.loads(out[0])) == list(CSV_COLUMNS)


def test_text_degrees():
    assert "-90.0000000000" in render([ROW], "text", degrees=True)
    assert "phase_rad" in render([ROW], "text").splitlines()[0]


def test_row_validation():
    with pytest.raises(ValueError):
        ReportRow("s", "m", 4.0, 0, 0, 0, 0, 1, 0)
    with pytest.raises(ValueError):
        ReportRow("s", "m", 0.0, 0, 0, 0, -1, 1, 0)
    with pytest.raises(ValueError):
        render([ROW], "yaml")
    with pytest.raises(ValueError):
        read_csv("a,b\n")


def test_emit_to_file(tmp_path):
    p = tmp_path / "out.csv"
    emit([ROW], "csv", str(p))
    assert read_csv(p.read_text()) == [ROW]
    with pytest.raises(OutputError):
        emit([ROW], "csv", str(tmp_path / "missing" / "x.csv"))
