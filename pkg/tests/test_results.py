"""Test CSV and JSON result writing."""

import io
import json

import numpy as np
import pytest

from stgsvd.exceptions import ConfigError
from stgsvd.results import emit_results, format_cell, render_csv, render_json

COLUMNS = ("name", "value", "flag")


@pytest.mark.parametrize(
    "value, text",
    [
        (0.1, "0.10000000000000001"),
        (np.float64(2.5), "2.5"),
        (np.int64(3), "3"),
        (True, "true"),
        (np.bool_(False), "false"),
        (None, ""),
        (float("nan"), ""),
        ("decay", "decay"),
    ],
)
def test_format_cell(value, text):
    """Test cell rendering for each value type."""
    assert format_cell(value) == text


def test_render_csv_keeps_column_order():
    """Test the header order and missing cells."""
    text = render_csv([{"flag": True, "name": "a", "value": 1.0}, {"name": "b"}], COLUMNS)
    assert text.splitlines() == ["name,value,flag", "a,1,true", "b,,"]


def test_render_json_document():
    """Test the JSON layout and null for non-finite values."""
    rows = [{"name": "a", "value": np.float64("nan"), "flag": np.bool_(True)}]
    document = json.loads(render_json(rows, COLUMNS, metadata={"seed": np.int64(4)}))
    assert document["schema"] == "stgsvd.results/1"
    assert document["columns"] == list(COLUMNS)
    assert document["metadata"] == {"seed": 4}
    assert document["rows"] == [{"name": "a", "value": None, "flag": True}]


def test_json_floats_round_trip():
    """Test floats are written in shortest round-trip form."""
    value = 1.0 / 3.0
    document = json.loads(render_json([{"value": value}], ("value",)))
    assert document["rows"][0]["value"] == value


def test_emit_to_stream():
    """Test rows go to the given stream when no path is set."""
    stream = io.StringIO()
    emit_results([{"name": "a"}], COLUMNS, "csv", stream=stream)
    assert stream.getvalue().startswith("name,value,flag\n")


def test_emit_to_file(tmp_path):
    """Test rows are written to a file."""
    path = tmp_path / "out.json"
    emit_results([{"name": "a", "value": 1.5}], COLUMNS, "json", path=path)
    assert json.loads(path.read_text())["rows"][0]["value"] == 1.5


def test_empty_rows_write_nothing(tmp_path):
    """Test empty results raise ConfigError and create no file."""
    path = tmp_path / "empty.csv"
    with pytest.raises(ConfigError):
        emit_results([], COLUMNS, "csv", path=path)
    assert not path.exists()


def test_unknown_format(tmp_path):
    """Test an unsupported format raises ConfigError."""
    path = tmp_path / "out.xml"
    with pytest.raises(ConfigError):
        emit_results([{"name": "a"}], COLUMNS, "xml", path=path)
    assert not path.exists()
