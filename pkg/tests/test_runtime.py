"""
Tests for serialization helpers and the ExperimentRuntime output directory
"""

import json
import math

import numpy as np
import pytest

from subweibull.bounds import BoundValue, Regime
from subweibull.runtime import ExperimentRuntime, dumps, format_cell, to_jsonable


class TestSerialization:
    """Test cases for JSON and CSV value rendering"""

    def test_non_finite_floats(self):
        assert to_jsonable([math.inf, -math.inf, math.nan]) == ["inf", "-inf", "nan"]

    def test_numpy_values(self):
        payload = to_jsonable({"a": np.float64(0.1), "b": np.int64(3), "c": np.array([1.0, 2.0]), "d": np.bool_(True)})
        assert payload == {"a": 0.1, "b": 3, "c": [1.0, 2.0], "d": True}
        assert type(payload["b"]) is int

    def test_enum_and_to_dict(self):
        value = BoundValue(2.0, 1.0, Regime.MIXED)
        assert to_jsonable(Regime.SUBGAUSSIAN) == "subgaussian_branch"
        assert to_jsonable(value)["regime"] == "mixed"

    def test_dumps_round_trips_repr(self):
        text = dumps({"x": 0.1 + 0.2})
        assert text.endswith("\n")
        assert json.loads(text)["x"] == 0.1 + 0.2

    def test_format_cell(self):
        assert format_cell(0.1) == "0.10000000000000001"
        assert format_cell(True) == "true"
        assert format_cell(None) == ""
        assert format_cell(math.inf) == "inf"
        assert format_cell(7) == "7"


class TestExperimentRuntime:
    """Test cases for output files and the run manifest"""

    def test_outputs_and_manifest(self, tmp_path):
        rt = ExperimentRuntime("bounds", str(tmp_path), seed=5, jobs=1)
        rt.set_config({"p": 4.0})
        rt.write_json("result.json", {"value": 4.0})
        rt.write_csv("rows.csv", [{"a": 1.0, "b": True}, {"a": 2.5, "c": "x"}])
        manifest_path = rt.finish(0)

        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        assert manifest["command"] == "bounds"
        assert manifest["seed"] == 5
        assert manifest["jobs"] == 1
        assert manifest["exit_code"] == 0
        assert manifest["config"] == {"p": 4.0}
        assert manifest["outputs"] == [str(tmp_path / "result.json"), str(tmp_path / "rows.csv")]
        assert manifest["wall_time"] >= 0.0
        assert manifest["peak_rss_mb"] > 0.0

    def test_csv_layout(self, tmp_path):
        rt = ExperimentRuntime("verify", str(tmp_path), seed=1, jobs=1)
        rt.write_csv("rows.csv", [{"a": 1.0, "b": True}, {"a": 2.5, "c": "x"}], header_comment="suite=gbo")
        lines = (tmp_path / "rows.csv").read_text(encoding="utf-8").splitlines()
        assert lines == ["# suite=gbo", "a,b,c", "1,true,", "2.5,,x"]

    def test_column(self, tmp_path):
        rt = ExperimentRuntime("sample", str(tmp_path), seed=1, jobs=1)
        rt.write_column("sample.csv", [0.5, 1.0 / 3.0], "law=Y")
        lines = (tmp_path / "sample.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "law=Y"
        assert float(lines[2]) == 1.0 / 3.0

    def test_data_files_are_byte_identical(self, tmp_path):
        """Test that only the manifest carries run-specific facts"""
        contents = []
        for name in ("first", "second"):
            rt = ExperimentRuntime("bounds", str(tmp_path / name), seed=2, jobs=1)
            rt.write_json("result.json", {"value": [0.1, math.inf]})
            rt.finish(0)
            contents.append((tmp_path / name / "result.json").read_bytes())
        assert contents[0] == contents[1]

    def test_failed_run_records_exit_code(self, tmp_path):
        rt = ExperimentRuntime("covapp", str(tmp_path), seed=3, jobs=2)
        manifest = json.loads(rt.finish(2).read_text(encoding="utf-8"))
        assert manifest["exit_code"] == 2
        assert manifest["outputs"] == []

    def test_default_directory(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        rt = ExperimentRuntime("orlicz", seed=None, jobs=1)
        assert rt.out_dir.is_dir()
        assert rt.path("result.json") == tmp_path.joinpath("runs", "orlicz", "result.json").relative_to(tmp_path)


@pytest.mark.parametrize("value,expected", [(0.5, "0.5"), (2.0, "2"), (1e-3, "0.001")])
def test_csv_float_precision(value, expected):
    assert format_cell(value) == expected
