from __future__ import annotations

import csv
import json
import re

import pytest

from polylike import cli
from polylike.reports import (
    DEFAULT_DEGREES,
    DEFAULT_K_GRID,
    DEFAULT_Y_GRID,
    SCHEMA_VERSION,
    ConfigError,
    RunConfig,
    cmd_analyze,
    cmd_bounds,
)
from polylike.search import cascade_parameters

from conftest import FEIGENBAUM_C, FIBONACCI_C


def _run(tmp_path, *args):
    return cli.main([*args, "--out-dir", str(tmp_path)])


def _load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def test_bounds_csv_shape_and_reference_row(tmp_path):
    code = _run(tmp_path, "bounds", "--format", "json,csv")
    assert code == 2  # one published constant is off at the stated tolerance
    rows = list(csv.DictReader(open(tmp_path / "bounds_table.csv")))
    assert len(rows) == len(DEFAULT_DEGREES) * len(DEFAULT_Y_GRID) + len(DEFAULT_K_GRID)
    hit = [r for r in rows if r["degree"] == "2" and float(r["y"] or "nan") == 0.625]
    assert len(hit) == 1 and float(hit[0]["K_star"]) == pytest.approx(1.19371, abs=1e-5)


def test_bounds_rerun_is_byte_identical(tmp_path):
    _run(tmp_path, "bounds", "--format", "json,csv")
    first_csv = (tmp_path / "bounds_table.csv").read_bytes()
    first = _load(tmp_path / "bounds.json")
    _run(tmp_path, "bounds", "--format", "json,csv")
    assert (tmp_path / "bounds_table.csv").read_bytes() == first_csv
    second = _load(tmp_path / "bounds.json")
    first.pop("metadata"), second.pop("metadata")
    assert first == second


def test_report_schema_and_tolerances(tmp_path):
    rep = cmd_bounds(RunConfig(out_dir=str(tmp_path)))
    doc = rep.canonical()
    assert doc["schema"] == SCHEMA_VERSION
    assert "metadata" not in doc and "metadata" in rep.as_dict()
    for row in doc["results"]["K_star"]:
        assert set(row["K_star"]) == {"value", "tol", "provenance"}
    failed = [c["name"] for c in doc["checks"] if not c["passed"]]
    assert failed == ["K_star(8, 2/3)"]


def test_custom_grid_row_count(tmp_path):
    _run(tmp_path, "bounds", "--format", "csv", "--degrees", "2,4", "--y-grid", "0.6,0.7,0.8", "--K-grid", "2")
    rows = list(csv.reader(open(tmp_path / "bounds_table.csv")))
    assert len(rows) - 1 == 2 * 3 + 1


def test_geometry_exit_zero_and_contents(tmp_path):
    assert _run(tmp_path, "geometry", "--format", "json,svg") == 0
    doc = _load(tmp_path / "geometry.json")
    assert doc["results"]["solve_D15"]["A=1.07"]["value"] == []
    r2 = doc["results"]["h_polynomial"]["second_derivative_roots"]["value"]
    assert r2 == pytest.approx([0.2000905878, 1.201269956], abs=1e-6)
    z = [e for e in doc["results"]["Z"] if e["K"] == 1.5 and e["theta"] == 0.001][0]
    assert z["distance_to_K2"]["value"] < 1e-2
    assert (tmp_path / "geometry_spiral.svg").exists()


def test_search_superstable(tmp_path):
    assert _run(tmp_path, "search", "--param-query", "superstable:3") == 0
    doc = _load(tmp_path / "search.json")
    assert doc["results"]["c1"]["value"] == pytest.approx(-1.7548776662466927)


def test_analyze_escaping(tmp_path):
    rep = cmd_analyze(RunConfig(c1=0.5, out_dir=str(tmp_path)))
    assert rep.results["classification"] == "escaping"


def test_analyze_cascade_periods(tmp_path):
    c = cascade_parameters(2, 6)[-1]
    rep = cmd_analyze(RunConfig(c1=c, max_period=32, out_dir=str(tmp_path)))
    assert rep.results["periods"] == [2, 4, 8, 16, 32]
    assert rep.passed


def test_analyze_fibonacci(tmp_path):
    assert _run(tmp_path, "analyze", "--param-query", "fibonacci:8") == 0
    doc = _load(tmp_path / "analyze.json")
    assert doc["results"]["closest_returns"] == [1, 2, 3, 5, 8, 13, 21, 34]
    assert doc["results"]["fibonacci"] is True


def test_construct_doubling_and_svg_trace(tmp_path):
    code = _run(tmp_path, "construct", "--c1", repr(FEIGENBAUM_C), "--levels", "1", "--theta", "0.05",
                "--variant", "doubling_13", "--format", "json,svg,csv", "--max-period", "8")
    assert code == 0
    doc = _load(tmp_path / "construct.json")
    lv = doc["results"]["levels"][0]
    assert lv["contained"] is True and lv["theta"] == 0.05
    svg = (tmp_path / "construct_level1.svg").read_text()
    m = re.search(r'data-lo="([^"]+)" data-hi="([^"]+)"><title>central trace', svg)
    assert m is not None
    assert [float(m.group(1)), float(m.group(2))] == lv["central_trace"]


def test_construct_escaping_has_error_and_no_svg(tmp_path):
    assert _run(tmp_path, "construct", "--c1", "0.5", "--format", "json,svg") == 1
    doc = _load(tmp_path / "construct.json")
    assert doc["errors"] and not list(tmp_path.glob("*.svg"))


def test_construct_records_per_level_failure(tmp_path):
    # level 9 does not exist below period 8; the run still completes
    code = _run(tmp_path, "construct", "--c1", repr(FEIGENBAUM_C), "--levels", "0,9", "--max-period", "8")
    doc = _load(tmp_path / "construct.json")
    assert code == 2
    assert [e["level"] for e in doc["results"]["levels"]] == [0, 9]
    assert "error" in doc["results"]["levels"][1]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"c1": 0.5, "degree": 2, "formats": ["json"]}))
    out = tmp_path / "out"
    assert cli.main(["analyze", "--config", str(cfg), "--c1", "-1.0", "--out-dir", str(out)]) == 0
    doc = _load(out / "analyze.json")
    assert doc["config"]["c1"] == -1.0
    assert doc["results"]["classification"] == "renormalizable"


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYLIKE_OUT_DIR", str(tmp_path / "env"))
    assert cli.main(["search", "--param-query", "superstable:2"]) == 0
    assert (tmp_path / "env" / "search.json").exists()


def test_bad_config_exit_one(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert cli.main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["bounds", "--config", str(tmp_path / "missing.json")]) == 1
    assert _run(tmp_path, "analyze", "--degree", "3", "--c1", "-1") == 1
    assert _run(tmp_path, "search") == 1


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig(tol=0.0)
    with pytest.raises(ConfigError):
        RunConfig(thetas=(2.0,))
    with pytest.raises(ConfigError):
        RunConfig(formats=("pdf",))
    with pytest.raises(ConfigError):
        RunConfig().family()
    assert RunConfig(c1=FIBONACCI_C[2]).family().critical_value == FIBONACCI_C[2]
