import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from nullity_lab import cli, suites
from nullity_lab.gallery import make_example
from nullity_lab.specio import dump_spec

LINE_THROUGH_ORIGIN = {
    "name": "line", "domain": {"dim": 1, "center": [[1, 0]], "radius": 0.5},
    "components": [[{"coeff": [1, 0], "powers": [1]}], [{"coeff": [2, 0], "powers": [1]}], []],
    "conjugate_output": True,
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_cylinder(capsys):
    code, out, _ = run(capsys, "analyze", "--spec", "cylinder", "--grid", "5")
    rep = json.loads(out)
    assert code == 0
    assert rep["summary"]["nu_values"] == [1]
    assert all(r["nu"] == 1 for r in rep["records"])


def test_analyze_plane_is_totally_geodesic(capsys):
    code, out, _ = run(capsys, "analyze", "--spec", "plane", "--grid", "5")
    assert code == 0
    summary = json.loads(out)["summary"]
    assert summary["totally_geodesic"] and summary["position_tangent_count"] == summary["samples"]


def test_analyze_truncated_spec(capsys, tmp_path):
    path = tmp_path / "cut.json"
    text = dump_spec(make_example("cylinder"))
    path.write_text(text[:40])
    code, _, err = run(capsys, "analyze", "--spec", str(path))
    assert code == 2
    assert f"{path}:" in err and err.count(":") >= 3


def test_analyze_residual_failure_exits_one(capsys):
    code, out, _ = run(capsys, "analyze", "--spec", "cylinder", "--grid", "3", "--tol", "1e-20")
    assert code == 1
    assert json.loads(out)["summary"]["failures"] > 0


@pytest.mark.parametrize("argv", [["analyze", "--spec", "no_such_thing"], ["frobnicate"],
                                  ["analyze", "--spec", "cylinder", "--grid", "0"],
                                  ["analyze", "--spec", "cylinder", "--format", "csv"]])
def test_input_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_parametrize_cubic_grid(capsys):
    code, out, _ = run(capsys, "parametrize", "--spec", "cubic_curve", "--oracle", "exact")
    rep = json.loads(out)
    assert code == 0
    assert rep["summary"]["samples"] == 17 * 17 * 9
    assert rep["summary"]["regular_fraction"] >= 0.95
    assert rep["summary"]["nu_values"] == [1]


def test_parametrize_center_of_c_zero_slice(capsys):
    code, out, _ = run(capsys, "parametrize", "--spec", "cubic_curve", "--grid", "3")
    assert code == 0
    recs = json.loads(out)["records"]
    hit = [r for r in recs if r["w"] == [[1.0, 0.0]] and r["c"] == [[0.0, 0.0]]]
    assert len(hit) == 1
    np.testing.assert_allclose([complex(*z) for z in hit[0]["f"]], [4 / 3, 1 / 3, -2 / 3], atol=1e-14)
    assert set(hit[0]["residuals"]) == {"holo", "normal", "oracle", "sff_match", "roundtrip"}
    assert set(hit[0]["flags"]) == {"vertex_nonsingular", "L_in_N1perp"}


def test_parametrize_tangent_base_exits_one(capsys, tmp_path):
    path = tmp_path / "line.json"
    path.write_text(json.dumps(LINE_THROUGH_ORIGIN))
    code, _, err = run(capsys, "parametrize", "--spec", str(path), "--grid", "3")
    assert code == 1
    assert "PositionTangent" in err


def test_parametrize_csv(capsys):
    code, out, _ = run(capsys, "parametrize", "--spec", "cubic_curve", "--grid", "3",
                       "--oracle", "exact", "--format", "csv", "--fiber-grid", "2")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["w1_re", "w1_im", "c1_re", "c1_im", "f1_re", "f1_im", "f2_re", "f2_im",
                       "f3_re", "f3_im", "status", "nu"]
    assert len(rows) == 1 + 9 * 4
    assert all(r[-2] == "regular" and r[-1] == "1" for r in rows[1:])


def test_parametrize_ply(capsys, tmp_path):
    out_path = tmp_path / "slice.ply"
    code, _, _ = run(capsys, "parametrize", "--spec", "cubic_curve", "--grid", "4",
                     "--format", "ply", "--out", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == 0
    assert lines[0] == "ply" and "element vertex 16" in lines and "element face 9" in lines
    body = lines[lines.index("end_header") + 1:]
    assert len(body) == 16 + 9
    assert all(len(v.split()) == 3 + 6 for v in body[:16])


def test_verify_cone_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "verify", "cone", "--out", str(a))[0] == 0
    assert run(capsys, "verify", "cone", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    checks = json.loads(a.read_text())["suites"][0]["checks"]
    assert any(c["name"].startswith("nullity_shift") for c in checks)


def test_verify_identities_plane_residuals(capsys):
    code, out, _ = run(capsys, "verify", "identities")
    checks = {c["name"]: c for c in json.loads(out)["suites"][0]["checks"]}
    assert code == 0
    assert checks["structural[translated_plane]"]["value"] <= 1e-12


def test_verify_failure_prints_first_record(capsys, monkeypatch):
    def fake(name, seed=0, grid=17):
        return suites._suite(name, [suites.check("always_bad", 1.0, 0.0)])

    monkeypatch.setattr(suites, "run_suite", fake)
    code, _, err = run(capsys, "verify", "star")
    assert code == 1
    assert "first failure" in err and "always_bad" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nullity_lab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verify" in proc.stdout
