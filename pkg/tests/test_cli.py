from __future__ import annotations

import json
from pathlib import Path

import pytest

from lamegap.cli import main


def test_unknown_flag_exits_2(capsys):
    assert main(["aux", "verify", "--bogus"]) == 2


def test_help_exits_0():
    assert main(["--help"]) == 0


def test_aux_build_dump(tmp_path, capsys):
    out = tmp_path / "fam.json"
    code = main(
        ["aux", "build", "--dim", "3", "--alpha", "3", "--depth", "2", "--dump", str(out)]
    )
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["dim"] == 3 and obj["alpha"] == 3 and obj["depth"] == 2
    assert len(obj["levels"]) == 2
    # the level-2 normal component carries the u_13 seed coefficient terms
    rendered = obj["rendered"][1][2]
    assert "z" in rendered and "/d" in rendered


def test_aux_build_invalid_alpha(capsys):
    assert main(["aux", "build", "--dim", "2", "--alpha", "9", "--depth", "1"]) == 2


def test_aux_verify_small(tmp_path, capsys):
    out = tmp_path / "verify.json"
    code = main(
        [
            "aux", "verify", "--dim", "2", "--alpha", "1", "--depth", "2",
            "--json", str(out),
        ]
    )
    assert code == 0
    rows = json.loads(out.read_text())
    assert all(r["status"] == "pass" for r in rows)
    names = {r["name"] for r in rows}
    assert {"boundary", "cancel_identity", "residual_order", "z_degree", "lower_bound"} <= names
    text = capsys.readouterr().out
    assert "checks passed" in text


def test_fem_solve_cli(tmp_path, capsys):
    mesh_out = tmp_path / "mesh.txt"
    field_out = tmp_path / "field.csv"
    code = main(
        [
            "fem", "solve", "--eps", "0.1", "--problem", "component1",
            "--out", str(field_out), "--mesh-out", str(mesh_out), "--stride", "50",
        ]
    )
    assert code == 0
    header = field_out.read_text().splitlines()[0]
    assert header == "x,y,u1,u2,g11,g12,g21,g22"
    assert mesh_out.read_text().startswith("lamegap-mesh 1 ")


def test_study_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mesh.bogus = 3\n")
    assert main(["study", "constants", "--config", str(cfg)]) == 2


def test_study_and_report_roundtrip(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(
        "study.id = cli-test\n"
        "sweep.eps = 0.1, 0.05, 0.025, 0.0125\n"
    )
    out_json = tmp_path / "constants.json"
    out_csv = tmp_path / "constants.csv"
    code = main(
        [
            "study", "constants", "--config", str(cfg),
            "--json", str(out_json), "--out", str(out_csv), "--deterministic",
        ]
    )
    assert code == 0
    obj = json.loads(out_json.read_text())
    assert obj["passed"] is True
    assert obj["config"]["study_id"] == "cli-test"
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "study,quantity,eps,value,fit_slope,fit_r2,pass"

    code = main(["report", str(out_json), "--out", str(tmp_path / "summary.json")])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(row["passed"] for row in summary)


def test_study_idempotent_outputs(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("study.id = idem\nsweep.eps = 0.1, 0.05, 0.025, 0.0125\n")
    outs = []
    for k in (1, 2):
        path = tmp_path / f"r{k}.json"
        assert main(
            ["study", "constants", "--config", str(cfg), "--json", str(path),
             "--deterministic"]
        ) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_study_tolerance_failure_exits_1(tmp_path, capsys):
    cfg = tmp_path / "impossible.cfg"
    cfg.write_text(
        "study.id = impossible\n"
        "sweep.eps = 0.1, 0.05, 0.025, 0.0125\n"
        "study.tolerance.dc1_slope_lo = 0.99\n"  # dc1 slope ~ 0.5 cannot reach
        "study.tolerance.dc1_slope_hi = 1.0\n"
    )
    assert main(["study", "constants", "--config", str(cfg)]) == 1
    assert "FAIL" in capsys.readouterr().out
