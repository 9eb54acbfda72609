"""Command-line driver: artifact layout, determinism, exit codes."""

import json

import pytest

from conforma.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--output-dir", str(tmp_path)])


def read_result(tmp_path):
    return json.loads((tmp_path / "result.json").read_text())


def test_validate_operator_command(tmp_path):
    rc = run(tmp_path, "validate-operator", "--n", "3", "--k", "2", "--samples", "120")
    assert rc == 0
    res = read_result(tmp_path)
    assert res["command"] == "validate-operator"
    assert res["pass"] is True
    assert res["result"]["checks"]["boundary_vanishing"]["pass"] is True
    assert (tmp_path / "manifest.json").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "validate-operator"
    assert manifest["timing_seconds"] >= 0.0


@pytest.mark.parametrize("family", ["fullspace", "halfspace", "ball"])
def test_verify_liouville_families(tmp_path, family):
    rc = run(tmp_path, "verify-liouville", "--family", family, "--n", "4", "--samples", "50")
    assert rc == 0
    assert read_result(tmp_path)["pass"] is True


def test_radial_shoot_csv_gating(tmp_path):
    args = ("radial-shoot", "--n", "3", "--k", "1", "--h", "1e-3", "--r-max", "0.5")
    rc = run(tmp_path / "a", *args)
    assert rc == 0
    assert not (tmp_path / "a" / "profile.csv").exists()
    rc = run(tmp_path / "b", *args, "--format", "csv")
    assert rc == 0
    prof = tmp_path / "b" / "profile.csv"
    assert prof.exists()
    assert prof.read_text().splitlines()[0] == "r,v,vp,vpp"


def test_moving_sphere_sweep(tmp_path):
    rc = run(
        tmp_path,
        "moving-sphere",
        "--task", "sweep",
        "--check-count", "256",
        "--lambda-steps", "64",
        "--center-count", "3",
        "--emit-sweep-csv",
    )
    assert rc == 0
    # sweep.csv is written regardless of --format when requested
    assert (tmp_path / "sweep.csv").exists()
    res = read_result(tmp_path)
    assert res["result"]["alpha"]["spread"] <= 1e-6


def test_moving_sphere_lemmas(tmp_path):
    rc = run(tmp_path, "moving-sphere", "--task", "lemmas", "--h-count", "10", "--density", "16")
    assert rc == 0
    checks = read_result(tmp_path)["result"]["checks"]
    assert checks["no_implication_failures"]["failures"] == 0
    reports = checks["gradient_bound_on_catalog"]["reports"]
    assert {r["field"] for r in reports} == {"bubble_beta1", "bubble_beta4", "constant"}
    assert all(r["conclusion_pass"] and not r["vacuous"] for r in reports)


def test_harnack_command(tmp_path):
    rc = run(tmp_path, "harnack", "--n", "3", "--samples", "512")
    assert rc == 0
    res = read_result(tmp_path)["result"]
    assert res["C_n"] == 165888
    assert res["report"]["P"] <= res["report"]["B"]
    assert res["report"]["rescaling_exactness"] <= 1e-10


def test_homogenize_command(tmp_path):
    rc = run(tmp_path, "homogenize", "--op", "sigma2", "--n", "3",
             "--samples", "60", "--triples", "100")
    assert rc == 0
    assert read_result(tmp_path)["pass"] is True


def test_solve_yamabe_artifacts(tmp_path):
    rc = run(
        tmp_path,
        "solve-yamabe", "--N", "32", "--t-steps", "3", "--format", "both",
    )
    assert rc == 0
    assert (tmp_path / "trace.jsonl").exists()
    assert (tmp_path / "grid.csv").exists()
    trace = [json.loads(line) for line in (tmp_path / "trace.jsonl").read_text().splitlines()]
    assert trace[0]["t"] == 0.0
    assert trace[-1]["t"] == 1.0
    res = read_result(tmp_path)
    assert res["result"]["status"] == "ok"
    assert res["result"]["constant_branch_deviation"] <= 1e-8


def test_solve_yamabe_trace_always_written(tmp_path):
    rc = run(tmp_path, "solve-yamabe", "--N", "16", "--t-steps", "2")
    assert rc == 0
    assert (tmp_path / "trace.jsonl").exists()
    assert not (tmp_path / "grid.csv").exists()


def test_conjugation_test_command(tmp_path):
    rc = run(
        tmp_path,
        "conjugation-test",
        "--word", "translate:0.1,0,-0.2;scale:1.3;invert",
        "--samples", "20",
    )
    assert rc == 0
    res = read_result(tmp_path)["result"]
    assert res["checks"]["eigenvalue_conjugation"]["value"] <= 1e-8


def test_failing_check_returns_one(tmp_path, capsys):
    # an fd stencil too coarse for the 1e-4 gate: reported, artifacts kept
    rc = run(
        tmp_path,
        "conjugation-test",
        "--mode", "fd",
        "--h", "0.05",
        "--word", "invert",
        "--samples", "10",
    )
    assert rc == 1
    assert "FAIL: conjugation-test" in capsys.readouterr().err
    res = read_result(tmp_path)
    assert res["pass"] is False


def test_domain_error_returns_two_and_writes_nothing(tmp_path, capsys):
    rc = run(tmp_path, "solve-yamabe", "--n", "4", "--k", "2", "--N", "16")
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    assert not (tmp_path / "result.json").exists()
    assert not (tmp_path / "manifest.json").exists()


def test_unknown_command_exits_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "frobnicate")
    assert exc.value.code == 2
    assert not (tmp_path / "result.json").exists()


def test_result_json_is_byte_stable(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        rc = run(out, "validate-operator", "--n", "3", "--k", "1",
                 "--samples", "80", "--seed", "7")
        assert rc == 0
    assert (a / "result.json").read_bytes() == (b / "result.json").read_bytes()
    rc = run(tmp_path / "c", "validate-operator", "--n", "3", "--k", "1",
             "--samples", "80", "--seed", "8")
    assert rc == 0
    assert (a / "result.json").read_bytes() != (tmp_path / "c" / "result.json").read_bytes()
