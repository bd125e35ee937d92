import csv
import json
import math
import subprocess
import sys

import pytest

from dqlab import cli
from dqlab.errors import ValidationError
from dqlab.report import emit_report, render_csv


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def run(tmp_path, command, doc, *extra, out="out", fmt="json"):
    cfg = write_config(tmp_path, doc)
    target = tmp_path / f"{out}.{fmt}"
    fmt_args = ["--format", fmt] if "format" not in doc else []
    code = cli.main([command, "--config", cfg, "--out", str(target), *fmt_args, *extra])
    return code, target


def test_rabi_csv_matches_closed_form(tmp_path):
    code, out = run(tmp_path, "rabi", {"params": {"n_points": 101, "t_max": 4 * math.pi}}, fmt="csv")
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 101
    for row in rows:
        t = float(row["t"])
        assert float(row["pop_beta0"]) == pytest.approx(math.sin(t / 2) ** 2, abs=1e-10)
        assert float(row["pop_beta0_ode"]) == pytest.approx(math.sin(t / 2) ** 2, abs=1e-8)
    assert (tmp_path / "out.csv.meta.json").exists()


def test_rabi_dipole_coupling(tmp_path):
    code, out = run(tmp_path, "rabi", {"params": {"n_points": 11, "coupling": "dipole"}})
    assert code == 0
    for row in json.loads(out.read_text())["table"]:
        assert row["pop_beta0_ode"] == pytest.approx(row["pop_beta0"], abs=1e-8)


def test_hadamard_report(tmp_path):
    code, out = run(tmp_path, "hadamard", {"params": {"omega_ratio": 97}})
    doc = json.loads(out.read_text())
    assert code == 0
    assert len(doc["table"]) == 16
    assert doc["meta"]["phase_distance_to_ideal"] < 1e-10
    assert doc["meta"]["naive_phase_distance_to_ideal"] > 0.1


def test_expand_report(tmp_path):
    code, out = run(tmp_path, "expand", {"params": {"theta": 0.5}})
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["meta"]["residual_order2_slope"] == pytest.approx(3.0, abs=0.2)
    assert doc["meta"]["comparison"]["order1"]["mismatches"] == []
    assert set(doc["meta"]["coefficients"][0][0][0]) == {"re", "im"}


def test_fidelity_sweep_zero_field(tmp_path):
    code, out = run(tmp_path, "fidelity-sweep", {"params": {"r_values": [0.0]}})
    doc = json.loads(out.read_text())
    assert code == 0
    assert len(doc["table"]) == 1
    assert doc["table"][0]["fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_fidelity_sweep_fit(tmp_path):
    params = {"r_values": [1e-3, 3e-3, 1e-2], "thetas": [0.0, math.pi / 2], "mc_samples": 2000}
    code, out = run(tmp_path, "fidelity-sweep", {"params": params})
    meta = json.loads(out.read_text())["meta"]
    assert code == 0
    assert all(abs(f["rel_diff"]) < 5e-3 for f in meta["fits"])
    assert meta["c2_fit_theta_spread"] < 5e-3


def test_cz_report(tmp_path):
    code, out = run(tmp_path, "cz", {"params": {"omega_prime": 1.0}})
    meta = json.loads(out.read_text())["meta"]
    assert code == 0
    assert meta["t_star"] == pytest.approx(math.pi / 4, abs=1e-12)
    assert meta["phase"]["re"] == pytest.approx(-1.0, abs=1e-10)
    assert meta["phase"]["im"] == pytest.approx(0.0, abs=1e-10)


def test_dephase_report(tmp_path):
    params = {"n_traj": 20_000, "state": "psi1", "n_points": 3}
    code, out = run(tmp_path, "dephase", {"params": params, "seed": 5})
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["seed"] == 5
    for row in doc["table"]:
        assert abs(row["mc_re"] - row["analytic"]) <= 4 * row["mc_stderr"] + 1e-12
    assert doc["meta"]["level_stats_final_mc"]["ge"] == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("command", sorted(cli.RUNNERS))
def test_byte_identical_reruns(tmp_path, command):
    doc = {"params": {"n_traj": 5000, "workers": 1}} if command == "dephase" else {}
    if command == "fidelity-sweep":
        doc = {"params": {"mc_samples": 3000}}
    outputs = []
    for k, workers in enumerate((1, 1, 3)):
        extra = ["--workers", str(workers)] if command in ("dephase", "fidelity-sweep") else []
        for fmt in ("csv", "json"):
            code, out = run(tmp_path, command, doc, *extra, out=f"run{k}", fmt=fmt)
            assert code == 0
        outputs.append((tmp_path / f"run{k}.csv").read_bytes() + (tmp_path / f"run{k}.json").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_malformed_json_reports_position(tmp_path, capsys):
    cfg = write_config(tmp_path, '{"params": {\n  "r": 0.1,,\n}}')
    assert cli.main(["hadamard", "--config", cfg, "--out", str(tmp_path / "x.json")]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


@pytest.mark.parametrize(
    "doc",
    [
        {"params": {"omega_ratio": 96, "typo": 1}},
        {"parameters": {}},
        {"params": {"r": "big"}},
        {"params": {"r": True}},
        {"command": "cz"},
        {"format": "xml"},
        {"seed": -1},
        {"params": {"theta": 10.0}},
    ],
)
def test_validation_errors_exit_2(tmp_path, doc):
    code, out = run(tmp_path, "hadamard", doc)
    assert code == 2
    assert not out.exists()


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        cli.parse_params("hadamard", {"r": float("nan")})


def test_workers_flag_rejected_for_serial_commands(tmp_path):
    code, _ = run(tmp_path, "cz", {}, "--workers", "2")
    assert code == 2


def test_write_failure_exit_3(tmp_path):
    cfg = write_config(tmp_path, {})
    assert cli.main(["cz", "--config", cfg, "--out", str(tmp_path / "missing" / "x.json")]) == 3


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["cz", "--config", str(tmp_path / "nope.json")]) == 2


def test_coarse_dephasing_grid_exit_2(tmp_path):
    code, _ = run(tmp_path, "dephase", {"params": {"t_max": 5.0, "n_steps": 10}})
    assert code == 2


def test_numerical_error_exit_3(tmp_path, monkeypatch):
    from dqlab.errors import NumericalError

    def boom(params, seed):
        raise NumericalError("Richardson tableau did not converge")

    monkeypatch.setitem(cli.RUNNERS, "expand", boom)
    code, _ = run(tmp_path, "expand", {})
    assert code == 3


def test_emit_report_contract(tmp_path):
    with pytest.raises(ValidationError):
        emit_report({"table": []}, "json", tmp_path / "x.json")
    with pytest.raises(ValidationError):
        emit_report({"table": [{"a": 1}]}, "xml", tmp_path / "x.xml")
    emit_report({"table": [{"z": 1 + 2j}], "meta": {}}, "json", tmp_path / "c.json")
    assert json.loads((tmp_path / "c.json").read_text())["table"][0]["z"] == {"re": 1.0, "im": 2.0}
    assert render_csv([{"x": 0.1, "n": 3}]) == "x,n\n0.10000000000000001,3\n"


def test_console_script_entry_point(tmp_path):
    cfg = write_config(tmp_path, {"params": {"r_values": [0.0]}})
    out = tmp_path / "f.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "dqlab.cli", "fidelity-sweep", "--config", cfg, "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("r,theta,fidelity,series_prediction\n")
