import json
import math

import pytest

from levisqueeze.cli import main

DETUNED = {
    "model": "eliminated-detuned",
    "omega_x": 1.0,
    "kappa": 0.2,
    "delta": 5.0,
    "lam": 0.3,
    "q_m": 1e9,
    "nbar": 2e7,
}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_evolve_mechanical_header_and_sidecar(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "t_end": 20.0})
    assert main(["evolve", "--config", cfg, "--out", "traj.csv"]) == 0
    header, rows = read_rows(tmp_path / "traj.csv")
    assert header == ["t", "Vxx", "Vxp", "Vpp", "v_sq", "v_asq", "eta"]
    assert float(rows[0][0]) == 0.0
    assert float(rows[-1][0]) == pytest.approx(20.0)
    assert (tmp_path / "traj.sidecar.json").exists()


def test_evolve_full_model_adds_cavity_columns(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "model": "full", "t_end": 5.0})
    assert main(["evolve", "--config", cfg, "--out", "traj.csv"]) == 0
    header, rows = read_rows(tmp_path / "traj.csv")
    assert header == ["t", "Vxx", "Vxp", "Vpp", "v_sq", "v_asq", "eta", "VXX", "VXY", "VYY"]
    assert float(rows[0][7]) == pytest.approx(1.0)  # cavity starts in vacuum


def test_evolve_uncoupled_oscillator_keeps_its_variance(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(
        tmp_path,
        "run.json",
        {**DETUNED, "lam": 0.0, "nbar": 0.0, "nbar0": 2.0, "t_end": 50.0},
    )
    assert main(["evolve", "--config", cfg, "--out", "flat.csv"]) == 0
    _, rows = read_rows(tmp_path / "flat.csv")
    v_sq = [float(r[4]) for r in rows]
    assert all(abs(v - 5.0) < 1e-6 for v in v_sq)


def test_sidecar_reproduces_the_run_bit_for_bit(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "t_end": 10.0})
    assert main(["evolve", "--config", cfg, "--out", "first.csv"]) == 0
    first = (tmp_path / "first.csv").read_bytes()
    assert main(["evolve", "--config", str(tmp_path / "first.sidecar.json")]) == 0
    assert (tmp_path / "first.csv").read_bytes() == first


def test_evolve_step_is_converged(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    base = {**DETUNED, "t_end": 30.0}
    main(["evolve", "--config", write_config(tmp_path, "a.json", base), "--out", "a.csv"])
    main(
        [
            "evolve",
            "--config",
            write_config(tmp_path, "b.json", {**base, "dt": 0.0025}),
            "--out",
            "b.csv",
        ]
    )
    _, rows_a = read_rows(tmp_path / "a.csv")
    _, rows_b = read_rows(tmp_path / "b.csv")
    assert abs(float(rows_a[-1][4]) - float(rows_b[-1][4])) < 1e-6


def test_threshold_reports_critical_coupling(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "run.json", {**DETUNED, "bracket_lo": 1.0, "bracket_hi": 2.0}
    )
    assert main(["threshold", "--config", cfg]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["axis"] == "lam"
    assert payload["critical_value"] == pytest.approx(1.5824032355881985, abs=1e-4)


def test_stability_report(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", DETUNED)
    assert main(["stability", "--config", cfg]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["stable"] is True
    assert payload["max_real_part"] < 0.0
    assert len(payload["eigenvalues"]) == 2


def test_steady_on_unstable_model_fails_numerically(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "lam": 1.7})
    assert main(["steady", "--config", cfg]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "mass": 1e-18})
    assert main(["stability", "--config", cfg]) == 2
    assert "error:" in capsys.readouterr().err


def test_malformed_config_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["stability", "--config", str(path)]) == 2


def test_missing_config_file(tmp_path):
    assert main(["stability", "--config", str(tmp_path / "absent.json")]) == 2


def test_missing_model_key(tmp_path, capsys):
    cfg = write_config(tmp_path, "run.json", {"omega_x": 1.0, "t_end": 1.0})
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    assert "model" in capsys.readouterr().err


def test_set_overrides_config(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "run.json", {**DETUNED, "bracket_lo": 1.0, "bracket_hi": 2.0}
    )
    assert main(["threshold", "--config", cfg, "--set", "delta=6"]) == 0
    payload = json.loads(capsys.readouterr().out)
    expected = math.sqrt(1.0 * (0.2**2 + 6.0**2) / (2 * 6.0))
    assert payload["critical_value"] == pytest.approx(expected, abs=1e-4)


def test_set_without_config_file(capsys):
    args = ["stability"]
    for key, value in DETUNED.items():
        args += ["--set", f"{key}={value}"]
    assert main(args) == 0
    assert json.loads(capsys.readouterr().out)["stable"] is True


def test_mc_validate_small_ensemble(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        "run.json",
        {
            **DETUNED,
            "q_m": 1e4,
            "nbar": 10.0,
            "t_end": 10.0,
            "n_traj": 400,
            "seed": 0,
        },
    )
    assert main(["mc-validate", "--config", cfg]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["max_z"] < 5.0


def test_figure_command_writes_named_preset(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["figure", "fig3a", "--out", "fig3a.csv"]) == 0
    header, rows = read_rows(tmp_path / "fig3a.csv")
    assert header == ["alpha", "omega_eff", "omega_eff_bare_frame", "zeta_eff"]
    assert len(rows) == 101
    assert float(rows[0][0]) == 0.0


def test_figure_rejects_unknown_id(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["figure", "fig0"]) == 2
    assert "unknown figure id" in capsys.readouterr().err


def test_figure_requires_an_id(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["figure"]) == 2


def test_json_output_format(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(tmp_path, "run.json", {**DETUNED, "t_end": 5.0})
    assert main(["evolve", "--config", cfg, "--out", "traj.json", "--format", "json"]) == 0
    payload = json.loads((tmp_path / "traj.json").read_text())
    assert payload["columns"][:4] == ["t", "Vxx", "Vxp", "Vpp"]
    assert payload["rows"][0][0] == 0.0


def test_sweep_leaves_unstable_cells_empty(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write_config(
        tmp_path,
        "run.json",
        {
            **DETUNED,
            "q_m": 1e4,
            "nbar": 10.0,
            "axis": "lam",
            "axis_values": [0.5, 1.7],
            "evaluation": "steady",
        },
    )
    assert main(["sweep", "--config", cfg, "--out", "sweep.csv"]) == 0
    header, rows = read_rows(tmp_path / "sweep.csv")
    assert header[:2] == ["lam", "status"]
    assert rows[0][1] == "ok" and rows[0][2] != ""
    assert rows[1][1] == "unstable" and rows[1][2] == ""


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
