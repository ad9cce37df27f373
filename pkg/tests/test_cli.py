"""End-to-end coverage of the command-line interface."""

import filecmp
import json

import pytest

from hyperwave.cli import run

BASE = ["--mu", "-1", "--k", "1", "--c", "1", "--b", "-3"]


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_classify_reference_set(capsys):
    assert run(["classify", *BASE]) == 0
    payload = _json_out(capsys)
    assert payload["case"] == "CaseI"
    assert payload["kappa"] == pytest.approx(1.3228756555322954, rel=1e-14)
    assert payload["config"]["mu"] == -1.0


def test_classify_embeds_monodromy(capsys):
    assert run(["classify", "--mu", "0", "--k", "1", "--c", "-3", "--b", "-3"]) == 0
    payload = _json_out(capsys)
    assert payload["case"] == "CaseIII"
    assert payload["monodromy_lambda"] == pytest.approx(535.4916555247646,
                                                        rel=1e-10)


def test_solve_validate_roundtrip(tmp_path, capsys):
    csv = tmp_path / "run.csv"
    summary = tmp_path / "run.json"
    code = run(["solve", *BASE, "--a-max", "20", "--out", str(csv),
                "--summary", str(summary)])
    assert code == 0
    info = json.loads(summary.read_text())
    assert info["reason"] == "ReachedEnd"
    assert info["a_end"] == pytest.approx(20.0, rel=1e-12)
    assert info["sigma_identity_residual"] < 1e-10
    capsys.readouterr()

    assert run(["validate", "--in", str(csv), "--summary-in", str(summary)]) == 0
    status = _json_out(capsys)
    assert status["status"] == "ok"
    assert status["kind"] == "profile"
    # one CSV row per knot, one step between consecutive knots
    assert status["rows"] == int(info["n_steps"]) + 1


def test_validate_names_the_broken_invariant(tmp_path, capsys):
    csv = tmp_path / "run.csv"
    summary = tmp_path / "run.json"
    run(["solve", *BASE, "--a-max", "20", "--out", str(csv),
         "--summary", str(summary)])
    lines = csv.read_text().splitlines()
    row = len(lines) - 40
    cells = lines[row].split(",")
    cells[1] = repr(float(cells[1]) * 1.01)  # bend s off the solved path
    lines[row] = ",".join(cells)
    csv.write_text("\n".join(lines) + "\n")
    capsys.readouterr()

    code = run(["validate", "--in", str(csv), "--summary-in", str(summary)])
    assert code == 3
    err = capsys.readouterr().err
    assert "violated at data row" in err
    # data rows are numbered from zero, the header line is not one of them
    assert f"row {row - 1}" in err


def test_solve_rejects_unseedable_regime(capsys):
    assert run(["solve", "--mu", "-1", "--k", "1", "--c", "1", "--b", "3"]) == 2
    assert "Case I" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert run(["solve", "--nope"]) == 64
    assert run([]) == 64
    capsys.readouterr()


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == 0
    capsys.readouterr()


def test_json_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": -1.0, "k": 1.0, "c": 1.0, "b": -3.0,
                               "a_max": 30.0}))
    assert run(["classify", "--config", str(cfg)]) == 0
    payload = _json_out(capsys)
    assert payload["config"]["a_max"] == 30.0
    assert payload["case"] == "CaseI"


def test_flat_config_file_with_comments(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# reference set\nmu = -1\nk = 1\nc = 1\nb = -3\nnx = 32\n")
    assert run(["classify", "--config", str(cfg)]) == 0
    payload = _json_out(capsys)
    assert payload["config"]["grid"]["nx"] == 32


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": -1.0, "a_max": 30.0}))
    assert run(["classify", "--config", str(cfg), "--a-max", "10"]) == 0
    payload = _json_out(capsys)
    assert payload["config"]["a_max"] == 10.0


def test_unknown_config_key_fails(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": -1.0, "banana": 3}))
    assert run(["classify", "--config", str(cfg)]) == 2
    assert "banana" in capsys.readouterr().err


def test_sweep_outputs_are_deterministic(tmp_path, capsys):
    seq = tmp_path / "seq"
    par = tmp_path / "par"
    args = ["solve", *BASE, "--a-max", "10", "--sweep", "mu=-1,-0.5,-0.25"]
    assert run([*args, "--out-dir", str(seq)]) == 0
    assert run([*args, "--out-dir", str(par), "--jobs", "2"]) == 0
    capsys.readouterr()
    for i in range(3):
        for ext in ("csv", "json"):
            a = seq / f"solve_{i:03d}.{ext}"
            b = par / f"solve_{i:03d}.{ext}"
            assert a.exists() and b.exists()
            assert filecmp.cmp(a, b, shallow=False), a.name


def test_sweep_requires_out_dir(capsys):
    assert run(["solve", *BASE, "--sweep", "mu=-1,-0.5"]) == 2
    capsys.readouterr()


def test_tolerance_scale_env(tmp_path, monkeypatch, capsys):
    summary = tmp_path / "s.json"
    run(["solve", *BASE, "--a-max", "20", "--summary", str(summary)])
    tight = json.loads(summary.read_text())["n_steps"]
    monkeypatch.setenv("HYPERWAVE_TOLERANCE_SCALE", "100")
    run(["solve", *BASE, "--a-max", "20", "--summary", str(summary)])
    loose = json.loads(summary.read_text())["n_steps"]
    capsys.readouterr()
    assert loose < tight


def test_selfsim_roundtrip_both_families(tmp_path, capsys):
    for extra in ([], ["--vertical"]):
        csv = tmp_path / f"ss{len(extra)}.csv"
        summary = tmp_path / f"ss{len(extra)}.json"
        code = run(["selfsim", "--mu", "3", "--k", "1", "--c", "-1", "--b", "-3",
                    "--r-max", "20", *extra,
                    "--out", str(csv), "--summary", str(summary)])
        assert code == 0
        info = json.loads(summary.read_text())
        assert info["reason"] == "ReachedEnd"
        assert info["h_invariant_residual"] < 1e-7
        capsys.readouterr()
        assert run(["validate", "--in", str(csv),
                    "--summary-in", str(summary)]) == 0
        assert _json_out(capsys)["kind"] == "selfsim"


def test_asym_command_reports_fit(tmp_path, capsys):
    out = tmp_path / "fit.json"
    code = run(["asym", *BASE, "--a-max", "300",
                "--window-lo", "150", "--window-hi", "300", "--out", str(out)])
    assert code == 0
    fit = json.loads(out.read_text())
    assert fit["scenario"] == "DecayToCenter"
    assert fit["freq"] == pytest.approx(1.0, rel=1e-3)
    capsys.readouterr()


def test_field_roundtrip(tmp_path, capsys):
    csv = tmp_path / "field.csv"
    summary = tmp_path / "field.json"
    code = run(["field", *BASE, "--t", "0",
                "--xmin", "-3", "--xmax", "3", "--ymin", "-3", "--ymax", "3",
                "--nx", "24", "--ny", "24", "--bands",
                "--out", str(csv), "--summary", str(summary)])
    assert code == 0
    info = json.loads(summary.read_text())
    assert info["n_nodes"] > 24 * 24
    verdicts = info["compatibility"]["verdicts"]
    assert verdicts["jump_phi1"] is True
    assert verdicts["zero_sum"] is True
    assert info["equivariance"]["boost"] < 1e-10
    capsys.readouterr()
    assert run(["validate", "--in", str(csv), "--summary-in", str(summary)]) == 0
    assert _json_out(capsys)["kind"] == "field"


def test_field_on_noncompact_target(tmp_path, capsys):
    summary = tmp_path / "h2.json"
    code = run(["field", "--target", "h2", "--mu", "1", "--k", "1",
                "--c", "1", "--b", "-3", "--t", "0",
                "--xmin", "-2", "--xmax", "2", "--ymin", "-2", "--ymax", "2",
                "--nx", "16", "--ny", "16", "--summary", str(summary)])
    assert code == 0
    info = json.loads(summary.read_text())
    assert info["compatibility"]["verdicts"]["u_xi_decay"] == "undetermined"
    capsys.readouterr()


def test_validate_rejects_unknown_header(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("w,z\n1,2\n")
    assert run(["validate", "--in", str(bad)]) == 2
    capsys.readouterr()
