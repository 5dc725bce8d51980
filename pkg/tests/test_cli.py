import json

import pytest

from qdelaunay.cli import run
from qdelaunay.params import make_params


def test_params_command(capsys):
    assert run(["params", "--n", "5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    p = make_params(5)
    assert payload["c2"] == p.c2
    assert payload["v_cyl"] == p.v_cyl
    assert payload["y_sph"] == p.y_sph
    assert payload["meta"]["n"] == 5


def test_params_rejects_bad_dimension(capsys):
    assert run(["params", "--n", "4"]) == 1
    assert "invalid parameter" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run(["nonsense"]) == 1
    assert run(["params"]) == 1  # missing --n
    assert run(["solve", "--n", "5"]) == 1  # missing --a
    capsys.readouterr()


def test_solve_command(tmp_path, capsys):
    out = tmp_path / "orbit.csv"
    code = run(["solve", "--n", "5", "--a", "0.9", "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    orb = summary["orbit"]
    p = make_params(5)
    assert orb["T_a"] > p.t_cyl
    assert orb["eps_a"] < 0.9
    assert 0.0 < orb["Y"] < p.y_sph
    text = out.read_text()
    lines = text.strip().splitlines()
    assert lines[0].startswith("# qdelaunay 0.1.0 n=5")
    assert lines[1] == "t,v,v1,v2,v3,H"
    assert len(lines) == 512 + 2


def test_solve_rejects_out_of_range(capsys):
    assert run(["solve", "--n", "5", "--a", "1.5"]) == 1
    capsys.readouterr()


def test_solve_determinism(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run(["solve", "--n", "5", "--a", "0.9", "--out", str(out1)]) == 0
    assert run(["solve", "--n", "5", "--a", "0.9", "--out", str(out2)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes()


def test_solve_json_mirror(tmp_path, capsys):
    out = tmp_path / "orbit.csv"
    assert run(["solve", "--n", "5", "--a", "0.9", "--out", str(out),
                "--json"]) == 0
    capsys.readouterr()
    mirror = json.loads((tmp_path / "orbit.csv.json").read_text())
    assert len(mirror["rows"]) == 512
    assert set(mirror["rows"][0]) == {"t", "v", "v1", "v2", "v3", "H"}


def test_sweep_command(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = run(["sweep", "--n", "5", "--a-min", "0.86", "--a-max", "0.94",
                "--count", "3", "--out", str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdicts"]["t_a_increasing"] is True
    lines = out.read_text().strip().splitlines()
    assert lines[1] == "a,b,T_a,eps_a,H,I_a,defect"
    assert len(lines) == 3 + 2


def test_period_command(capsys):
    p = make_params(5)
    code = run(["period", "--n", "5", "--T", str(1.3 * p.t_cyl)])
    assert code == 0
    # stdout carries the CSV (no --out) followed by the summary JSON; split
    lines = capsys.readouterr().out.strip().splitlines()
    brace = next(i for i, ln in enumerate(lines) if ln.startswith("{"))
    summary = json.loads("\n".join(lines[brace:]))
    assert summary["orbit"]["T_a"] == pytest.approx(1.3 * p.t_cyl, rel=1e-6)


def test_period_rejects_short(capsys):
    p = make_params(5)
    assert run(["period", "--n", "5", "--T", str(p.t_cyl)]) == 1
    capsys.readouterr()


def test_convergence_command(capsys):
    code = run(["convergence", "--n", "5", "--kmax", "2"])
    assert code == 0
    captured = capsys.readouterr().out
    lines = captured.strip().splitlines()
    brace = next(i for i, ln in enumerate(lines) if ln.startswith("{"))
    summary = json.loads("\n".join(lines[brace:]))
    assert summary["verdict"]["increasing"] is True
    assert summary["verdict"]["below_sphere"] is True


def test_convergence_rejects_kmax_zero(capsys):
    assert run(["convergence", "--n", "5", "--kmax", "0"]) == 1
    capsys.readouterr()


def test_phase_portrait_command(tmp_path, capsys):
    out = tmp_path / "portrait.json"
    code = run(["phase-portrait", "--n", "5", "--a", "0.9", "--sphere",
                "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    labels = [c["label"] for c in payload["curves"]]
    assert labels == ["delaunay a=0.9", "sphere"]
    out_csv = tmp_path / "portrait.csv"
    code = run(["phase-portrait", "--n", "5", "--a", "0.9",
                "--format", "csv", "--out", str(out_csv)])
    assert code == 0
    assert out_csv.read_text().splitlines()[1] == "curve_id,label,a,v,v1"
    capsys.readouterr()


def test_spectrum_command(capsys):
    code = run(["spectrum", "--n", "5", "--a", "0.9", "--l", "2"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["negative_count"] >= 2
    assert payload["grid_n"] == 256
    assert len(payload["eigenvalues"]) == 2 * 2 + 3


def test_selfcheck_command(tmp_path, capsys):
    out = tmp_path / "selfcheck.json"
    code = run(["selfcheck", "--n", "5", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["ok"] is True
    adjudications = payload["adjudications"]
    assert adjudications["linearization_frequency_sign"]["matching_variant"] \
        == "minus8"
    assert "invariant_exponent" in adjudications
    assert "constant_energy_exponent" in adjudications
    capsys.readouterr()
