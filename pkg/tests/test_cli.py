import json
import math
import pathlib

import pytest

from neumann_bounds.cli import EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_VIOLATION, main

PI2 = math.pi**2
OMEGA = str(pathlib.Path(__file__).resolve().parent.parent / "demos" / "omega_eps.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bounds_square(capsys):
    code, out, _ = run(capsys, "bounds", "--parallelogram", "1", "1", "1.5707963267948966")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["lambda_minus"] == pytest.approx(PI2, rel=1e-12)
    assert data["eta_plus"] == pytest.approx(12.0, rel=1e-12)


def test_bounds_degrees(capsys):
    _, out, _ = run(capsys, "bounds", "--parallelogram", "1", "2", "90", "--degrees")
    assert json.loads(out)["mu2_bound"] == pytest.approx(PI2 / 4, rel=1e-12)


def test_bounds_vectors_and_strip(capsys):
    _, out, _ = run(capsys, "bounds", "--vectors", "1", "0", "0", "2")
    assert json.loads(out)["lambda_minus"] == pytest.approx(PI2 / 4, rel=1e-12)
    _, out, _ = run(capsys, "bounds", "--strip", OMEGA)
    assert json.loads(out)["lambda_minus"] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--parallelogram", "1", "1", "4"],
        ["bounds", "--vectors", "1", "1", "2", "2"],
        ["bounds", "--strip", "/nonexistent.json"],
        ["bounds"],
        ["solve", "--parallelogram", "1", "1", "1", "--n", "0"],
        ["perturb", "--t", "0.5"],
        ["perturb", "--n", "30"],
        ["strip-scan", "--rho", "1.5", "--count", "1"],
        [],
    ],
)
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert err


def test_strip_bounds_reject_varying_width(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"type": "strip", "l": 1.0, "g": {"terms": [{"amp": 0.1, "k": 1}]}, "h": {"offset": 1.0}}))
    code, _, err = run(capsys, "bounds", "--strip", str(path))
    assert code == EXIT_INPUT and "constant" in err


def test_solve_with_matrix_dump(tmp_path, capsys):
    prefix = str(tmp_path / "rect")
    code, out, _ = run(capsys, "solve", "--parallelogram", "1", "2", "1.5707963267948966", "--n", "16", "--dump-matrix", prefix)
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["eigenvalues"][1] == pytest.approx(PI2 / 4, rel=1e-5)
    assert (tmp_path / "rect_K.txt").exists() and (tmp_path / "rect_M.txt").exists()


def test_solver_failure_exit_code(monkeypatch, capsys):
    import neumann_bounds.cli as cli
    from neumann_bounds import SolverFailure

    def broken(*args, **kwargs):
        raise SolverFailure("forced")

    monkeypatch.setattr(cli, "lowest_eigenpairs", broken)
    code, _, err = run(capsys, "solve", "--parallelogram", "1", "1", "1")
    assert code == EXIT_SOLVER and "forced" in err


def test_square_scan(tmp_path, capsys):
    csv_path, summary_path = tmp_path / "s.csv", tmp_path / "s.json"
    code, _, _ = run(capsys, "scan", "--sampler", "square", "--csv", str(csv_path), "--summary", str(summary_path))
    summary = json.loads(summary_path.read_text())
    assert code == EXIT_OK
    assert summary["max_prod_perim"] == pytest.approx(16 * PI2, rel=1e-5)
    assert len(csv_path.read_text().splitlines()) == 2


def test_scan_violation_exit_code(monkeypatch, tmp_path, capsys):
    import neumann_bounds.verify as verify

    monkeypatch.setattr(verify, "DOMINANCE_RTOL", -0.5)
    code, _, _ = run(capsys, "scan", "--count", "2", "--csv", str(tmp_path / "x.csv"), "--summary", str(tmp_path / "x.json"))
    assert code == EXIT_VIOLATION


def test_dump_config_round_trip(tmp_path, capsys):
    code, cfg_text, _ = run(capsys, "--dump-config", "scan", "--count", "3", "--seed", "9")
    assert code == EXIT_OK
    cfg = tmp_path / "cfg.json"
    cfg.write_text(cfg_text)
    run(capsys, "scan", "--count", "3", "--seed", "9", "--csv", str(tmp_path / "a.csv"), "--summary", str(tmp_path / "a.json"))
    data = json.loads(cfg_text)
    data.update(csv=str(tmp_path / "b.csv"), summary=str(tmp_path / "b.json"))
    cfg.write_text(json.dumps(data))
    assert main(["--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_strip_scan(tmp_path, capsys):
    code, _, _ = run(capsys, "strip-scan", "--count", "4", "--rho", "0.5", "--csv", str(tmp_path / "s.csv"), "--summary", str(tmp_path / "s.json"))
    assert code == EXIT_OK
    assert json.loads((tmp_path / "s.json").read_text())["violations"] == 0


def test_perturb(tmp_path, capsys):
    code, _, _ = run(
        capsys, "perturb", "--n", "16", "--t", "-0.02", "-0.01", "--csv", str(tmp_path / "p.csv"), "--json", str(tmp_path / "p.json")
    )
    assert code == EXIT_OK
    rows = (tmp_path / "p.csv").read_text().splitlines()
    assert rows[0] == "t,L,mu2,mu3,F,mu2_err" and len(rows) == 3
    assert json.loads((tmp_path / "p.json").read_text())["t_star"] == -0.02


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--parallelogram", "1", "3", "1.5707963267948966")
    assert code == EXIT_OK
    assert json.loads(out)["classification"] == "rectangle_long"


def test_threads_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("NBL_THREADS", "3")
    code, out, _ = run(capsys, "--dump-config", "audit", "--parallelogram", "1", "1", "1")
    assert code == EXIT_OK and json.loads(out)["threads"] == 3
    monkeypatch.setenv("NBL_THREADS", "many")
    code, _, _ = run(capsys, "audit", "--parallelogram", "1", "1", "1")
    assert code == EXIT_INPUT
