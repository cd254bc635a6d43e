from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from intertwiners import io as jio
from intertwiners.cli import main
from intertwiners.dynamics import FloquetDrive, floquet_propagator
from intertwiners.linalg import expm, span_residual
from intertwiners.models import MODELS, SpinModelParams, build_dimer, build_pt_spin, parity

TOL = 1e-10
DRIFT_TOL = 1e-8


def write_matrix(path, m):
    jio.write_json(jio.matrix_to_json(m), path)
    return str(path)


def write_segments(path, segments):
    obj = {"segments": [{"duration": t, "matrix": jio.matrix_to_json(h)} for h, t in segments]}
    jio.write_json(obj, path)
    return str(path)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- analyze ---------------------------------------------------------------


def test_analyze_h3_ep(tmp_path, capsys):
    h, _ = build_pt_spin(SpinModelParams(3, 1.0, 1.0))
    code, out, _ = run(["analyze", write_matrix(tmp_path / "h.json", h)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert len(rep["clusters"]) == 1
    c = rep["clusters"][0]
    assert (c["kind"], c["order"], c["algebraic"], c["geometric"]) == ("exceptional", 3, 3, 1)
    assert rep["diagonalizable"] is False


def test_analyze_hermitian(tmp_path, capsys):
    h = np.array([[1.0, 0.5 - 0.2j], [0.5 + 0.2j, -2.0]])
    code, out, _ = run(["analyze", write_matrix(tmp_path / "h.json", h)], capsys)
    rep = json.loads(out)
    assert code == 0
    assert all(abs(im) < TOL for _, im in rep["eigenvalues"])
    assert "PT" in [s["kind"] for s in rep["symmetries"]]


def test_analyze_random_spectrum(tmp_path, capsys):
    rng = np.random.default_rng(7)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    out_path = tmp_path / "rep.json"
    code, _, _ = run(["analyze", write_matrix(tmp_path / "h.json", h), "-o", out_path], capsys)
    assert code == 0
    assert jio.read_json(out_path)["symmetries"] == []


# -- conserve --------------------------------------------------------------


def test_conserve_recursive_h3(tmp_path, capsys):
    h, _ = build_pt_spin(SpinModelParams(3, 1.0, 0.5))
    seed = write_matrix(tmp_path / "p.json", parity(3))
    code, out, _ = run(["conserve", write_matrix(tmp_path / "h.json", h), "--method", "recursive", "--seed", seed],
                       capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["count"] == 3 and obj["construction"] == "recursive"
    p = parity(3)
    assert span_residual(jio.etas_from_json(obj), [p, p @ h, p @ h @ h]) < 1e-8
    assert max(e["residual"] for e in obj["etas"]) <= 1e-12


def test_conserve_recursive_auto_seed_from_model(tmp_path, capsys):
    path = tmp_path / "m.json"
    assert run(["model", "pt-spin", "--param", "D=3", "--param", "gamma=0.5", "-o", path], capsys)[0] == 0
    code, out, _ = run(["conserve", path, "--method", "recursive"], capsys)
    assert code == 0
    assert json.loads(out)["count"] == 3


def test_conserve_identity_nullspace(tmp_path, capsys):
    code, out, _ = run(["conserve", write_matrix(tmp_path / "i.json", np.eye(3)), "--method", "nullspace"], capsys)
    assert code == 0
    assert json.loads(out)["count"] == 9


def test_conserve_diabolic_spectral(tmp_path, capsys):
    code, out, _ = run(["conserve", write_matrix(tmp_path / "d.json", np.diag([0.7, 0.7, -1.2])),
                        "--method", "spectral"], capsys)
    assert code == 0
    assert json.loads(out)["count"] == 5


def test_conserve_chiral_relation(tmp_path, capsys):
    h, _ = build_dimer(1.0, 0.4)
    code, out, _ = run(["conserve", write_matrix(tmp_path / "h.json", h), "--relation", "anticommute"], capsys)
    assert code == 0
    assert json.loads(out)["relation"]["kind"] == "anticommute"


def test_conserve_no_seed_exit_3(tmp_path, capsys):
    h = np.diag([1j, 2j])
    code, _, err = run(["conserve", write_matrix(tmp_path / "h.json", h), "--method", "recursive"], capsys)
    assert code == 3
    assert err.startswith("error:")


def test_conserve_bad_seed_exit_3(tmp_path, capsys):
    h, _ = build_pt_spin(SpinModelParams(3, 1.0, 0.5))
    seed = write_matrix(tmp_path / "s.json", np.diag([1.0, 2.0, 3.0]))
    code, _, _ = run(["conserve", write_matrix(tmp_path / "h.json", h), "--method", "recursive", "--seed", seed],
                     capsys)
    assert code == 3


# -- evolve ----------------------------------------------------------------


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_evolve_unbroken_dimer(tmp_path, capsys):
    h, _ = build_dimer(1.0, 0.4)
    etas = tmp_path / "e.json"
    jio.write_json({"etas": [{"matrix": jio.matrix_to_json(np.array([[0, 1], [1, 0]]))}]}, etas)
    out_csv = tmp_path / "d.csv"
    code, out, _ = run(["evolve", write_matrix(tmp_path / "h.json", h), "--state", "1,0.3j", "--etas", etas,
                        "--tmax", 20, "--steps", 2001, "-o", out_csv], capsys)
    assert code == 0
    head, data = read_csv(out_csv)
    assert head == ["t", "norm", "eta_1"]
    assert data.shape == (2001, 3)
    col = data[:, 2]
    assert np.max(np.abs(col - col[0])) <= DRIFT_TOL * max(abs(col[0]), 1.0)
    assert out.startswith("max relative drift:")


def test_evolve_broken_norm_grows_etas_flat(tmp_path, capsys):
    h, _ = build_dimer(1.0, 1.5)
    code, out, err = run(["evolve", write_matrix(tmp_path / "h.json", h), "--state", "1,0.2",
                          "--tmax", 10, "--steps", 101, "--dps", 30], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()]
    data = np.array(rows[1:], dtype=float)
    assert data[-1, 1] > 1e4 * data[0, 1]
    for k in range(2, data.shape[1]):
        assert np.max(np.abs(data[:, k] - data[0, k])) <= DRIFT_TOL * np.max(np.abs(data[:, 2:]))
    assert "max relative drift" in err


def test_evolve_gamma_shift_passive(tmp_path, capsys):
    g = 0.8
    h, _ = build_dimer(1.0, g)
    hp = h - 0.5j * g * np.eye(2)
    out_csv = tmp_path / "d.csv"
    code, _, _ = run(["evolve", write_matrix(tmp_path / "h.json", hp), "--state", "0.6,0.8j",
                      "--gamma-shift", g / 2, "--steps", 501, "-o", out_csv], capsys)
    assert code == 0
    _, data = read_csv(out_csv)
    assert data[-1, 1] < data[0, 1]
    for k in range(2, data.shape[1]):
        assert np.max(np.abs(data[:, k] - data[0, k])) <= DRIFT_TOL


def test_evolve_dimension_mismatch(tmp_path, capsys):
    h, _ = build_dimer(1.0, 0.4)
    code, _, _ = run(["evolve", write_matrix(tmp_path / "h.json", h), "--state", "1,0,0"], capsys)
    assert code == 1


def test_evolve_overflow_exit_2(tmp_path, capsys):
    h, _ = build_dimer(1.0, 3.0)
    code, _, err = run(["evolve", write_matrix(tmp_path / "h.json", h), "--state", "1,0", "--tmax", 1e4,
                        "--steps", 3], capsys)
    assert code == 2
    assert err.startswith("numerical failure")


# -- model -----------------------------------------------------------------


def test_model_pt_spin(tmp_path, capsys):
    path = tmp_path / "m.json"
    code, _, _ = run(["model", "pt-spin", "--param", "D=3", "--param", "J=1", "--param", "gamma=0.5", "-o", path],
                     capsys)
    assert code == 0
    h, seed, syms = jio.read_model(path)
    np.testing.assert_allclose(h, build_pt_spin(SpinModelParams(3, 1.0, 0.5))[0], atol=1e-15)
    np.testing.assert_allclose(seed, np.fliplr(np.eye(3)), atol=1e-15)
    assert [s.kind for s in syms] == ["PT"]


def test_model_circuit(tmp_path, capsys):
    path = tmp_path / "c.json"
    code, _, _ = run(["model", "circuit", "--param", "mu=0.5", "--param", "gamma=1", "-o", path], capsys)
    assert code == 0
    h, seed, _ = jio.read_model(path)
    assert h.shape == (4, 4)
    np.testing.assert_allclose(seed, np.kron(np.eye(2), [[0, 1], [1, 0]]), atol=1e-15)


def test_model_hermitian_dimer(capsys):
    code, out, _ = run(["model", "dimer", "--param", "J=1", "--param", "gamma=0"], capsys)
    assert code == 0
    h = jio.matrix_from_json(json.loads(out))
    np.testing.assert_allclose(h, [[0, 0.5], [0.5, 0]], atol=1e-15)


@pytest.mark.parametrize("params", [["mu=1.0"], ["mu=2"], ["gamma=-1"], ["bogus=1"], ["novalue"]])
def test_model_invalid_params(params, capsys):
    argv = ["model", "circuit"]
    for p in params:
        argv += ["--param", p]
    assert run(argv, capsys)[0] == 1


def test_model_unknown_name(capsys):
    with pytest.raises(SystemExit):
        main(["model", "nope"])


@pytest.mark.parametrize("name", sorted(MODELS))
def test_model_analyze_round_trip(name, tmp_path, capsys):
    path = tmp_path / f"{name}.json"
    assert run(["model", name, "-o", path], capsys)[0] == 0
    declared = {s["kind"] for s in jio.read_json(path)["symmetry"]}
    code, out, _ = run(["analyze", path], capsys)
    assert code == 0
    assert declared <= {s["kind"] for s in json.loads(out)["symmetries"]}


# -- floquet ---------------------------------------------------------------


def test_floquet_single_segment(tmp_path, capsys):
    h, _ = build_dimer(1.0, 0.4)
    code, out, _ = run(["floquet", write_segments(tmp_path / "s.json", [(h, 0.9)])], capsys)
    assert code == 0
    g = jio.matrix_from_json(json.loads(out)["propagator"])
    np.testing.assert_allclose(g, expm(-0.9j * h), atol=TOL)


def test_floquet_two_step_drive(tmp_path, capsys):
    h, _ = build_dimer(1.0, 0.3)
    segs = [(h, 0.5), (h.conj(), 0.5)]
    outdir = tmp_path / "out"
    code, _, err = run(["floquet", write_segments(tmp_path / "s.json", segs), "--periods", 100,
                        "--state", "1,0.4j", "-o", outdir], capsys)
    assert code == 0
    obj = jio.read_json(outdir / "floquet.json")
    g = jio.matrix_from_json(obj["propagator"])
    np.testing.assert_allclose(g, floquet_propagator(FloquetDrive(tuple(segs))), atol=1e-12)
    assert obj["stroboscopic"]["count"] >= 1
    head, data = read_csv(outdir / "stroboscopic.csv")
    assert data.shape[0] == 101
    for k in range(2, data.shape[1]):
        assert np.max(np.abs(data[:, k] - data[0, k])) <= DRIFT_TOL * max(1.0, np.max(np.abs(data[:, 2:])))
    assert "max stroboscopic drift" in err


def test_floquet_empty_segments(tmp_path, capsys):
    path = tmp_path / "s.json"
    jio.write_json({"segments": []}, path)
    assert run(["floquet", path], capsys)[0] == 1


def test_floquet_malformed(tmp_path, capsys):
    path = tmp_path / "s.json"
    jio.write_json({"segments": [{"matrix": jio.matrix_to_json(np.eye(2))}]}, path)
    assert run(["floquet", path], capsys)[0] == 1


# -- global behaviour ------------------------------------------------------


def test_missing_file_exit_1(tmp_path, capsys):
    assert run(["analyze", tmp_path / "missing.json"], capsys)[0] == 1


def test_malformed_json_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(["analyze", path], capsys)[0] == 1


def test_non_square_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    jio.write_json({"n": 2, "data": [[[1, 0], [0, 0]]]}, path)
    assert run(["analyze", path], capsys)[0] == 1


def test_deterministic_output(tmp_path, capsys):
    h, _ = build_pt_spin(SpinModelParams(4, 1.0, 0.7))
    path = write_matrix(tmp_path / "h.json", h)
    _, a, _ = run(["conserve", path], capsys)
    _, b, _ = run(["conserve", path], capsys)
    assert a == b


def test_tolerance_flag_and_env(tmp_path, capsys, monkeypatch):
    path = write_matrix(tmp_path / "h.json", np.eye(2))
    assert run(["--tol", "1e-8", "conserve", path], capsys)[0] == 0
    with pytest.raises(SystemExit):
        main(["--tol", "-1", "conserve", path])
    monkeypatch.setenv("INTERTWINER_TOL", "1e-9")
    assert run(["conserve", path], capsys)[0] == 0
    monkeypatch.setenv("INTERTWINER_TOL", "zero")
    assert run(["conserve", path], capsys)[0] == 1
