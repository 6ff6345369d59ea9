import csv
import json
import math

import numpy as np
import pytest

from bandlaw import cli
from bandlaw.cli import ConfigError, ExperimentConfig, config_from_mapping, parse_weight, run_experiment


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_tiny(capsys):
    code, out, _ = run(["simulate", "--n", "4", "--seed", "5"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1
    assert rep["dimension"] == 4
    m1 = rep["empirical_moments"][0]["mean"]
    assert rep["per_replica"][0]["lambda_min"] <= m1 <= rep["per_replica"][0]["lambda_max"]


def test_simulate_trace_matches_eigenvalues(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["simulate", "--n", "6", "--seed", "1", "--out", str(out),
                      "--emit-eigenvalues"], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "r.eigenvalues.csv")))
    assert rows[0] == ["replica", "index", "eigenvalue"]
    lam = np.array([float(r[2]) for r in rows[1:]])
    cfg = ExperimentConfig(n=6, seed=1).validate()
    mat = cli._build(cfg, 0)
    assert lam.sum() == pytest.approx(np.trace(mat.values), abs=1e-12)
    rep = json.loads(out.read_text())
    assert rep["empirical_moments"][0]["mean"] == pytest.approx(lam.mean())


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        'seed = 3\nn = 30\nreplicas = 2\nkmax = 4\n'
        '[ensemble]\nkind = "curie_weiss"\nbeta = 0.5\n'
        '[structure]\nkind = "periodic_band"\nh = 5\n')
    code, out, _ = run(["simulate", "--config", str(cfg), "--replicas", "3"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["config"]["replicas"] == 3 and rep["config"]["seed"] == 3
    assert len(rep["per_replica"]) == 3
    assert rep["prediction"] is None
    assert [d["k"] for d in rep["empirical_moments"]] == [1, 2, 3, 4]


@pytest.mark.parametrize("args,field", [
    (["simulate", "--n", "0"], "n:"),
    (["simulate", "--structure", "periodic_band"], "structure:"),
    (["simulate", "--structure", "periodic_band:h=50", "--n", "10"], "structure.h"),
    (["simulate", "--ensemble", "curie_weiss:beta=2"], "ensemble.beta"),
    (["simulate", "--ensemble", "ising"], "ensemble.kind"),
    (["simulate", "--kmax", "10"], "kmax"),
    (["simulate", "--structure", "block:block_kind=hankel,k=2"], "structure.k"),
    (["simulate", "--emit-eigenvalues"], "--out"),
    (["predict", "--weight", "wiggly:3"], "weight"),
    (["oracle", "jw", "--partition", "1-3,2-4", "--weight", "const:1", "--n", "10"], "partition"),
    (["oracle", "jw", "--partition", "1-2,3-4", "--weight", "const:1", "--n", "5000",
      "--mode", "exact"], "oracle"),
])
def test_config_errors_exit_2(args, field, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    assert field in err


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(["simulate", "--config", str(tmp_path / "nope.toml")], capsys)
    assert code == 2 and "config" in err
    bad = tmp_path / "bad.toml"
    bad.write_text("n = [")
    assert run(["simulate", "--config", str(bad)], capsys)[0] == 2
    unk = tmp_path / "unk.toml"
    unk.write_text("size = 3\n")
    code, _, err = run(["simulate", "--config", str(unk)], capsys)
    assert code == 2 and "size" in err


def test_numeric_failure_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise cli.spectra.NumericError("no convergence")
    monkeypatch.setattr(cli.spectra, "eigenvalues_symmetric", boom)
    code, _, err = run(["simulate", "--n", "3"], capsys)
    assert code == 3 and "numeric" in err


def test_predict_catalan(capsys):
    code, out, _ = run(["predict", "--weight", "const:1", "--kmax", "8"], capsys)
    rows = json.loads(out)["moments"]
    assert [r["k"] for r in rows] == [2, 4, 6, 8]
    assert all(abs(r["normalized"] - r["catalan"]) <= 1e-6 for r in rows)


def test_predict_half_band(capsys):
    _, out, _ = run(["predict", "--weight", "band:0.5", "--kmax", "4"], capsys)
    rep = json.loads(out)
    assert rep["moments"][1]["normalized"] == pytest.approx(56 / 27, abs=1e-4)
    assert rep["semicircle"]["verdict"] is False


def test_check_scl(capsys):
    _, out, _ = run(["check-scl", "--weight", "kband4"], capsys)
    assert json.loads(out)["verdict"] is True
    for i in range(1, 5):
        _, out, _ = run(["check-scl", "--weight", f"kband4-drop:{i}"], capsys)
        assert json.loads(out)["verdict"] is False


def test_verify_conditions_cmd(capsys):
    _, out, _ = run(["verify-conditions", "--kind", "trivial", "--k", "1", "--block-n", "6"], capsys)
    rep = json.loads(out)
    assert rep["e3_count"] == 0 and rep["num_classes"] == 21


def test_oracle_cmd(capsys):
    code, out, _ = run(["oracle", "jw", "--partition", "{1,2},{3,4}", "--weight", "band:0.5",
                        "--n", "60"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["limit"] == pytest.approx(7 / 12, abs=1e-5)
    assert rep["abs_error"] < 0.1


def test_weight_specs():
    assert parse_weight("const:2")(0.3) == 2.0
    assert parse_weight("band:0.4")(0.4) == 1.0
    pb = parse_weight("pbband:0.2")
    assert pb(0.1) == pb(0.9) == 1.0 and pb(0.5) == 0.0
    assert parse_weight("indicator:0:0.1,0.5:0.6")(0.55) == 1.0
    pw = parse_weight("piecewise:0,0.5,1:1,3")
    assert pw(0.7) == 3.0
    assert parse_weight("tabulated:0,1")(0.5) == pytest.approx(0.5)
    assert parse_weight("kband4-drop:1")(0.15) == 0.0
    for bad in ("band:x", "kband4-drop:7", "indicator:0.5:0.2", "noise"):
        with pytest.raises(ConfigError):
            parse_weight(bad)


def test_band_geometry():
    s = cli.band_spec(ExperimentConfig(n=1000, structure={"kind": "periodic_band", "exponent": 0.8}))
    assert s.b == 253 and s.h == 127
    s = cli.band_spec(ExperimentConfig(n=1000, structure={"kind": "nonperiodic_band", "rho": 0.5}))
    assert s.h == 501 and s.b == 1000
    s = cli.band_spec(ExperimentConfig(n=200, structure={"kind": "periodic_band", "rho": 0.1}))
    assert s.h == 21 and s.b == 41


def test_nonperiodic_prediction_and_rescale():
    cfg = config_from_mapping({"n": 200, "structure": {"kind": "nonperiodic_band", "rho": 0.25},
                               "replicas": 2, "seed": 4, "kmax": 4})
    rep = run_experiment(cfg).summary
    spec = cli.band_spec(cfg)
    assert rep["rescale"] == pytest.approx(math.sqrt(spec.b / 200))
    pred = rep["prediction"]
    assert pred["phi0"] == pytest.approx(2 * 0.25 - 0.25 ** 2)
    # empirical phi_0 is (number of band entries) / n^2 after rescaling
    assert rep["empirical_moments"][1]["mean"] == pytest.approx(pred["phi0"], abs=0.02)


def test_block_structure_dimension():
    cfg = config_from_mapping({"n": 10, "structure": {"kind": "block", "block_kind": "homogeneous",
                                                      "k": 3}})
    rep = run_experiment(cfg).summary
    assert rep["dimension"] == 30
    assert rep["empirical_moments"][1]["mean"] == pytest.approx(1.0)


def _bytes(tmp_path, name, extra, capsys):
    out = tmp_path / name
    code, _, _ = run(["simulate", "--n", "60", "--replicas", "6", "--seed", "11",
                      "--ensemble", "curie_weiss:beta=1", "--structure", "periodic_band:h=12",
                      "--out", str(out), "--emit-eigenvalues", "--emit-hist", "bins=20", *extra],
                     capsys)
    assert code == 0
    return [p.read_bytes() for p in (out, out.with_name(out.stem + ".eigenvalues.csv"),
                                     out.with_name(out.stem + ".hist.csv"))]


def test_byte_determinism_and_threads(tmp_path, capsys, monkeypatch):
    a = _bytes(tmp_path, "a.json", ["--threads", "1"], capsys)
    b = _bytes(tmp_path, "b.json", ["--threads", "1"], capsys)
    c = _bytes(tmp_path, "c.json", ["--threads", "8"], capsys)
    monkeypatch.setenv("BANDLAW_THREADS", "3")
    d = _bytes(tmp_path, "d.json", [], capsys)
    assert a == b == c == d


def test_hist_csv(tmp_path, capsys):
    out = tmp_path / "h.json"
    run(["simulate", "--n", "50", "--out", str(out), "--emit-hist", "bins=10"], capsys)
    rows = list(csv.reader(open(tmp_path / "h.hist.csv")))
    assert rows[0] == cli.HIST_HEADER
    assert len(rows) == 11
    assert sum(int(r[2]) for r in rows[1:]) == 50
    assert all("." in r[0] or "e" in r[0] for r in rows[1:])


def test_threads_env_invalid(monkeypatch, capsys):
    monkeypatch.setenv("BANDLAW_THREADS", "many")
    code, _, err = run(["simulate", "--n", "3"], capsys)
    assert code == 2 and "BANDLAW_THREADS" in err


def test_timings_opt_in(capsys):
    _, out, _ = run(["simulate", "--n", "5"], capsys)
    assert "timings" not in json.loads(out)
    _, out, _ = run(["simulate", "--n", "5", "--timings"], capsys)
    assert "timings" in json.loads(out)


def test_repro_fig1_small(tmp_path, capsys):
    out = tmp_path / "f.json"
    code, _, _ = run(["repro", "fig1", "--block-n", "20", "--replicas", "2", "--out", str(out),
                      "--emit-hist", "bins=8"], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert [p["k"] for p in rep["panels"]] == [2, 3, 4]
    assert [p["dimension"] for p in rep["panels"]] == [40, 60, 80]
    rows = list(csv.reader(open(tmp_path / "f.hist.csv")))
    assert rows[0][0] == "k" and len(rows) == 1 + 3 * 8
