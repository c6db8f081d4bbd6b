import csv
import json

import numpy as np
import pytest

from alflab import cli


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_verify_taubnut_exit_zero_and_manifest(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, _, err = _run(["verify", "taubnut-identities", "--m", "1", "--n", "500",
                         "--out", str(out)], capsys)
    assert code == 0 and "OK" in err
    rows = _rows(out)
    assert len(rows) == 500 * 9 and all(r["passed"] == "1" for r in rows)
    man = json.loads((tmp_path / "t.csv.manifest.json").read_text())
    assert set(man) == {"command", "config_hash", "seed", "version", "timestamp"}
    assert man["command"] == "verify" and man["seed"] == 0


def test_verify_reproducible_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        _run(["verify", "frames", "--n", "5", "--seed", "4", "--out", str(p)], capsys)
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    _run(["verify", "frames", "--n", "5", "--seed", "5", "--out", str(c)], capsys)
    assert a.read_bytes() != c.read_bytes()
    ma = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    mc = json.loads((tmp_path / "c.csv.manifest.json").read_text())
    assert ma["config_hash"] == mc["config_hash"]


def test_verify_dihedral_has_tau_rows(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = _run(["verify", "dihedral", "--k", "2", "--n", "5", "--out", str(out)], capsys)
    assert code == 0
    checks = {r["check"] for r in _rows(out)}
    assert {"u_tau", "v_tau", "syzygy", "tetrahedral_witness"} <= checks


def test_verify_curvature_small_mass(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = _run(["verify", "curvature", "--m", "0.1", "--out", str(out)], capsys)
    assert code == 0
    slope = [r for r in _rows(out) if r["check"] == "slope_R"][0]
    assert float(slope["value"]) == pytest.approx(-3, abs=0.2)


def test_verify_to_stdout(capsys):
    code, out, err = _run(["verify", "dihedral", "--n", "2"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("suite,point,check")
    assert '"command": "verify"' in err


def test_verify_failure_names_identity(monkeypatch, tmp_path, capsys):
    from alflab import suites

    def fake(m, rng, n, **_):
        return [suites.Check("taubnut-identities", 0, "eta_xi", 1.0, 1e-10, "le",
                             "the connection form takes the value 1 on the circle generator")]

    monkeypatch.setitem(suites._RUNNERS, "taubnut-identities", fake)
    code, _, err = _run(["verify", "taubnut-identities", "--out", str(tmp_path / "x.csv")], capsys)
    assert code == 1
    assert "eta_xi" in err and "circle generator" in err


def test_sweep_fiber_length(tmp_path, capsys):
    out = tmp_path / "f.csv"
    code, _, _ = _run(["sweep", "fiber-length", "--m", "2", "--n", "8", "--rmax", "1e6",
                       "--out", str(out)], capsys)
    assert code == 0
    rows = _rows(out)
    L = np.array([float(r["fiber_length"]) for r in rows])
    assert np.all(np.diff(L) > 0)
    assert L[-1] == pytest.approx(np.pi, rel=1e-5)
    assert float(rows[0]["limit"]) == pytest.approx(np.pi, rel=1e-14)


def test_sweep_comparison_ordering(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code, _, _ = _run(["sweep", "comparison-bounds", "--n", "30", "--out", str(out)], capsys)
    assert code == 0
    rows = _rows(out)
    assert {"r2", "two_R", "upper"} <= set(rows[0])
    for r in rows:
        assert r["ordered"] == "1"
        assert abs(float(r["det_e"]) - 1) <= 1e-10


def test_sweep_decay(tmp_path, capsys):
    flat, syn = tmp_path / "e.csv", tmp_path / "s.csv"
    _run(["sweep", "decay", "--ale", "euclidean", "--n", "4", "--out", str(flat)], capsys)
    _run(["sweep", "decay", "--ale", "synthetic", "--n", "4", "--out", str(syn)], capsys)
    assert all(float(r["deviation_f"]) == 0 for r in _rows(flat))
    rows = _rows(syn)
    R = np.array([float(r["R"]) for r in rows])
    dev = np.array([float(r["deviation_f"]) for r in rows])
    assert np.polyfit(np.log(R), np.log(dev), 1)[0] == pytest.approx(-3, abs=0.3)


def test_export(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert _run(["export", "--n", "7", "--out", str(out)], capsys)[0] == 0
    rows = _rows(out)
    assert len(rows) == 7 and "phi" in rows[0]


def _write_config(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


SMALL = {"domain": {"n": 9}, "f": {"radius": 0.8}}


def test_solve_zero_source(tmp_path, capsys):
    cfg = _write_config(tmp_path, "z.json", {**SMALL, "f": {"kind": "zero"}})
    out = tmp_path / "z_run.json"
    code, _, _ = _run(["solve", "--config", cfg, "--out", str(out)], capsys)
    assert code == 0
    rec = json.loads(out.read_text())
    assert rec["success"] and rec["phi_max"] <= 1e-10
    assert (tmp_path / "z_run_fields.csv").exists()


def test_solve_failure_exit_two(tmp_path, capsys):
    cfg = _write_config(tmp_path, "bad.json", {"domain": {"n": 9},
                                               "f": {"amplitude": 40, "radius": 0.5},
                                               "schedule": {"min_dt": 0.05}})
    out = tmp_path / "bad_run.json"
    code, _, err = _run(["solve", "--config", cfg, "--out", str(out)], capsys)
    assert code == 2 and "stopped at t" in err
    rec = json.loads(out.read_text())
    assert not rec["success"] and 0 <= rec["last_good_t"] < 1


def test_solve_two_seeds_agree(tmp_path, capsys):
    cfg = _write_config(tmp_path, "b.json", {**SMALL, "initial_guess": {"amplitude": 0.02}})
    phis = []
    for seed in (1, 2):
        out = tmp_path / f"b{seed}.json"
        assert _run(["solve", "--config", cfg, "--seed", str(seed), "--out", str(out)], capsys)[0] == 0
        rec = json.loads(out.read_text())
        assert rec["trace_bound"]["holds"] and rec["newton_ratio_max"] < 10
        phis.append(np.array([float(r["phi"]) for r in _rows(tmp_path / f"b{seed}_fields.csv")]))
    assert np.abs(phis[0] - phis[1]).max() <= 1e-7
    assert np.abs(phis[0]).max() > 1e-3


def test_solve_refinement_pair(tmp_path, capsys):
    errs = []
    for n in (5, 11):
        cfg = _write_config(tmp_path, f"m{n}.json", {"domain": {"n": n},
                                                     "f": {"kind": "manufactured",
                                                           "amplitude": 0.05}})
        out = tmp_path / f"m{n}.json.out"
        assert _run(["solve", "--config", cfg, "--out", str(out)], capsys)[0] == 0
        errs.append(json.loads(out.read_text())["error_vs_exact"])
    assert 2 ** 1.7 <= errs[0] / errs[1] <= 2 ** 2.3


def test_solve_default_config_untouched(tmp_path, capsys):
    before = json.dumps(cli.DEFAULT_SOLVE, sort_keys=True)
    cfg = _write_config(tmp_path, "z.json", {"domain": {"n": 5}, "f": {"kind": "zero"}})
    _run(["solve", "--config", cfg, "--m", "2", "--out", str(tmp_path / "o.json")], capsys)
    assert json.dumps(cli.DEFAULT_SOLVE, sort_keys=True) == before
