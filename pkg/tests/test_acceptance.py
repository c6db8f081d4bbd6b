"""Acceptance criteria 1-9 at their stated tolerances.

Each test appends a one-line verdict that is printed in the terminal
summary; ``python tests/test_acceptance.py`` runs only this file.
"""

import time

import numpy as np
import pytest

from alflab import dihedral as dh
from alflab import gluing as gl
from alflab import monge_ampere as ma
from alflab import suites
from alflab import taubnut as tn

MASSES = (0.1, 1.0, 10.0)


def _worst(rows, name):
    return max(r.value for r in rows if r.check == name)


def test_criterion_1_taubnut_identities(acceptance):
    with acceptance.criterion(1, "Taub-NUT identity suite") as note:
        t0 = time.perf_counter()
        worst = {"omega_squared": 0.0, "eta_xi": 0.0, "gibbons_hawking": 0.0}
        for m in MASSES:
            rows = suites.suite_taubnut(m, suites.suite_rng(0, "taubnut-identities"), 500)
            for k in worst:
                worst[k] = max(worst[k], _worst(rows, k))
        elapsed = time.perf_counter() - t0
        note.append(", ".join(f"{k}={v:.1e}" for k, v in worst.items()))
        note.append(f"1500 points in {elapsed:.2f} s")
        assert worst["omega_squared"] <= 1e-9
        assert worst["eta_xi"] <= 1e-10
        assert worst["gibbons_hawking"] <= 1e-9
        assert elapsed <= 10


def test_criterion_2_d_eta(acceptance):
    with acceptance.criterion(2, "d eta = *dV by finite differences") as note:
        rng = np.random.default_rng(2)
        worst = 0.0
        for m in MASSES:
            pts = tn.sample_points(rng, m, 100, y1_max=0.95)
            assert all(abs(p.z1) > 0 and abs(p.z2) > 0 for p in pts)
            worst = max(worst, max(suites.d_eta_check(p) for p in pts))
        note.append(f"max relative error {worst:.1e} over 3 x 100 points")
        assert worst <= 1e-5


def test_criterion_3_brackets(acceptance):
    with acceptance.criterion(3, "frame bracket table") as note:
        rng = np.random.default_rng(3)
        worst = 0.0
        # at m = 10 and R ~ 50 one of |z1|, |z2| underflows double precision
        for m in (0.1, 1.0):
            pts = tn.sample_points(rng, m, 50, R_range=(5.0, 50.0), y1_max=0.9)
            worst = max(worst, max(suites.bracket_check(p) for p in pts))
        note.append(f"max relative error {worst:.1e} over 2 x 50 points, R in [5, 50]")
        assert worst <= 1e-4


def test_criterion_4_comparison(acceptance):
    with acceptance.criterion(4, "comparison bounds 2R <= r^2 <= 2R e^{4mR}") as note:
        rng = np.random.default_rng(4)
        n = 10_000
        bad = 0
        det_err = eq_lo = eq_hi = 0.0
        for m in MASSES:
            pts = tn.sample_points(rng, m, n // len(MASSES) + 1, R_range=(0.01, 5.0))
            rep = tn.comparison_bounds(pts)
            bad += int(np.sum(rep["lower_gap"] < -1e-12 * rep["r2"]))
            bad += int(np.sum(rep["upper_gap"] < -1e-12 * rep["r2"]))
            det_err = max(det_err, float(np.abs(rep["det"] - 1).max()))
            for R in np.geomspace(0.01, 5.0, 20):
                ang = rng.uniform(0, 2 * np.pi)
                p = tn.point_from_moment(m, [0.0, R * np.cos(ang), R * np.sin(ang)], ang)
                eq_lo = max(eq_lo, abs(p.r2 - 2 * p.R) / p.r2)
                q = tn.TaubNutPoint.from_complex(np.sqrt(R) * np.exp(1j * ang), 0j, m)
                eq_hi = max(eq_hi, abs(q.r2 - 2 * q.R * np.exp(4 * m * q.R)) / q.r2)
        note.append(f"{bad} violations in {3 * (n // 3 + 1)} points; equality residuals "
                    f"{eq_lo:.1e} (|z1|=|z2|), {eq_hi:.1e} (z2=0); det_e error {det_err:.1e}")
        assert bad == 0
        assert eq_lo <= 1e-10 and eq_hi <= 1e-10
        assert det_err <= 1e-10


def test_criterion_5_curvature_decay(acceptance):
    with acceptance.criterion(5, "curvature decay at m = 1") as note:
        res = tn.curvature_decay(1.0, [10.0, 30.0, 100.0])
        note.append(f"slope {res['slope']:.3f}, max Ricci {res['ricci_norm'].max():.1e}")
        # informational: at m = 0.1 the same radii sit before the R^-3 regime
        small = tn.curvature_decay(0.1, [10.0, 30.0, 100.0])
        note.append(f"m = 0.1 on the same radii: slope {small['slope']:.3f} (informational)")
        assert -3.3 <= res["slope"] <= -2.8
        assert res["ricci_norm"].max() <= 1e-4


@pytest.mark.parametrize("k", [2, 3, 5])
def test_criterion_6_dihedral(acceptance, k):
    with acceptance.criterion(6, "binary dihedral invariance") as note:
        rows = suites.suite_dihedral(1.0, suites.suite_rng(k, "dihedral"), 20, k=k)
        phi, metric, syz = _worst(rows, "phi"), _worst(rows, "metric"), _worst(rows, "syzygy")
        wit = _worst(rows, "tetrahedral_witness")
        ax = dh.check_group_axioms(k)
        note.append(f"k={k}: phi {phi:.1e}, metric {metric:.1e}, syzygy {syz:.1e}, "
                    f"witness {wit:.2f}")
        assert ax["order"] == 4 * k
        assert phi <= 1e-9 and metric <= 1e-9
        assert syz <= 1e-10
        assert wit >= 1e-3


@pytest.fixture(scope="module")
def tuned():
    t0 = time.perf_counter()
    out = gl.auto_tune(1.0, gl.ALEModel("synthetic"), np.random.default_rng(7))
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_criterion_7_gluing_positivity(acceptance, tuned):
    with acceptance.criterion(7, "gluing") as note:
        cfg = tuned["config"]
        t0 = time.perf_counter()
        x = gl.sweep_points(np.random.default_rng(70), 10_000, 0.25 * cfg.r0, cfg.r0 + 4)
        rep = gl.positivity_sweep(cfg, x)
        flux = gl.flux_obstruction(cfg)
        elapsed = tuned["elapsed"] + time.perf_counter() - t0
        note.append(f"K={cfg.K:g} r0={cfg.r0:.3f} beta={cfg.beta:g}: min eig {rep['min_eig']:.3g} "
                    f"({rep['n_negative']} of 10000 negative), zone margins "
                    f"{rep['margin_inside']:.2g}/{rep['margin_annulus']:.2g}/"
                    f"{rep['margin_outside']:.2g}, annulus line flux "
                    f"{flux['annulus_flux']:.3g}, {elapsed:.1f} s")
        assert elapsed <= 60
        assert rep["positive"], "glued form is not positive on the sweep"
        assert rep["zone_bounds_hold"], "zone lower bounds fail"


def test_criterion_7_gluing_decay(acceptance, tuned):
    with acceptance.criterion(7, "gluing") as note:
        cfg = tuned["config"]
        R0 = 0.5 * (cfg.r0 + 2) ** 2
        rep = gl.decay_report(cfg, [R0 * 2 ** j for j in range(5)])
        note.append(f"decay slope {rep['slope_deviation']:.3f}, "
                    f"volume slope {rep['slope_volume']:.3f}")
        assert -3.3 <= rep["slope_deviation"] <= -2.7


def test_criterion_8_monge_ampere(acceptance):
    with acceptance.criterion(8, "Monge-Ampere solver at 17^4") as note:
        t0 = time.perf_counter()
        bg = ma.BackgroundKahler("taubnut", 1.0)
        grid = ma.Grid(n=17)
        zero = ma.continuity_method(bg, ma.GridField(grid))
        note.append(f"f=0: |phi| {zero.phi.max_norm():.1e}")
        assert zero.success and zero.phi.max_norm() <= 1e-10

        study = ma.manufactured_study(bg, intervals=(6, 12, 24))
        note.append("orders " + "/".join(f"{o:.2f}" for o in study["orders"]))
        assert all(abs(o - 2) <= 0.3 for o in study["orders"])

        f = ma.GridField.from_function(grid, lambda x: ma.bump(x, np.zeros(4), 1.0, 0.1))
        assert f.max_norm() == pytest.approx(0.1)
        state = ma.continuity_method(bg, f)
        ratios = state.newton_ratios()
        note.append(f"bump path t={state.t:g}, residual {state.residual:.1e}, "
                    f"max Newton ratio {max(ratios):.2f}")
        assert state.success and state.t == 1.0 and state.residual <= 1e-8
        assert len(ratios) > 0 and max(ratios) < 10

        guess = ma.GridField.from_function(grid, lambda x: ma.bump(x, [0.2, -0.1, 0.1, 0.0],
                                                                   0.9, 0.03))
        other = ma.continuity_method(bg, f, phi0=guess)
        direct, _ = ma.newton_solve(bg, f, 1.0, guess)
        diff = max(np.abs(other.phi.values - state.phi.values).max(),
                   np.abs(direct.values - state.phi.values).max())
        note.append(f"uniqueness {diff:.1e}")
        assert other.success and diff <= 1e-7

        tb = ma.trace_bound(state.phi, bg, f)
        note.append(f"trace ratio min {tb['min_ratio']:.6f}")
        assert tb["holds"]
        elapsed = time.perf_counter() - t0
        note.append(f"{elapsed:.0f} s")
        assert elapsed <= 300


def test_criterion_9_sobolev_hardy(acceptance):
    with acceptance.criterion(9, "Sobolev/Hardy empirical bounds") as note:
        rep = ma.sobolev_study(ma.BackgroundKahler("taubnut", 1.0))
        note.append(f"refinement change {rep['refinement_change']:.1%}, scale growth "
                    f"{rep['scale_growth']:.1%}, Hardy max {rep['max_hardy']:.3f} "
                    f"(refinement {rep['hardy_refinement_change']:.1%})")
        assert rep["refinement_change"] <= 0.10
        assert rep["scale_growth"] <= 0.10
        assert rep["hardy_refinement_change"] <= 0.10
        assert rep["max_hardy"] <= 4


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-rN"]))
