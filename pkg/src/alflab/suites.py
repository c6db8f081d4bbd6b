"""Randomised verification suites with per-check residual rows.

Each suite returns a list of :class:`Check` rows.  A row compares a
measured ``value`` with ``tol`` according to ``mode``:
``"le"`` (value <= tol), ``"ge"`` (value >= tol) or ``"in"`` (value in the
closed interval ``tol``).  Point checks are dispatched over a thread pool
capped by ``ALFLAB_THREADS`` and collected in point order.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dihedral as dh
from . import gluing as gl
from . import taubnut as tn
from . import tensor as tc

__all__ = ["Check", "SUITES", "run_suite", "suite_rng", "max_threads", "first_failure"]

SUITES = ("taubnut-identities", "dihedral", "gluing", "frames", "curvature")


@dataclass
class Check:
    suite: str
    point: int
    check: str
    value: float
    tol: object
    mode: str
    identity: str

    @property
    def passed(self):
        v = self.value
        if not np.isfinite(v):
            return False
        if self.mode == "le":
            return v <= self.tol
        if self.mode == "ge":
            return v >= self.tol
        lo, hi = self.tol
        return lo <= v <= hi

    def row(self):
        tol = self.tol if self.mode != "in" else f"[{self.tol[0]}, {self.tol[1]}]"
        return {"suite": self.suite, "point": self.point, "check": self.check,
                "value": f"{self.value:.6e}", "tol": tol, "mode": self.mode,
                "passed": int(self.passed), "identity": self.identity}


def max_threads():
    try:
        return max(1, int(os.environ.get("ALFLAB_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def suite_rng(seed, suite):
    """Independent stream for ``suite`` split from a single seed."""
    ss = np.random.SeedSequence(seed).spawn(len(SUITES))[SUITES.index(suite)]
    return np.random.default_rng(ss)


def _pmap(fn, items):
    items = list(items)
    with ThreadPoolExecutor(max_workers=max_threads()) as ex:
        return list(ex.map(fn, items))


def _rel(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), np.abs(a).max(), 1e-300))


def first_failure(rows):
    for r in rows:
        if not r.passed:
            return r
    return None


# -- Taub-NUT identities ------------------------------------------------------

def taubnut_point_checks(p, i=0, suite="taubnut-identities"):
    w = tn.kahler_form_f(p)
    G = tn.metric_f(p)
    J1, J2, J3 = tn.hyperkahler_triple(p)
    re, im = tn.holomorphic_symplectic()
    S = tn.coordinate_balance(p)
    Si = np.linalg.inv(S)
    J1, J2, J3 = (Si @ J @ S for J in (J1, J2, J3))
    Gb = S @ G @ S
    C = lambda name, v, tol, ident: Check(suite, i, name, float(v), tol, "le", ident)
    return [
        C("omega_squared", abs(tc.two_form_wedge_ratio(w, w) - 2), 1e-9,
          "the Kaehler form squares to twice the Euclidean volume form"),
        C("eta_xi", abs(tn.eta_at(p) @ tn.xi_at(p) - 1), 1e-10,
          "the connection form takes the value 1 on the circle generator"),
        C("gibbons_hawking", _rel(tn.gibbons_hawking_metric(p), G), 1e-9,
          "V dy^2 + eta^2 / V reassembles the metric omega(., I1 .)"),
        C("eta_log_forms", _rel(tn.eta_from_log_forms(p), tn.eta_at(p)), 1e-9,
          "eta equals the weighted combination of d^c log|z_j|^2"),
        C("implicit_system", max(p.residuals().values()), 1e-12,
          "(u, v) solve the implicit moment-map system"),
        C("det_e", abs(np.linalg.det(G) - 1), 1e-9,
          "the Euclidean determinant of the metric is 1"),
        C("j1_is_i1", np.abs(J1 - tc.I1).max(), 1e-9,
          "the first complex structure of the triple is I1"),
        C("quaternion", np.abs(J1 @ J2 - J3).max(), 1e-9,
          "the triple satisfies J1 J2 = J3"),
        C("holomorphic_symplectic", max(_rel(J2.T @ Gb, re), _rel(J3.T @ Gb, im)), 1e-9,
          "omega_2 + i omega_3 equals dz1 ^ dz2"),
    ]


def suite_taubnut(m, rng, n, **_):
    pts = tn.sample_points(rng, m, n)
    rows = _pmap(lambda ip: taubnut_point_checks(ip[1], ip[0]), enumerate(pts))
    return [c for r in rows for c in r]


# -- frames -------------------------------------------------------------------

def d_eta_check(p, rel=1e-2):
    """Relative error of the difference ``d eta`` against ``*dV``."""
    h = tn._axis_steps(p, rel)
    field = lambda x: tn.eta_at(tn.TaubNutPoint.from_real(x, p.m))
    d_eta = tc.exterior_derivative(field, p.x, h, order=4)
    return _rel(d_eta, tn.star_dV(p))


def bracket_check(p, rel=1e-2):
    """Relative error of the numerical brackets against the closed forms."""
    num = tn.numerical_brackets(p, rel)
    exact = tn.bracket_table(p)
    return float(np.abs(num - exact).max() / np.abs(exact).max())


def frame_point_checks(p, i=0, suite="frames"):
    G = tn.metric_f(p)
    E, Cf = tn.frame(p)
    A, B = tn.dictionary_dx(p)
    F = np.stack([tn.eta_at(p), *tn.dy_forms(p)])
    xi, zeta = tn.xi_at(p), tn.zeta_at(p)
    Vm = np.stack([xi, tc.I1 @ xi, zeta, tc.I1 @ zeta])
    S = tn.coordinate_balance(p)
    Si = np.linalg.inv(S)
    C = lambda name, v, tol, ident: Check(suite, i, name, float(v), tol, "le", ident)
    return [
        C("orthonormal", np.abs(E.T @ G @ E - np.eye(4)).max(), 1e-9,
          "the frame e0..e3 is orthonormal"),
        C("dual", np.abs(Cf @ E - np.eye(4)).max(), 1e-9,
          "the coframe is dual to the frame"),
        C("dictionary_forms", np.abs(Si @ (A @ F) @ S - np.eye(4)).max(), 1e-9,
          "dx_j expands correctly in eta, dy1, dy2, dy3"),
        C("dictionary_vectors", np.abs(S @ (B @ Vm) @ Si - np.eye(4)).max(), 1e-9,
          "d/dx_j expands correctly in xi, I1 xi, zeta, I1 zeta"),
        C("d_eta", d_eta_check(p), 1e-5, "d eta equals the flat Hodge star of dV"),
        C("brackets", bracket_check(p), 1e-4,
          "frame commutators match the closed-form structure constants"),
    ]


def suite_frames(m, rng, n, **_):
    pts = tn.sample_points(rng, m, n, R_range=(5.0, 50.0), y1_max=0.9)
    rows = _pmap(lambda ip: frame_point_checks(ip[1], ip[0]), enumerate(pts))
    return [c for r in rows for c in r]


# -- curvature ----------------------------------------------------------------

def curvature_radii(m, radii=(10.0, 30.0, 100.0)):
    """Probe radii scaled so that ``m R >= 10`` at the smallest one."""
    s = max(1.0, 1.0 / m)
    return [r * s for r in radii]


def suite_curvature(m, rng, n, radii=None, **_):
    radii = curvature_radii(m) if radii is None else list(radii)
    res = tn.curvature_decay(m, radii)
    rows = []
    for j, R in enumerate(res["R"]):
        rows.append(Check("curvature", j, f"ricci_R={R:g}", float(res["ricci_norm"][j]), 1e-4,
                          "le", "the Taub-NUT metric is Ricci-flat"))
        rows.append(Check("curvature", j, f"rm_norm_R={R:g}", float(res["rm_norm"][j]), 0.0,
                          "ge", "curvature norm (recorded for the decay fit)"))
    rows.append(Check("curvature", len(radii), "slope_R", res["slope"], (-3.3, -2.8), "in",
                      "the curvature norm decays like R^-3"))
    D = 1 + 4 * m * np.asarray(res["R"])
    sD = float(np.polyfit(np.log(D), np.log(res["rm_norm"]), 1)[0])
    rows.append(Check("curvature", len(radii) + 1, "slope_1+4mR", sD, (-3.05, -2.95), "in",
                      "the curvature norm decays like (1 + 4 m R)^-3"))
    return rows


# -- dihedral -----------------------------------------------------------------

def _complex_samples(rng, n, scale=1.5):
    z = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return z * scale / np.sqrt(2)


def suite_dihedral(m, rng, n, k=2, **_):
    rows = []
    ax = dh.check_group_axioms(k)
    rows.append(Check("dihedral", 0, "group_order", abs(ax["order"] - 4 * k), 0, "le",
                      "the binary dihedral group has 4k distinct elements"))
    for key, ident in (("det", "every element has determinant 1"),
                       ("unitary", "every element is unitary"),
                       ("closure", "products follow the normal-form multiplication")):
        rows.append(Check("dihedral", 0, key, ax[key], 1e-12, "le", ident))
    zs = _complex_samples(rng, n)

    def per_point(iz):
        i, z = iz
        out = [Check("dihedral", i, "syzygy", dh.syzygy_residual(z, k), 1e-10, "le",
                     "the invariants satisfy U^2 + V^2 W + W^(k+1) = 0")]
        inv = dh.check_potential_invariance(k, m, [z])
        for key, ident in (("u_zeta", "u is invariant under zeta_k"),
                           ("v_zeta", "v is invariant under zeta_k"),
                           ("u_tau", "tau swaps u and v (u side)"),
                           ("v_tau", "tau swaps u and v (v side)"),
                           ("phi", "the potential is invariant under the group")):
            out.append(Check("dihedral", i, key, inv[key], 1e-9, "le", ident))
        out.append(Check("dihedral", i, "metric", dh.check_metric_invariance(k, m, [z]), 1e-9,
                         "le", "every group element is an isometry of the metric"))
        return out

    for r in _pmap(per_point, enumerate(zs)):
        rows.extend(r)
    rows.append(Check("dihedral", n, "tetrahedral_witness", dh.tetrahedral_defect(m, zs[:20]),
                      1e-3, "ge", "the tetrahedral generator does not preserve the potential"))
    return rows


# -- gluing -------------------------------------------------------------------

def closedness_check(cfg, x, rel=0.02):
    """Relative error of a difference ``dd^c`` of the total potential against ``omega_m``."""
    x = np.asarray(x, dtype=float)
    h = rel * max(1.0, np.linalg.norm(x)) / (1 + 4 * cfg.m * 0.5 * x @ x)
    pot = lambda q: gl.total_potential(cfg, q[None, :])[0]
    grad = lambda q: tc.jacobian(lambda s: np.atleast_1d(pot(s)), q, h)[0]
    # d d^c Phi = d (I1 dPhi)
    w_fd = tc.exterior_derivative(lambda s: tc.act_on_form(tc.I1, grad(s)), x, h, order=4)
    return _rel(w_fd, gl.omega_m(cfg, x))


def suite_gluing(m, rng, n, sweep_n=10_000, **_):
    ale = gl.ALEModel("synthetic")
    tuned = gl.auto_tune(m, ale, rng)
    cfg = tuned["config"]
    rows = []
    x = gl.sweep_points(rng, sweep_n, 0.25 * cfg.r0, cfg.r0 + 4)
    rep = gl.positivity_sweep(cfg, x)
    rows.append(Check("gluing", 0, "min_eigenvalue", rep["min_eig"], 0.0, "ge",
                      "the glued form is positive at every sweep point"))
    for zone, ident in (("inside", "omega_m >= omega_g inside r0"),
                        ("annulus", "omega_m >= omega_f / 4 on the gluing annulus"),
                        ("outside", "omega_m >= omega_f / 2 beyond r0 + 1")):
        rows.append(Check("gluing", 0, f"zone_{zone}", rep[f"margin_{zone}"], 0.0, "ge", ident))
    flux = gl.flux_obstruction(cfg)
    rows.append(Check("gluing", 0, "annulus_line_flux", flux["annulus_flux"], 0.0, "ge",
                      "the flux of omega_m through the line z2 = 0 grows across the annulus"))
    radii = _decay_radii(cfg)
    dec = gl.decay_report(cfg, radii)
    rows.append(Check("gluing", 0, "decay_slope", dec["slope_deviation"], (-3.3, -2.7), "in",
                      "|g_m - f|_f decays like R^-3 with the synthetic ALE term"))
    rows.append(Check("gluing", 0, "volume_slope", dec["slope_volume"], (-3.3, -2.7), "in",
                      "the volume form of g_m approaches that of f like R^-3"))
    flat = gl.decay_report(gl.GluingConfig(m, cfg.K, cfg.r0, cfg.beta, gl.ALEModel()), radii)
    rows.append(Check("gluing", 0, "euclidean_deviation", float(flat["deviation"].max()), 1e-12,
                      "le", "with the flat ALE model g_m equals f beyond the annulus"))
    pts = gl.sweep_points(rng, n, 0.5 * cfg.r0, cfg.r0 + 2)
    close = _pmap(lambda q: closedness_check(cfg, q), pts)
    for i, v in enumerate(close):
        rows.append(Check("gluing", i + 1, "closed", v, 1e-5, "le",
                          "omega_m equals dd^c of the glued potential"))
    return rows


def _decay_radii(cfg, count=5):
    R0 = 0.5 * (cfg.r0 + 2) ** 2
    return [R0 * 2 ** j for j in range(count)]


_RUNNERS = {
    "taubnut-identities": suite_taubnut,
    "dihedral": suite_dihedral,
    "gluing": suite_gluing,
    "frames": suite_frames,
    "curvature": suite_curvature,
}


def run_suite(name, m=1.0, seed=0, n=100, k=2, **kw):
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return _RUNNERS[name](m=m, rng=suite_rng(seed, name), n=n, k=k, **kw)
