"""Potential gluing of an ALE model to the Taub-NUT metric.

On the covering space ``C^2`` the glued Kaehler form is

    omega_m = omega_g + dd^c Phi_m,
    Phi_m   = kappa(phi - K) - chi((r - r0)^beta) chi(r - r0) phi0,

with ``phi`` the Taub-NUT potential, ``phi0 = r^2/4`` and
``omega_g = omega_e + dd^c psi0`` the ALE model, so that
``alpha0 = omega_g - dd^c phi0 = dd^c psi0``.  Every ingredient depends on
``(|z1|^2, |z2|^2)`` only, so all (1,1)-forms are computed exactly from the
toric Hessian; finite differences are used only as independent checks.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import taubnut as tn
from . import tensor as tc

__all__ = [
    "chi", "kappa", "ALEModel", "GluingConfig", "glued_potential", "total_potential",
    "hermitian_parts", "omega_m", "metric_m", "zone_of", "generalized_min_eig",
    "positivity_sweep", "sweep_points", "min_phi_on_sphere", "radius_for_level",
    "auto_tune", "decay_report", "line_flux", "flux_obstruction", "nabla_f_dx",
    "nabla_f_dx_christoffel",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


def chi(t, nu=0):
    """Smooth step and its first two derivatives.

    ``chi(t) = 1 / (1 + exp(1/t - 1/(1-t)))`` on ``(0, 1)``, 0 below and 1
    above; it satisfies ``chi(t) + chi(1 - t) = 1``.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    s = np.where(inside, t, 0.5)
    with np.errstate(over="ignore"):
        q = 1 / s - 1 / (1 - s)
        c = 1 / (1 + np.exp(q))
    w = c * (1 - c)
    p = 1 / s ** 2 + 1 / (1 - s) ** 2
    if nu == 0:
        return np.where(inside, c, (t >= 1).astype(float))
    if nu == 1:
        return np.where(inside, w * p, 0.0)
    if nu == 2:
        d1 = w * p
        dp = -2 / s ** 3 + 2 / (1 - s) ** 3
        return np.where(inside, d1 * (1 - 2 * c) * p + w * dp, 0.0)
    raise ValueError("only derivatives up to order 2 are available")


def kappa(t, nu=0):
    """Convex ramp with ``kappa' = chi``.

    ``kappa = 0`` for ``t <= 0`` and ``kappa = t - 1/2`` for ``t >= 1``;
    values on ``(0, 1)`` come from Gauss-Legendre quadrature of ``chi``.
    """
    t = np.asarray(t, dtype=float)
    if nu >= 1:
        return chi(t, nu - 1)
    tc_ = np.clip(t, 0.0, 1.0)
    nodes = 0.5 * tc_[..., None] * (_GL_X + 1)
    inner = 0.5 * tc_ * np.sum(_GL_W * chi(nodes), axis=-1)
    return np.where(t >= 1, t - 0.5, np.where(t <= 0, 0.0, inner))


@dataclass(frozen=True)
class ALEModel:
    """ALE stand-in ``omega_g = omega_e + dd^c psi0``.

    ``euclidean`` has ``psi0 = 0``.  ``synthetic`` uses
    ``psi0 = eps (a - b)^2 (1 + a + b)^{-5}``: the ``a - b`` profile of the
    leading Eguchi-Hanson correction, damped so that
    ``alpha0 = dd^c psi0 = O(r^-8)``; it is invariant under the binary
    dihedral groups.
    """

    name: str = "euclidean"
    eps: float = 0.5

    def __post_init__(self):
        if self.name not in ("euclidean", "synthetic"):
            raise ValueError(f"unknown ALE model {self.name!r}")

    def psi_parts(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.name == "euclidean":
            z = np.zeros(np.broadcast(a, b).shape)
            return z, z, z, z, z
        e = self.eps
        d = a - b
        q = 1 / (1 + a + b)
        q5, q6, q7 = q ** 5, q ** 6, q ** 7
        Fa = e * (2 * d * q5 - 5 * d * d * q6)
        Fb = e * (-2 * d * q5 - 5 * d * d * q6)
        Faa = e * (2 * q5 - 20 * d * q6 + 30 * d * d * q7)
        Fbb = e * (2 * q5 + 20 * d * q6 + 30 * d * d * q7)
        Fab = e * (-2 * q5 + 30 * d * d * q7)
        return Fa, Fb, Faa * a, Fbb * b, Fab

    def psi(self, a, b):
        if self.name == "euclidean":
            return np.zeros(np.broadcast(a, b).shape)
        return self.eps * (a - b) ** 2 / (1 + a + b) ** 5


@dataclass(frozen=True)
class GluingConfig:
    m: float = 1.0
    K: float = 1.0
    r0: float = 5.0
    beta: float = 1.0
    ale: ALEModel = ALEModel()

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.m <= 0:
            raise ValueError("mass must be positive")


def _remover(cfg, r):
    """``P(r) = chi((r-r0)^beta) chi(r-r0) r^2/4`` and its r-derivatives."""
    t = np.asarray(r, dtype=float) - cfg.r0
    b = cfg.beta
    pos = t > 0
    tp = np.where(pos, t, 1.0)
    tb = tp ** b
    A = np.where(pos, chi(tb), 0.0)
    A1 = np.where(pos, chi(tb, 1) * b * tp ** (b - 1), 0.0)
    A2 = np.where(pos, chi(tb, 2) * (b * tp ** (b - 1)) ** 2
                  + chi(tb, 1) * b * (b - 1) * tp ** (b - 2), 0.0)
    B, B1, B2 = chi(t), chi(t, 1), chi(t, 2)
    c = A * B
    c1 = A1 * B + A * B1
    c2 = A2 * B + 2 * A1 * B1 + A * B2
    P = c * r * r / 4
    Pr = c1 * r * r / 4 + c * r / 2
    Prr = c2 * r * r / 4 + c1 * r + c / 2
    return P, Pr, Prr


def _radial_parts(a, b, Pr, Prr, r):
    # toric partials of a function of s = a + b given its r-derivatives
    Ps = Pr / (2 * r)
    Pss = (Prr - Pr / r) / (4 * r * r)
    return Ps, Ps, Pss * a, Pss * b, Pss


def glued_potential(cfg, x):
    """``Phi_m`` at points ``x[..., 4]``."""
    x = np.asarray(x, dtype=float)
    r = np.sqrt(np.sum(x * x, axis=-1))
    phi = tn.potential_from_real(x, cfg.m)
    P = _remover(cfg, r)[0]
    return kappa(phi - cfg.K) - P


def total_potential(cfg, x):
    """Global potential ``r^2/4 + psi0 + Phi_m`` of ``omega_m``."""
    x = np.asarray(x, dtype=float)
    a = x[..., 0] ** 2 + x[..., 1] ** 2
    b = x[..., 2] ** 2 + x[..., 3] ** 2
    return 0.25 * (a + b) + cfg.ale.psi(a, b) + glued_potential(cfg, x)


def hermitian_parts(cfg, x):
    """Hermitian matrices of ``omega_g``, ``omega_f``, ``alpha0`` and ``omega_m``.

    Returns a dict of arrays of shape ``(N, 2, 2)`` together with ``r``,
    ``R``, ``y1`` and ``phi`` per point.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = tn.taubnut_arrays(x, cfg.m)
    z1, z2 = d["z1"], d["z2"]
    a = np.abs(z1) ** 2
    b = np.abs(z2) ** 2
    r = np.sqrt(a + b)
    eye = np.broadcast_to(0.5 * np.eye(2), r.shape + (2, 2))
    h_alpha = 2 * tn.toric_hessian(z1, z2, *cfg.ale.psi_parts(a, b))
    h_g = eye + h_alpha
    pa, pb, paa_a, pbb_b, pab = d["parts"]
    t = d["phi"] - cfg.K
    k1, k2 = kappa(t, 1), kappa(t, 2)
    H_kappa = tn.toric_hessian(z1, z2, k1 * pa, k1 * pb,
                               k2 * pa * pa * a + k1 * paa_a,
                               k2 * pb * pb * b + k1 * pbb_b,
                               k2 * pa * pb + k1 * pab)
    _, Pr, Prr = _remover(cfg, r)
    H_P = tn.toric_hessian(z1, z2, *_radial_parts(a, b, Pr, Prr, r))
    # group the pieces that cancel exactly beyond the annulus, so that
    # h_m - h_f keeps the small alpha0 term free of rounding
    h_dev = h_alpha + (eye - 2 * H_P) + (2 * H_kappa - d["h"])
    h_m = d["h"] + h_dev
    return {"h_m": h_m, "h_dev": h_dev, "h_g": h_g, "h_f": d["h"], "h_alpha": h_alpha,
            "r": r, "R": d["R"], "y1": d["y1"], "phi": d["phi"]}


def omega_m(cfg, x):
    """Glued Kaehler form at a single point as a 4x4 matrix."""
    return tc.herm_to_form(hermitian_parts(cfg, x)["h_m"][0])


def metric_m(cfg, x):
    """Riemannian metric ``g_m`` at a single point."""
    return tc.metric_from_form(omega_m(cfg, x))


def zone_of(cfg, r):
    """0 inside ``r < r0``, 1 on the annulus, 2 beyond ``r0 + 1``."""
    r = np.asarray(r)
    return np.where(r < cfg.r0, 0, np.where(r <= cfg.r0 + 1, 1, 2))


def generalized_min_eig(A, B):
    """Smallest ``lambda`` with ``A - lambda B`` singular, for stacks of PD ``B``."""
    L = np.linalg.cholesky(B)
    Li = np.linalg.inv(L)
    M = Li @ A @ np.conj(np.swapaxes(Li, -1, -2))
    return np.linalg.eigvalsh(M)[..., 0]


def sweep_points(rng, n, r_min, r_max):
    """Uniform directions on the 3-sphere with ``r`` uniform in ``[r_min, r_max]``."""
    d = rng.normal(size=(n, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(r_min, r_max, size=(n, 1))


def positivity_sweep(cfg, x):
    """Positivity and zone bounds of ``omega_m`` at the points ``x``.

    Zone bounds compare ``omega_m`` with ``omega_g`` inside ``r < r0``,
    with ``omega_f / 4`` on the annulus and with ``omega_f / 2`` beyond;
    each margin is the smallest generalised eigenvalue minus the required
    factor, so nonnegative margins mean the bound holds.
    """
    P = hermitian_parts(cfg, x)
    eig = np.linalg.eigvalsh(P["h_m"])[:, 0]
    zone = zone_of(cfg, P["r"])
    lam_g = generalized_min_eig(P["h_m"], P["h_g"])
    lam_f = generalized_min_eig(P["h_m"], P["h_f"])
    margin = np.where(zone == 0, lam_g - 1.0, np.where(zone == 1, lam_f - 0.25, lam_f - 0.5))
    out = {"min_eig": float(eig.min()), "n": len(eig), "n_negative": int(np.sum(eig <= 0))}
    i = int(np.argmin(eig))
    out["worst_point"] = np.asarray(x)[i].tolist()
    out["worst_r"] = float(P["r"][i])
    for z, name in enumerate(("inside", "annulus", "outside")):
        sel = zone == z
        out[f"margin_{name}"] = float(margin[sel].min()) if np.any(sel) else np.nan
        out[f"count_{name}"] = int(np.sum(sel))
    out["zone_bounds_hold"] = bool(np.all(margin >= -1e-12))
    out["positive"] = out["n_negative"] == 0
    return out


def min_phi_on_sphere(m, r, n_frac=41):
    """Smallest Taub-NUT potential on the sphere of radius ``r``.

    Along the ray ``y1 = c R`` the radius ``r^2 = (R + y1) e^{4 m y1} +
    (R - y1) e^{-4 m y1}`` increases with ``R``, so each ray is solved for
    ``R`` and the potential minimised over a grid of ``c``.
    """
    best = np.inf
    for c in np.linspace(-1, 1, n_frac):
        f = lambda R: ((1 + c) * R * np.exp(4 * m * c * R)
                       + (1 - c) * R * np.exp(-4 * m * c * R) - r * r)
        with np.errstate(over="ignore"):
            R = brentq(f, 0.0, 0.5 * r * r)
        best = min(best, 0.5 * (R + m * (R * R + (c * R) ** 2)))
    return best


def radius_for_level(m, level):
    """Smallest ``r0`` with ``phi >= level`` on ``{r >= r0}``."""
    g = lambda r: min_phi_on_sphere(m, r) - level
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    return brentq(g, 1e-6, hi, xtol=1e-10)


def auto_tune(m, ale=ALEModel(), rng=None, n=4000, K_values=(0.5, 1.0, 2.0, 4.0, 8.0),
              beta_min=1 / 64):
    """Search ``(K, r0, beta)`` for the three zone bounds.

    For each ``K`` the radius ``r0`` is the smallest with ``phi >= K + 1``
    beyond it (so the outer zone is purely Taub-NUT plus ``alpha0``);
    ``beta`` is halved from 1.  Returns the first configuration whose sweep
    satisfies all bounds, otherwise the one with the largest minimum
    eigenvalue, with the full search log.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    log = []
    best = None
    for K in K_values:
        r0 = radius_for_level(m, K + 1)
        x = sweep_points(rng, n, 0.5 * r0, r0 + 3)
        beta = 1.0
        while beta >= beta_min:
            cfg = GluingConfig(m=m, K=K, r0=r0, beta=beta, ale=ale)
            rep = positivity_sweep(cfg, x)
            log.append({"K": K, "r0": r0, "beta": beta, "min_eig": rep["min_eig"],
                        "margin_annulus": rep["margin_annulus"],
                        "zone_bounds_hold": rep["zone_bounds_hold"]})
            ok = rep["positive"] and rep["zone_bounds_hold"]
            if best is None or rep["min_eig"] > best[1]["min_eig"]:
                best = (cfg, rep)
            if ok:
                return {"config": cfg, "report": rep, "satisfied": True, "log": log}
            beta /= 2
    return {"config": best[0], "report": best[1], "satisfied": False, "log": log}


def line_flux(cfg, rho):
    """Integral of ``omega_m`` over the disc ``{|z1| <= rho, z2 = 0}``.

    For a potential ``T(|z1|^2)`` on the line the integral is
    ``4 pi a T_a`` at ``a = rho^2``; positivity of ``omega_m`` forces it to
    increase with ``rho``.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    x = np.zeros((len(rho), 4))
    x[:, 0] = rho
    d = tn.taubnut_arrays(x, cfg.m)
    a = rho * rho
    pa = d["parts"][0]
    Fa = cfg.ale.psi_parts(a, np.zeros_like(a))[0]
    _, Pr, _ = _remover(cfg, rho)
    Ta = 0.25 + Fa + kappa(d["phi"] - cfg.K, 1) * pa - Pr / (2 * rho)
    return 4 * np.pi * a * Ta


def flux_obstruction(cfg):
    """Flux of ``omega_m`` through the annulus part of the line ``z2 = 0``.

    A negative value certifies that ``omega_m`` restricted to that complex
    line is somewhere negative, whatever the sampling.
    """
    f0, f1 = line_flux(cfg, [cfg.r0, cfg.r0 + 1])
    return {"flux_r0": float(f0), "flux_r0p1": float(f1), "annulus_flux": float(f1 - f0)}


def decay_report(cfg, radii, n_angles=3):
    """Decay of ``g_m - f`` and of the volume form in the Taub-NUT region.

    Probes lie on ``{y1 = 0}`` where ``r^2 = 2R`` and must satisfy
    ``r > r0 + 1``.  The volume deviation is taken against ``Omega_f``,
    which equals ``Omega_e = Omega_g``.  Slopes are log-log fits against ``R``
    (deviation, volume) and against ``r`` (``|alpha0|_f``).
    """
    rows = []
    for R in np.asarray(radii, dtype=float):
        dev = vol = al = 0.0
        for j in range(n_angles):
            ang = 2 * np.pi * (j + 0.3) / n_angles
            p = tn.point_from_moment(cfg.m, [0.0, R * np.cos(ang), R * np.sin(ang)], 0.7 * j)
            if np.sqrt(p.r2) <= cfg.r0 + 1:
                raise ValueError(f"R={R} is not beyond the gluing annulus")
            P = hermitian_parts(cfg, p.x)
            G = tn.metric_f(p)
            diff = tc.metric_from_form(tc.herm_to_form(P["h_dev"][0]))
            alpha = tc.metric_from_form(tc.herm_to_form(P["h_alpha"][0]))
            dev = max(dev, tc.tensor_norm(0.5 * (diff + diff.T), G))
            # Omega_m / Omega_f - 1 = det(1 + M) - 1 = tr M + det M
            M = np.linalg.solve(P["h_f"][0], P["h_dev"][0])
            vol = max(vol, abs((np.trace(M) + np.linalg.det(M)).real))
            al = max(al, tc.tensor_norm(0.5 * (alpha + alpha.T), G))
        rows.append((R, np.sqrt(2 * R), dev, vol, al))
    rows = np.array(rows)
    out = {"R": rows[:, 0], "r": rows[:, 1], "deviation": rows[:, 2],
           "volume": rows[:, 3], "alpha0_f": rows[:, 4]}

    def slope(xs, ys):
        if np.all(ys > 0) and len(xs) > 1:
            return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
        return np.nan

    out["slope_deviation"] = slope(out["R"], out["deviation"])
    out["slope_volume"] = slope(out["R"], out["volume"])
    out["slope_alpha0_r"] = slope(out["r"], out["alpha0_f"])
    return out


def nabla_f_dx(j, p, rel=1e-2):
    """``nabla^f dx_j`` as a 4x4 array ``T[a, b]`` (derivative index first).

    Built from the frame: ``dx_j = sum_i dx_j(e_i) e^i`` with the frame
    connection obtained from the structure constants.
    """
    E, C = tn.frame(p)
    G, _ = tn.frame_connection(p, rel)
    steps = tn._axis_steps(p, rel)
    col = lambda x: tn.frame(tn.TaubNutPoint.from_real(x, p.m))[0][j]
    D = tc.jacobian(col, p.x, steps)  # D[i, a] = d_a E[j, i]
    dE = D @ E  # dE[i, l] = e_l(E[j, i])
    T = dE.T - np.einsum("i,lki->lk", E[j], G)  # T(e_l, e_k)
    return C.T @ T @ C


def nabla_f_dx_christoffel(j, p, rel=0.02):
    """``nabla^f dx_j = -Gamma^j_{ab}`` from coordinate Christoffel symbols."""
    return -tc.christoffel(tn.metric_at(p.m), p.x, tn._axis_steps(p, rel))[j]
