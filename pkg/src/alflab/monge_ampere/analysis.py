"""Diagnostics for the discrete Monge-Ampere solutions.

* manufactured solutions and observed convergence order;
* the pointwise trace bound ``tr_g g_phi >= 4 e^{f/2}``;
* weighted C^{k,alpha}_delta norms with a smooth radius ``rho``;
* empirical Sobolev and Hardy ratios on the background;
* the Aubin-Yau identity for ``Delta'(Delta phi)``.

Laplacians here are complex traces, ``Delta u = g^{j kbar} u_{j kbar} =
tr(h^{-1} u_{j kbar})``; the Riemannian trace of ``g_phi`` against ``g`` is
``2 tr(h_Y^{-1} A)``.
"""

from dataclasses import dataclass

import numpy as np

from .. import tensor as tc
from .continuity import newton_solve
from .grid import (BackgroundKahler, Grid, GridField, bump, complex_hessian, gradient,
                   hermitian_det, real_hessian)
from .operator import kahler_matrix

__all__ = [
    "manufactured_solution", "manufactured_study", "trace_bound", "WeightedNorm",
    "weighted_norm", "radial_bump_field", "sobolev_check", "sobolev_study",
    "aubin_yau_probe",
]


def _sin_product(grid, eps):
    x = grid.nodes()
    lo, up = np.asarray(grid.lower), np.asarray(grid.upper)
    k = np.pi / (up - lo)
    s = np.sin(k * (x - lo))
    c = np.cos(k * (x - lo))
    val = eps * np.prod(s, axis=-1)
    H = np.empty(val.shape + (4, 4))
    for a in range(4):
        H[..., a, a] = -k[a] ** 2 * val
        for b in range(a + 1, 4):
            rest = np.prod([s[..., j] for j in range(4) if j not in (a, b)], axis=0)
            H[..., a, b] = H[..., b, a] = eps * k[a] * k[b] * c[..., a] * c[..., b] * rest
    return val, H


def manufactured_solution(grid: Grid, bg: BackgroundKahler, eps=0.05):
    """Exact ``phi* = eps prod sin(pi (x_a - lo_a)/L_a)`` and its ``f``.

    ``f = log det(h_Y + phi*_{j kbar}) - log det h_Y`` from the analytic
    Hessian, so ``phi*`` solves the continuous equation with zero data.
    """
    val, H = _sin_product(grid, eps)
    cH = 0.25 * np.einsum("ja,kb,...ab->...jk", tc.DZBAR, tc.DZ, H)
    hY = bg.on_grid(grid)
    f = np.log(hermitian_det(hY + cH) / hermitian_det(hY))
    return GridField(grid, val), GridField(grid, f)


def manufactured_study(bg, intervals=(6, 12, 24), eps=0.05, lower=-1.5, upper=1.5, tol=1e-11):
    """Max-norm error of the discrete solution against ``phi*`` per grid."""
    rows = []
    for N in intervals:
        grid = Grid((lower,) * 4, (upper,) * 4, N - 1)
        exact, f = manufactured_solution(grid, bg, eps)
        phi, info = newton_solve(bg, f, 1.0, GridField(grid), tol=tol)
        rows.append({"intervals": N, "h": float(grid.h[0]),
                     "error": float(np.abs(phi.values - exact.values).max()),
                     "newton": len(info["residuals"]) - 1})
    orders = [float(np.log(a["error"] / b["error"]) / np.log(a["h"] / b["h"]))
              for a, b in zip(rows, rows[1:])]
    return {"rows": rows, "orders": orders}


def trace_bound(phi: GridField, bg, f: GridField, t=1.0, rtol=1e-8):
    """Check ``2 tr(h_Y^{-1} A) >= 4 e^{t f/2}`` at every interior node.

    ``rtol`` absorbs the solver residual: by AM-GM the bound is attained
    where ``A`` is a multiple of ``h_Y``.
    """
    A = kahler_matrix(phi, bg)
    hY = bg.on_grid(phi.grid)
    tr = 2 * np.einsum("...ij,...ji->...", np.linalg.inv(hY), A).real
    bound = 4 * np.exp(0.5 * t * f.values)
    q = tr / bound
    return {"min_ratio": float(q.min()), "holds": bool(np.all(q >= 1 - rtol)),
            "n_violations": int(np.sum(q < 1 - rtol))}


@dataclass
class WeightedNorm:
    """Parameters of the ``C^{k,alpha}_delta`` norm and ``rho`` at the nodes."""

    k: int
    alpha: float
    delta: float
    rho: np.ndarray
    cap: float = np.inf

    def __post_init__(self):
        if self.k < 0 or self.k > 2:
            raise ValueError("order k must be 0, 1 or 2")
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if np.any(np.asarray(self.rho) <= 0):
            raise ValueError("rho must be positive")


def _derivative_norms(field: GridField, k):
    P = field.padded()
    h = field.grid.h
    out = [np.abs(field.values)]
    if k >= 1:
        out.append(np.linalg.norm(gradient(P, h), axis=-1))
    if k >= 2:
        out.append(np.linalg.norm(real_hessian(P, h), axis=(-2, -1)))
    return out


def _top_derivative(field, k):
    P = field.padded()
    h = field.grid.h
    if k == 0:
        return field.values[..., None]
    if k == 1:
        return gradient(P, h)
    return real_hessian(P, h).reshape(field.grid.shape + (16,))


def weighted_norm(field: GridField, spec: WeightedNorm, mask=None):
    """Discrete ``C^{k,alpha}_delta`` norm on the nodes selected by ``mask``.

    ``sum_j sup rho^{delta+j} |D^j u|`` plus, when ``alpha > 0``, the sampled
    seminorm ``min(rho)^{delta+k+alpha} |D^k u(x) - D^k u(y)| / |x-y|^alpha``
    over node pairs one or two cells apart along an axis with ``|x-y| <= cap``.
    """
    rho = np.broadcast_to(spec.rho, field.grid.shape)
    mask = np.ones(field.grid.shape, bool) if mask is None else np.asarray(mask, bool)
    total = 0.0
    for j, d in enumerate(_derivative_norms(field, spec.k)):
        total += float((rho ** (spec.delta + j) * d)[mask].max())
    if spec.alpha > 0:
        D = _top_derivative(field, spec.k)
        w = spec.delta + spec.k + spec.alpha
        semi = 0.0
        for a in range(4):
            for s in (1, 2):
                dist = s * field.grid.h[a]
                if dist > spec.cap:
                    continue
                lo = [slice(None)] * 4
                hi = [slice(None)] * 4
                lo[a] = slice(0, -s)
                hi[a] = slice(s, None)
                lo, hi = tuple(lo), tuple(hi)
                diff = np.linalg.norm(D[hi] - D[lo], axis=-1) / dist ** spec.alpha
                q = np.minimum(rho[hi], rho[lo]) ** w * diff
                both = mask[hi] & mask[lo]
                if np.any(both):
                    semi = max(semi, float(q[both].max()))
        total += semi
    return total


def radial_bump_field(grid, scale, center=None):
    """``u = bump(|x - center| / scale)``, vanishing outside the ball."""
    c = np.zeros(4) if center is None else np.asarray(center)
    return GridField(grid, bump(grid.nodes(), c, scale))


def sobolev_check(samples, bg):
    """Empirical Sobolev and Hardy ratios on the background.

    ``S = (int u^4 rho^{-1})^{1/4} / (int |du|^2)^{1/2}`` and
    ``H = int u^2 rho^{-2} / int |du|^2`` with ``dvol = 4 det h_Y dx`` and
    ``|du|^2 = du . G^{-1} du``.  Zero fields give zero on both sides.
    """
    rows = []
    for u in samples:
        grid = u.grid
        if not u.vanishes_on_layer():
            raise ValueError("sample does not vanish on the boundary layer")
        x = grid.nodes()
        vol = 4 * hermitian_det(bg.on_grid(grid)) * grid.cell_volume
        rho = bg.rho(x)
        du = gradient(u.padded(), grid.h)
        Ginv = np.linalg.inv(bg.metric(x))
        grad2 = np.einsum("...a,...ab,...b->...", du, Ginv, du)
        lhs = float(np.sum(u.values ** 4 / rho * vol)) ** 0.25
        dirichlet = float(np.sum(grad2 * vol))
        hardy = float(np.sum(u.values ** 2 / rho ** 2 * vol))
        rhs = dirichlet ** 0.5
        rows.append({"n": grid.n, "lhs": lhs, "rhs": rhs,
                     "ratio": lhs / rhs if rhs > 0 else 0.0,
                     "hardy_ratio": hardy / dirichlet if dirichlet > 0 else 0.0})
    ratios = [r["ratio"] for r in rows]
    return {"rows": rows, "max_ratio": max(ratios) if ratios else 0.0,
            "max_hardy": max((r["hardy_ratio"] for r in rows), default=0.0)}


def sobolev_study(bg, scales=(0.5, 1.0, 2.0), nodes=(17, 25), box=1.5, center=None):
    """Radial bumps of radius ``s`` on boxes of half-width ``box * s``.

    Each scale is evaluated on two grids; returns per-scale ratios and the
    relative growth across scales and under refinement.
    """
    c = np.zeros(4) if center is None else np.asarray(center, float)
    table = []
    for s in scales:
        entry = {"scale": s}
        for n in nodes:
            grid = Grid(tuple(c - box * s), tuple(c + box * s), n)
            r = sobolev_check([radial_bump_field(grid, s, c)], bg)["rows"][0]
            entry[n] = r
        table.append(entry)
    coarse, fine = nodes[0], nodes[-1]
    refine = max(abs(e[fine]["ratio"] / e[coarse]["ratio"] - 1) for e in table)
    refine_h = max(abs(e[fine]["hardy_ratio"] / e[coarse]["hardy_ratio"] - 1) for e in table)
    first = table[0][fine]["ratio"]
    growth = max(e[fine]["ratio"] for e in table) / first - 1
    return {"table": table, "refinement_change": refine, "hardy_refinement_change": refine_h,
            "scale_growth": growth, "max_hardy": max(e[n]["hardy_ratio"] for e in table
                                                    for n in nodes)}


def aubin_yau_probe(phi: GridField, bg, f: GridField, t=1.0, step=1e-2, stride=1):
    """Both sides of the Aubin-Yau identity at interior nodes.

    With ``g' = g + phi_{j kbar}``, ``det g' = e^{tf} det g`` and ``R`` the
    curvature of ``g``,

        Delta'(Delta phi) = t Delta f - S + g'^{k lbar} g'_{i jbar} g^{i qbar} g^{p jbar} R_{p qbar k lbar}
                            + g^{i jbar} g'^{p qbar} g'^{r sbar} nabla_i g'_{p sbar} nabla_jbar g'_{r qbar}.

    The left side uses nested differences of ``tr_g g'``; the background
    curvature and connection come from differences of ``h_Y`` with ``step``.
    ``stride`` thins the probed nodes.
    """
    grid = phi.grid
    h = grid.h
    inner = (slice(1, -1),) * 4
    A = kahler_matrix(phi, bg)
    hY = bg.on_grid(grid)
    hinv = np.linalg.inv(hY)
    T = np.einsum("...ij,...ji->...", hinv, A).real
    A_in = A[inner]
    Ainv = np.linalg.inv(A_in)
    lhs = np.einsum("...ij,...ji->...", Ainv, complex_hessian(T, h)).real
    Hf = complex_hessian(f.padded(), h)[inner]
    lap_f = t * np.einsum("...ij,...ji->...", hinv[inner], Hf).real
    # d_i phi_{p sbar} on the inner nodes
    Hphi = complex_hessian(phi.padded(), h)
    g = gradient(Hphi.real, h) + 1j * gradient(Hphi.imag, h)  # (..., p, s, a)
    dH = 0.5 * np.stack([g[..., 0] - 1j * g[..., 1], g[..., 2] - 1j * g[..., 3]], axis=-3)

    sel = (slice(None, None, stride),) * 4
    lhs, lap_f, A_in, Ainv, dH = lhs[sel], lap_f[sel], A_in[sel], Ainv[sel], dH[sel]
    Hphi_in = Hphi[inner][sel]
    x = grid.nodes()[inner][sel]
    hi = hinv[inner][sel]
    dh, ddh = bg.derivatives(x, step)
    # R[p, q, k, l] = -d_k dbar_l g_{p qbar} + g^{a bbar} d_k g_{p bbar} dbar_l g_{a qbar}
    R = (-np.einsum("...klpq->...pqkl", ddh)
         + np.einsum("...ba,...kpb,...lqa->...pqkl", hi, dh, dh.conj()))
    S = np.einsum("...ji,...lk,...ijkl->...", hi, hi, R).real
    C = np.einsum("...lk,...ij,...qi,...jp,...pqkl->...", Ainv, A_in, hi, hi, R).real
    # Gamma[i, p, a] = g^{a bbar} d_i g_{p bbar};  X[i, p, s] = nabla_i phi_{p sbar}
    Gam = np.einsum("...ba,...ipb->...ipa", hi, dh)
    X = dH - np.einsum("...ipa,...as->...ips", Gam, Hphi_in)
    Q = np.einsum("...ji,...qp,...sr,...ips,...jqr->...", hi, Ainv, Ainv, X, X.conj()).real
    rhs = lap_f - S + C + Q
    scale = max(float(np.abs(v).max()) for v in (lhs, lap_f, S, C, Q))
    disc = float(np.abs(lhs - rhs).max()) / max(scale, 1e-12)
    return {"lhs": lhs, "rhs": rhs, "laplace_f": lap_f, "scalar_curvature": S,
            "curvature_term": C, "third_order": Q, "discrepancy": disc,
            "scale": scale, "h": float(h[0])}
