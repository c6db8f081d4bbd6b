"""Newton iteration and path following in ``t`` for the continuity family.

Continuity family: ``(omega_Y + i ddbar phi_t)^2 = e^{t f} omega_Y^2`` with Dirichlet data,
starting from ``phi_0 = 0``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import GridField
from .operator import ConeExit, LinearizedOperator, LinearSolveError, ma_residual

__all__ = ["NewtonFailure", "ContinuityState", "newton_solve", "continuity_method"]

log = logging.getLogger(__name__)


class NewtonFailure(RuntimeError):
    pass


@dataclass
class ContinuityState:
    t: float
    phi: GridField
    residual: float
    history: list = field(default_factory=list)
    success: bool = True
    last_good_t: float = 0.0
    message: str = ""

    def newton_ratios(self):
        """All logged ``r_{n+1}/r_n^2`` values along the path."""
        return [q for rec in self.history if rec["accepted"] for q in rec["ratios"]]

    def record(self):
        return {
            "t": self.t, "residual": self.residual, "success": self.success,
            "last_good_t": self.last_good_t, "message": self.message,
            "phi_max": self.phi.max_norm(), "history": self.history,
        }


def newton_solve(bg, f: GridField, t, phi0: GridField, tol=1e-8, maxit=25,
                 lin_rtol=1e-10, max_backtrack=8):
    """Damped Newton for ``F_t(phi) = 0`` in the max norm.

    Each accepted iterate stays in the Kaehler cone; a step leaving it is
    halved up to ``max_backtrack`` times.  Returns ``(phi, info)`` where
    ``info`` holds residuals, ``r_{n+1}/r_n^2`` ratios and linear-solve counts.
    """
    phi = phi0.copy()
    res = ma_residual(phi, bg, f, t).values
    rn = float(np.abs(res).max())
    residuals, ratios, lin_its, damping = [rn], [], [], []
    for _ in range(maxit):
        if rn <= tol:
            break
        op = LinearizedOperator(phi, bg)
        delta, info = op.solve(-res, rtol=lin_rtol)
        lin_its.append(info["iterations"])
        lam = 1.0
        for _ in range(max_backtrack + 1):
            trial = phi.copy(phi.values + lam * delta)
            try:
                tres = ma_residual(trial, bg, f, t).values
            except ConeExit:
                lam *= 0.5
                continue
            break
        else:
            raise ConeExit("Newton step cannot be kept inside the Kaehler cone")
        phi, res = trial, tres
        new = float(np.abs(res).max())
        ratios.append(new / rn ** 2 if rn > 0 else 0.0)
        damping.append(lam)
        residuals.append(new)
        log.debug("t=%.4f newton residual %.3e (damping %.3g)", t, new, lam)
        rn = new
    if rn > tol:
        raise NewtonFailure(f"Newton did not reach {tol:.1e} at t={t:.4f} (residual {rn:.2e})")
    return phi, {"residuals": residuals, "ratios": ratios, "linear_iterations": lin_its,
                 "damping": damping}


def continuity_method(bg, f: GridField, dt=0.1, min_dt=1 / 1024, tol=1e-8, phi0=None,
                      allow_boundary_source=False, **newton_kw):
    """Follow the continuity family from ``t = 0`` to ``t = 1``.

    Steps of ``dt`` are halved whenever Newton fails or leaves the cone, and
    grow back after successes.  Below ``min_dt`` the run stops and reports
    the last good ``t``.  ``phi0`` seeds the Newton iteration at the first
    step (the solution of ``(E_0)`` is zero).
    """
    if not allow_boundary_source and not f.vanishes_on_layer():
        raise ValueError("f must vanish on the boundary layer")
    phi = GridField(f.grid) if phi0 is None else phi0.copy()
    t, step = 0.0, dt
    state = ContinuityState(0.0, phi, 0.0)
    while t < 1.0:
        t_next = min(1.0, round(t + step, 12))
        try:
            new, info = newton_solve(bg, f, t_next, phi, tol=tol, **newton_kw)
        except (NewtonFailure, ConeExit, LinearSolveError) as err:
            state.history.append({"t": t_next, "accepted": False, "error": str(err),
                                  "residuals": [], "ratios": []})
            step *= 0.5
            if step < min_dt:
                state.success = False
                state.message = f"step below {min_dt:g} after failure at t={t_next:.4f}: {err}"
                state.t = t
                state.last_good_t = t
                return state
            continue
        t, phi = t_next, new
        state.history.append({"t": t, "accepted": True, **info})
        state.phi, state.t, state.last_good_t = phi, t, t
        state.residual = info["residuals"][-1]
        step = min(dt, 2 * step)
    state.message = "reached t = 1"
    return state
