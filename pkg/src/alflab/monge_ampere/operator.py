"""Discrete complex Monge-Ampere operator and its linearization.

For a background ``h_Y`` and a grid potential ``phi`` put
``A = h_Y + phi_{j kbar}``.  The discrete equation at time ``t`` is

    F_t(phi) = det A / det h_Y - e^{t f} = 0,

and its exact derivative is ``psi -> (det A / det h_Y) tr(A^{-1} psi_{j kbar})``.
At a solution this is ``-(e^{tf}/2) Delta_t`` where ``Delta_t = d^*d`` is the
non-negative Laplacian of the metric of ``A``.
"""

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import GridField, _mixed, _pure, complex_hessian, hermitian_det, hermitian_min_eig

__all__ = [
    "ConeExit", "LinearSolveError", "kahler_matrix", "ma_residual",
    "LinearizedOperator", "linearized_solve",
]


class ConeExit(RuntimeError):
    """``h_Y + i ddbar phi`` fails to be positive at some node."""

    def __init__(self, msg, n_bad=0, min_eig=np.nan):
        super().__init__(msg)
        self.n_bad = n_bad
        self.min_eig = min_eig


class LinearSolveError(RuntimeError):
    pass


def kahler_matrix(phi: GridField, bg):
    """``A = h_Y + phi_{j kbar}`` at the interior nodes."""
    return bg.on_grid(phi.grid) + complex_hessian(phi.padded(), phi.grid.h)


def _cone_check(A):
    lam = hermitian_min_eig(A)
    bad = ~(lam > 0)
    if np.any(bad):
        raise ConeExit(f"left the Kaehler cone at {int(bad.sum())} nodes "
                       f"(min eigenvalue {lam.min():.3e})", int(bad.sum()), float(lam.min()))
    return float(lam.min())


def ma_residual(phi: GridField, bg, f: GridField, t=1.0, check=True):
    """``det(h_Y + i ddbar phi)/det h_Y - e^{t f}`` as a grid field.

    With ``check`` a non-positive node raises :class:`ConeExit`.
    """
    A = kahler_matrix(phi, bg)
    if check:
        _cone_check(A)
    hY = bg.on_grid(phi.grid)
    res = hermitian_det(A) / hermitian_det(hY) - np.exp(t * f.values)
    return GridField(phi.grid, res, 0.0)


class LinearizedOperator:
    """``L psi = (det A/det h_Y) tr(A^{-1} psi_{j kbar})`` with zero Dirichlet data."""

    def __init__(self, phi: GridField, bg, check=True):
        self.grid = phi.grid
        A = kahler_matrix(phi, bg)
        if check:
            self.min_eig = _cone_check(A)
        hY = bg.on_grid(self.grid)
        detA = hermitian_det(A)
        c = detA / hermitian_det(hY)
        # entries of A^{-1}
        b11 = A[..., 1, 1].real / detA
        b22 = A[..., 0, 0].real / detA
        b12 = -A[..., 0, 1] / detA
        # tr(B H) = b11 H11 + b22 H22 + 2 Re(conj(b12) H12)
        self.c11 = 0.25 * c * b11
        self.c22 = 0.25 * c * b22
        self.cre = 0.5 * c * b12.real
        self.cim = 0.5 * c * b12.imag
        h = self.grid.h
        self.diag = -2 * (self.c11 * (1 / h[0] ** 2 + 1 / h[1] ** 2)
                          + self.c22 * (1 / h[2] ** 2 + 1 / h[3] ** 2))
        if check and not np.all(self.diag < 0):
            raise ConeExit("indefinite discrete operator")

    def apply(self, psi):
        h = self.grid.h
        P = np.zeros((self.grid.n + 2,) * 4)
        P[1:-1, 1:-1, 1:-1, 1:-1] = np.reshape(psi, self.grid.shape)
        out = (self.c11 * (_pure(P, 0, h) + _pure(P, 1, h))
               + self.c22 * (_pure(P, 2, h) + _pure(P, 3, h))
               + self.cre * (_mixed(P, 0, 2, h) + _mixed(P, 1, 3, h))
               + self.cim * (_mixed(P, 0, 3, h) - _mixed(P, 1, 2, h)))
        return out

    def as_linear_operator(self):
        N = self.grid.size
        return LinearOperator((N, N), matvec=lambda v: self.apply(v).ravel(), dtype=float)

    def solve(self, rhs, rtol=1e-10, x0=None, maxiter=4000, restart=60):
        """Solve ``L psi = rhs`` by preconditioned GMRES; returns ``(psi, info)``."""
        b = np.asarray(rhs, dtype=float).ravel()
        bnorm = np.linalg.norm(b)
        if bnorm == 0:
            return np.zeros(self.grid.shape), {"iterations": 0, "relres": 0.0}
        dinv = 1 / self.diag.ravel()
        M = LinearOperator(b.shape * 2, matvec=lambda v: dinv * v, dtype=float)
        count = [0]

        def cb(_):
            count[0] += 1

        x, flag = gmres(self.as_linear_operator(), b, x0=x0, rtol=rtol, atol=0.0,
                        restart=restart, maxiter=maxiter, M=M, callback=cb,
                        callback_type="pr_norm")
        relres = np.linalg.norm(self.apply(x).ravel() - b) / bnorm
        if flag != 0 and relres > 10 * rtol:
            raise LinearSolveError(f"GMRES stopped at relative residual {relres:.2e}")
        return x.reshape(self.grid.shape), {"iterations": count[0], "relres": float(relres)}


def linearized_solve(phi: GridField, bg, rhs: GridField, rtol=1e-10):
    """Solve ``-(e^{tf}/2) Delta_t psi = rhs`` with zero boundary values.

    ``Delta_t = d^*d`` is the non-negative Laplacian of ``omega_phi``, so the
    discrete operator is :class:`LinearizedOperator`; ``rhs >= 0`` gives
    ``psi <= 0``.
    """
    op = LinearizedOperator(phi, bg)
    psi, _ = op.solve(rhs.values, rtol=rtol)
    return GridField(phi.grid, psi, 0.0)
