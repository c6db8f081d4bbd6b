"""Binary dihedral groups acting on C^2 and their invariants.

The group of order ``4k`` is generated by

    zeta_k = diag(e^{i pi/k}, e^{-i pi/k}),    tau = [[0, 1], [-1, 0]],

acting on column vectors ``(z1, z2)``.  Elements are kept in the normal
form ``zeta_k^a tau^b`` with ``0 <= a < 2k`` and ``b in {0, 1}``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import taubnut as tn

__all__ = [
    "DihedralElement", "generators", "group_elements", "act", "act_real",
    "real_matrix", "invariant_triple", "syzygy_residual", "tetrahedral_generator",
    "check_group_axioms", "check_potential_invariance", "check_metric_invariance",
    "tetrahedral_defect",
]


def generators(k):
    """The matrices ``(zeta_k, tau)``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    w = np.exp(1j * np.pi / k)
    return np.diag([w, 1 / w]), np.array([[0, 1], [-1, 0]], dtype=complex)


@dataclass(frozen=True)
class DihedralElement:
    """The element ``zeta_k^a tau^b``."""

    k: int
    a: int
    b: int

    @cached_property
    def matrix(self):
        zeta, tau = generators(self.k)
        return np.linalg.matrix_power(zeta, self.a) @ np.linalg.matrix_power(tau, self.b)

    def __mul__(self, other):
        # tau zeta = zeta^{-1} tau and tau^2 = zeta^k
        if self.k != other.k:
            raise ValueError("elements of different groups")
        k = self.k
        sgn = -1 if self.b else 1
        a = self.a + sgn * other.a
        b = self.b + other.b
        if b == 2:
            a += k
            b = 0
        return DihedralElement(k, a % (2 * k), b)

    def __repr__(self):
        return f"zeta_{self.k}^{self.a} tau^{self.b}"


def group_elements(k):
    """All ``4k`` elements in normal form."""
    return [DihedralElement(k, a, b) for b in (0, 1) for a in range(2 * k)]


def _matrix(g):
    return g.matrix if isinstance(g, DihedralElement) else np.asarray(g)


def act(g, z):
    """Apply a group element (or any 2x2 matrix) to ``z = (z1, z2)``."""
    return _matrix(g) @ np.asarray(z, dtype=complex)


def real_matrix(M):
    """4x4 real matrix of a complex-linear map of C^2 on ``(x1..x4)``."""
    M = _matrix(M)
    out = np.zeros((4, 4))
    for j in range(2):
        for l in range(2):
            c = M[j, l]
            out[2 * j:2 * j + 2, 2 * l:2 * l + 2] = [[c.real, -c.imag], [c.imag, c.real]]
    return out


def act_real(g, x):
    return real_matrix(g) @ np.asarray(x, dtype=float)


def invariant_triple(z, k):
    """Invariant polynomials ``(U, V, W)`` at ``z``.

    ``U = (z1^{2k+1} z2 - z2^{2k+1} z1)/2``, ``V = i (z1^{2k} + z2^{2k})/2``,
    ``W = z1^2 z2^2``; they satisfy ``U^2 + V^2 W + W^{k+1} = 0``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    z1, z2 = np.asarray(z, dtype=complex)
    U = 0.5 * (z1 ** (2 * k + 1) * z2 - z2 ** (2 * k + 1) * z1)
    V = 0.5j * (z1 ** (2 * k) + z2 ** (2 * k))
    W = z1 ** 2 * z2 ** 2
    return U, V, W


def syzygy_residual(z, k):
    """Relative residual of ``U^2 + V^2 W + W^{k+1}``."""
    U, V, W = invariant_triple(z, k)
    terms = [U * U, V * V * W, W ** (k + 1)]
    scale = max(abs(t) for t in terms)
    return abs(sum(terms)) / scale if scale > 0 else 0.0


def tetrahedral_generator():
    """Extra generator of the binary tetrahedral group (not dihedral)."""
    e = np.exp(1j * np.pi / 4)
    return np.array([[e ** 7, e ** 7], [e ** 5, e]]) / np.sqrt(2)


def check_group_axioms(k):
    """Closure, unit determinant and unitarity of the ``4k`` matrices."""
    els = group_elements(k)
    mats = [g.matrix for g in els]
    err_det = max(abs(np.linalg.det(M) - 1) for M in mats)
    err_unit = max(np.abs(M.conj().T @ M - np.eye(2)).max() for M in mats)
    err_close = 0.0
    for g in els:
        for h in els:
            err_close = max(err_close, np.abs((g * h).matrix - g.matrix @ h.matrix).max())
    distinct = len({tuple(np.round(M, 10).ravel()) for M in mats})
    return {"order": distinct, "det": err_det, "unitary": err_unit, "closure": err_close}


def check_potential_invariance(k, m, samples):
    """Invariance of ``u, v`` and the potential under the group.

    ``samples`` is an iterable of complex pairs.  Rotations preserve
    ``(u, v)``; ``tau`` swaps them.  Returns worst relative residuals.
    """
    zeta = DihedralElement(k, 1, 0)
    tau = DihedralElement(k, 0, 1)
    els = group_elements(k)
    out = {"u_zeta": 0.0, "v_zeta": 0.0, "u_tau": 0.0, "v_tau": 0.0, "phi": 0.0}
    for z in samples:
        z = np.asarray(z, dtype=complex)
        u, v = tn.solve_uv(z[0], z[1], m)
        scale = max(u, v, 1e-300)
        uz, vz = tn.solve_uv(*act(zeta, z), m)
        ut, vt = tn.solve_uv(*act(tau, z), m)
        out["u_zeta"] = max(out["u_zeta"], abs(uz - u) / scale)
        out["v_zeta"] = max(out["v_zeta"], abs(vz - v) / scale)
        out["u_tau"] = max(out["u_tau"], abs(ut - v) / scale)
        out["v_tau"] = max(out["v_tau"], abs(vt - u) / scale)
        phi = tn.potential_phi(tn.TaubNutPoint.from_complex(z[0], z[1], m))
        for g in els:
            gz = act(g, z)
            pg = tn.potential_phi(tn.TaubNutPoint.from_complex(gz[0], gz[1], m))
            out["phi"] = max(out["phi"], abs(pg - phi) / max(phi, 1e-300))
    return out


def tetrahedral_defect(m, samples):
    """Largest relative change of the potential under the tetrahedral generator."""
    T = tetrahedral_generator()
    worst = 0.0
    for z in samples:
        z = np.asarray(z, dtype=complex)
        phi = tn.potential_phi(tn.TaubNutPoint.from_complex(z[0], z[1], m))
        tz = T @ z
        pt = tn.potential_phi(tn.TaubNutPoint.from_complex(tz[0], tz[1], m))
        worst = max(worst, abs(pt - phi) / phi)
    return worst


def check_metric_invariance(k, m, samples):
    """Worst relative violation of ``M^T f(Mx) M = f(x)`` over the group."""
    worst = 0.0
    mats = [real_matrix(g) for g in group_elements(k)]
    for z in samples:
        z = np.asarray(z, dtype=complex)
        x = np.array([z[0].real, z[0].imag, z[1].real, z[1].imag])
        G = tn.metric_f(tn.TaubNutPoint.from_real(x, m))
        for M in mats:
            Gg = tn.metric_f(tn.TaubNutPoint.from_real(M @ x, m))
            worst = max(worst, np.abs(M.T @ Gg @ M - G).max() / np.abs(G).max())
    return worst
