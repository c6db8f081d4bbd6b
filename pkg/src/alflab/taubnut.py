"""Taub-NUT metrics on C^2 from the implicit toric potential.

For ``m >= 0`` the nonnegative functions ``(u, v)`` are defined by

    |z1| = exp(m (u^2 - v^2)) u,    |z2| = exp(m (v^2 - u^2)) v,

and the Kaehler potential is ``phi = (u^2 + v^2 + m (u^4 + v^4)) / 4``.  The
moment coordinates are ``y1 = (u^2 - v^2)/2``, ``y2 = Im(z1 z2)``,
``y3 = -Re(z1 z2)``, ``R = |y| = (u^2 + v^2)/2`` and ``V = 2m + 1/(2R)``.
The metric then takes the Gibbons-Hawking form
``f = V |dy|^2 + eta^2 / V`` with ``d eta = *dV``.

All closed forms below are written in terms of ``(u, v, y1, R)`` rather
than ``1/z_j``, so they stay regular on the coordinate axes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from . import tensor as tc
from .tensor import I1

__all__ = [
    "TaubNutPoint", "solve_uv", "point_from_moment", "sample_points",
    "potential_phi", "potential_from_real", "duv_dz", "hermitian_f",
    "toric_hessian", "taubnut_arrays", "kahler_form_f", "metric_f", "metric_at", "gibbons_hawking_metric",
    "dy_forms", "eta_at", "eta_from_log_forms", "xi_at", "zeta_at",
    "dV_components", "star_dV", "hyperkahler_triple", "coordinate_balance", "holomorphic_symplectic",
    "dictionary_dx", "frame", "bracket_table", "numerical_brackets",
    "koszul_connection", "comparison_bounds", "metric_eigenvalues", "fiber_length",
    "riemann_at", "frame_connection", "frame_riemann", "curvature_decay", "BRACKET_TRIPLES",
]

BRACKET_TRIPLES = ((1, 2, 3), (2, 3, 1), (3, 1, 2))
_MAXIT = 200


def _moment_y1(a, b, m):
    """Root of ``(a e^{-4my} - b e^{4my})/2 - y`` for arrays ``a, b >= 0``.

    The left side is strictly decreasing with a sign change on
    ``[-b/2, a/2]``; Newton steps are kept inside the shrinking bracket.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if m == 0:
        return 0.5 * (a - b)
    lo = -0.5 * b
    hi = 0.5 * a
    # exact when either modulus vanishes, and close whenever one dominates
    y0 = (lambertw(2 * m * a).real - lambertw(2 * m * b).real) / (4 * m)
    y = np.clip(y0, lo, hi)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(_MAXIT):
            ea = a * np.exp(-4 * m * y)
            eb = b * np.exp(4 * m * y)
            h = 0.5 * (ea - eb) - y
            dh = -2 * m * (ea + eb) - 1.0
            lo = np.where(h > 0, y, lo)
            hi = np.where(h < 0, y, hi)
            y_new = y - h / dh
            ok = np.isfinite(y_new) & (y_new >= lo) & (y_new <= hi)
            y_new = np.where(ok, y_new, 0.5 * (lo + hi))
            tol = 1e-14 * np.maximum(1.0, np.abs(y))
            done = (np.abs(y_new - y) <= tol) | (hi - lo <= tol) | (h == 0)
            y = np.where(h == 0, y, y_new)
            if np.all(done):
                return _polish(y, a, b, m)
    raise RuntimeError("moment coordinate iteration did not converge")


def _polish(y, a, b, m):
    # two Newton steps in extended precision; the exponentials have
    # arguments of size 4 m y, so double rounding alone costs ~ m y eps
    y = np.asarray(y, dtype=np.longdouble)
    a = np.asarray(a, dtype=np.longdouble)
    b = np.asarray(b, dtype=np.longdouble)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(2):
            ea = a * np.exp(-4 * m * y)
            eb = b * np.exp(4 * m * y)
            step = (0.5 * (ea - eb) - y) / (2 * m * (ea + eb) + 1)
            y = np.where(np.isfinite(step), y + step, y)
    return y


def solve_uv(z1, z2, m):
    """Solve the implicit system for ``(u, v)`` given complex ``z1, z2``.

    Vectorised over array inputs.  The scalar unknown is ``y1``: with
    ``a = |z1|^2, b = |z2|^2`` one has ``u^2 = a e^{-4 m y1}``,
    ``v^2 = b e^{4 m y1}`` and ``y1 = (u^2 - v^2)/2``.
    """
    if m < 0:
        raise ValueError("mass parameter must be nonnegative")
    a = np.abs(z1) ** 2
    b = np.abs(z2) ** 2
    y = _moment_y1(a, b, m)
    ld = np.longdouble
    u = np.asarray(np.abs(z1), dtype=ld) * np.exp(-2 * ld(m) * y)
    v = np.asarray(np.abs(z2), dtype=ld) * np.exp(2 * ld(m) * y)
    return u.astype(float), v.astype(float)


@dataclass(frozen=True)
class TaubNutPoint:
    """A point of C^2 with its Taub-NUT data for mass ``m``."""

    m: float
    x: np.ndarray
    u: float
    v: float
    y1: float
    y2: float
    y3: float
    R: float
    V: float

    @classmethod
    def from_real(cls, x, m):
        x = np.asarray(x, dtype=float)
        z1 = complex(x[0], x[1])
        z2 = complex(x[2], x[3])
        u, v = solve_uv(z1, z2, m)
        u = float(u)
        v = float(v)
        w = z1 * z2
        R = 0.5 * (u * u + v * v)
        V = 2 * m + 0.5 / R if R > 0 else np.inf
        return cls(m, x.copy(), u, v, 0.5 * (u * u - v * v), w.imag, -w.real, R, V)

    @classmethod
    def from_complex(cls, z1, z2, m):
        return cls.from_real([np.real(z1), np.imag(z1), np.real(z2), np.imag(z2)], m)

    @property
    def z1(self):
        return complex(self.x[0], self.x[1])

    @property
    def z2(self):
        return complex(self.x[2], self.x[3])

    @property
    def y(self):
        return np.array([self.y1, self.y2, self.y3])

    @property
    def r2(self):
        return float(self.x @ self.x)

    @property
    def D(self):
        """``1 + 4 m R``."""
        return 1 + 4 * self.m * self.R

    def residuals(self):
        """Relative residuals of the implicit system and moment identities."""
        m = self.m
        s = self.u ** 2 - self.v ** 2
        a1 = abs(self.z1)
        a2 = abs(self.z2)
        r1 = abs(a1 - np.exp(m * s) * self.u) / max(a1, 1e-300)
        r2 = abs(a2 - np.exp(-m * s) * self.v) / max(a2, 1e-300)
        return {
            "z1": r1 if a1 > 0 else abs(self.u),
            "z2": r2 if a2 > 0 else abs(self.v),
            "R": abs(self.R - np.linalg.norm(self.y)) / max(self.R, 1e-300),
            "uv": abs(self.u * self.v - a1 * a2) / max(a1 * a2, 1e-300) if a1 * a2 > 0 else 0.0,
        }


def point_from_moment(m, y, theta=0.0):
    """Point with moment coordinates ``y`` and ``arg z1 = theta``."""
    y1, y2, y3 = (float(c) for c in y)
    R = float(np.sqrt(y1 * y1 + y2 * y2 + y3 * y3))
    u = np.sqrt(max(R + y1, 0.0))
    v = np.sqrt(max(R - y1, 0.0))
    psi = np.arctan2(y2, -y3)  # arg(z1 z2)
    z1 = np.exp(2 * m * y1) * u * np.exp(1j * theta)
    z2 = np.exp(-2 * m * y1) * v * np.exp(1j * (psi - theta))
    return TaubNutPoint.from_complex(z1, z2, m)


def sample_points(rng, m, n, R_range=(0.5, 5.0), y1_max=1.0):
    """Random points with ``R`` log-uniform in ``R_range``.

    ``y1`` is restricted to ``|y1| <= y1_max * R`` so the coordinate scale
    ``e^{2 m y1}`` stays controlled.
    """
    lo, hi = np.log(R_range[0]), np.log(R_range[1])
    pts = []
    for _ in range(n):
        R = np.exp(rng.uniform(lo, hi))
        c = rng.uniform(-y1_max, y1_max)
        ang = rng.uniform(0, 2 * np.pi)
        s = np.sqrt(1 - c * c)
        y = R * np.array([c, s * np.cos(ang), s * np.sin(ang)])
        pts.append(point_from_moment(m, y, rng.uniform(0, 2 * np.pi)))
    return pts


def potential_phi(p):
    """Kaehler potential ``(u^2 + v^2 + m(u^4 + v^4)) / 4``."""
    u2, v2 = p.u ** 2, p.v ** 2
    return 0.25 * (u2 + v2 + p.m * (u2 * u2 + v2 * v2))


def potential_from_real(x, m):
    """Potential as a function of real coordinates, vectorised over ``x[..., 4]``."""
    x = np.asarray(x, dtype=float)
    z1 = x[..., 0] + 1j * x[..., 1]
    z2 = x[..., 2] + 1j * x[..., 3]
    u, v = solve_uv(z1, z2, m)
    u2, v2 = u * u, v * v
    return 0.25 * (u2 + v2 + m * (u2 * u2 + v2 * v2))


def duv_dz(p):
    """Holomorphic partials ``(du/dz1, du/dz2, dv/dz1, dv/dz2)``."""
    m, u, v = p.m, p.u, p.v
    z1, z2 = p.z1, p.z2
    if z1 == 0 or z2 == 0:
        raise ValueError("holomorphic partials of u, v are singular on the axes")
    D = 1 + 2 * m * (u * u + v * v)
    du1 = (1 + 2 * m * v * v) * u / (2 * z1 * D)
    du2 = m * u * v * v / (z2 * D)
    dv1 = m * v * u * u / (z1 * D)
    dv2 = (1 + 2 * m * u * u) * v / (2 * z2 * D)
    return du1, du2, dv1, dv2


def _toric_parts(m, u, v, y1, R):
    # partials of the potential as a function of a = |z1|^2, b = |z2|^2,
    # premultiplied where needed to stay finite on the axes
    D = 1 + 4 * m * R
    em = np.exp(-4 * m * y1)
    ep = np.exp(4 * m * y1)
    pa = 0.25 * (1 + 2 * m * v * v) * em
    pb = 0.25 * (1 + 2 * m * u * u) * ep
    paa_a = -m * u * u * em / (2 * D)  # phi_aa * a
    pbb_b = -m * v * v * ep / (2 * D)
    pab = 0.5 * m * (1 + 1 / D)
    return pa, pb, paa_a, pbb_b, pab


def toric_hessian(z1, z2, Fa, Fb, Faa_a, Fbb_b, Fab):
    """Complex Hessian ``d_j dbar_k F`` of a function ``F(|z1|^2, |z2|^2)``.

    Inputs are the partials of ``F`` in ``a = |z1|^2``, ``b = |z2|^2`` with
    ``Faa_a = F_aa a`` and ``Fbb_b = F_bb b``; all may be arrays.  Returns
    shape ``(..., 2, 2)``.
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    shape = np.broadcast(z1, z2, Fa, Fb, Faa_a, Fbb_b, Fab).shape
    H = np.zeros(shape + (2, 2), dtype=complex)
    H[..., 0, 0] = Faa_a + Fa
    H[..., 1, 1] = Fbb_b + Fb
    H[..., 0, 1] = Fab * np.conj(z1) * z2
    H[..., 1, 0] = np.conj(H[..., 0, 1])
    return H


def hermitian_f(p):
    """Hermitian matrix ``h`` with ``omega_f = i sum h_jk dz_j ^ dzbar_k``."""
    return 2 * toric_hessian(p.z1, p.z2, *_toric_parts(p.m, p.u, p.v, p.y1, p.R))


def taubnut_arrays(x, m):
    """Vectorised Taub-NUT data at points ``x[..., 4]``.

    Returns a dict with ``z1, z2, u, v, y1, R, V, h`` (the Hermitian matrix
    of ``omega_f``) and the toric partials of the potential.
    """
    x = np.asarray(x, dtype=float)
    z1 = x[..., 0] + 1j * x[..., 1]
    z2 = x[..., 2] + 1j * x[..., 3]
    u, v = solve_uv(z1, z2, m)
    y1 = 0.5 * (u * u - v * v)
    R = 0.5 * (u * u + v * v)
    parts = _toric_parts(m, u, v, y1, R)
    with np.errstate(divide="ignore"):
        V = 2 * m + 0.5 / R
    phi = 0.25 * (u * u + v * v + m * (u ** 4 + v ** 4))
    return {"z1": z1, "z2": z2, "u": u, "v": v, "y1": y1, "R": R, "V": V, "phi": phi,
            "parts": parts, "h": 2 * toric_hessian(z1, z2, *parts)}


def kahler_form_f(p):
    """Taub-NUT Kaehler form as an antisymmetric 4x4 matrix."""
    return tc.herm_to_form(hermitian_f(p))


def metric_f(p):
    """Taub-NUT metric ``f(X, Y) = omega_f(X, I1 Y)`` in real coordinates."""
    if p.R == 0:
        raise ValueError("metric evaluation at the origin is not supported")
    g = tc.metric_from_form(kahler_form_f(p))
    return 0.5 * (g + g.T)


def metric_at(m):
    """Return ``x -> metric_f`` for finite-difference use."""
    return lambda x: metric_f(TaubNutPoint.from_real(x, m))


def dy_forms(p):
    """Differentials ``(dy1, dy2, dy3)`` as 1-form component arrays."""
    x1, x2, x3, x4 = p.x
    m, y1 = p.m, p.y1
    em = np.exp(-4 * m * y1)
    ep = np.exp(4 * m * y1)
    dy1 = np.array([em * x1, em * x2, -ep * x3, -ep * x4]) / p.D
    dy2 = np.array([x4, x3, x2, x1])
    dy3 = np.array([-x3, x4, -x1, x2])
    return dy1, dy2, dy3


def eta_at(p):
    """Connection form ``eta`` with ``eta(xi) = 1``."""
    x1, x2, x3, x4 = p.x
    em = np.exp(-4 * p.m * p.y1)
    ep = np.exp(4 * p.m * p.y1)
    return np.array([-em * x2, em * x1, ep * x4, -ep * x3]) / (2 * p.R)


def eta_from_log_forms(p):
    """``eta`` assembled from ``d^c log|z_j|^2`` with weights ``1 +- y1/R``."""
    x = p.x
    a = x[0] ** 2 + x[1] ** 2
    b = x[2] ** 2 + x[3] ** 2
    dla = 2 * np.array([x[0], x[1], 0, 0]) / a
    dlb = 2 * np.array([0, 0, x[2], x[3]]) / b
    w = p.y1 / p.R
    return 0.25 * ((1 + w) * tc.act_on_form(I1, dla) - (1 - w) * tc.act_on_form(I1, dlb))


def xi_at(p):
    """Generator of the circle action ``(e^{is} z1, e^{-is} z2)``."""
    x1, x2, x3, x4 = p.x
    return np.array([-x2, x1, x4, -x3])


def zeta_at(p):
    """Vector field dual to ``dy2`` in the frame ``(xi, I1 xi, zeta, I1 zeta)``."""
    em = np.exp(-4 * p.m * p.y1)
    ep = np.exp(4 * p.m * p.y1)
    w1 = 1j * ep * np.conj(p.z2) / (2 * p.R)
    w2 = 1j * em * np.conj(p.z1) / (2 * p.R)
    return np.array([w1.real, w1.imag, w2.real, w2.imag])


def gibbons_hawking_metric(p):
    """``V (dy1^2 + dy2^2 + dy3^2) + eta^2 / V``."""
    dy1, dy2, dy3 = dy_forms(p)
    eta = eta_at(p)
    return (p.V * (np.outer(dy1, dy1) + np.outer(dy2, dy2) + np.outer(dy3, dy3))
            + np.outer(eta, eta) / p.V)


def dV_components(p):
    """Gradient of ``V`` in moment coordinates: ``-y / (2 R^3)``."""
    return -p.y / (2 * p.R ** 3)


def star_dV(p):
    """``*dV`` pulled back to a 2-form in real coordinates."""
    dys = dy_forms(p)
    s = tc.hodge_star_r3(dV_components(p))
    w = np.zeros((4, 4))
    for i in range(3):
        for j in range(i + 1, 3):
            w += s[i, j] * tc.wedge(dys[i], dys[j])
    return w


def hyperkahler_triple(p):
    """Complex structures ``(J1, J2, J3)`` compatible with ``f``.

    ``J_i`` sends ``V dy_i -> eta``, ``dy_j -> dy_k`` and ``eta -> -V dy_i``,
    ``dy_k -> -dy_j`` for cyclic ``(i, j, k)``; returned as matrices on
    vector components.  In the orthonormal coframe the action is a signed
    permutation, so no matrix inverse is needed.
    """
    E, C = frame(p)
    out = []
    for i, j, k in BRACKET_TRIPLES:
        M = np.zeros((4, 4))
        M[0, i] = M[k, j] = 1.0
        M[i, 0] = M[j, k] = -1.0
        out.append(-E @ M.T @ C)
    return tuple(out)


def coordinate_balance(p):
    """Diagonal ``S`` with ``x = S x~`` so that ``|z~_j|^2 = R +- y1``.

    Linear maps transform as ``S^-1 J S`` and bilinear forms as ``S G S``;
    residuals are measured in these coordinates, where the Taub-NUT data
    are O(1) even when ``e^{4 m |y1|}`` is huge.
    """
    e = np.exp(2 * p.m * p.y1)
    return np.diag([e, e, 1 / e, 1 / e])


def holomorphic_symplectic(p=None):
    """Real and imaginary parts of ``dz1 ^ dz2``."""
    w = np.outer(tc.DZ[0], tc.DZ[1]) - np.outer(tc.DZ[1], tc.DZ[0])
    return w.real, w.imag


def dictionary_dx(p):
    """Expansions of ``dx_j`` and ``d/dx_j`` in the Gibbons-Hawking bases.

    Returns ``(A, B)`` where row ``j`` of ``A`` holds the coefficients of
    ``dx_j`` against ``(eta, dy1, dy2, dy3)`` and row ``j`` of ``B`` the
    coefficients of ``d/dx_j`` against ``(xi, I1 xi, zeta, I1 zeta)``.
    """
    xi = xi_at(p)
    zeta = zeta_at(p)
    dy1, dy2, dy3 = dy_forms(p)
    eta = eta_at(p)
    V = p.V
    A = np.stack([xi, -V * (I1 @ xi), zeta, I1 @ zeta], axis=1)
    B = np.stack([eta, -V * dy1, dy2, dy3], axis=1)
    return A, B


def frame(p):
    """Orthonormal frame ``(e0..e3)`` as columns and its dual coframe as rows."""
    V = p.V
    xi = xi_at(p)
    zeta = zeta_at(p)
    E = np.stack([np.sqrt(V) * xi, -np.sqrt(V) * (I1 @ xi),
                  zeta / np.sqrt(V), (I1 @ zeta) / np.sqrt(V)], axis=1)
    dy1, dy2, dy3 = dy_forms(p)
    C = np.stack([eta_at(p) / np.sqrt(V), np.sqrt(V) * dy1,
                  np.sqrt(V) * dy2, np.sqrt(V) * dy3])
    return E, C


def bracket_table(p):
    """Closed-form structure constants ``c[i, j] = [e_i, e_j]`` in the frame.

    ``[e0, e_i] = y_i e0 / (4 R^3 V^{3/2})`` and, for cyclic ``(i, j, k)``,
    ``[e_i, e_j] = (y_i e_j - y_j e_i + 2 y_k e0) / (4 R^3 V^{3/2})``.
    """
    s = 1.0 / (4 * p.R ** 3 * p.V ** 1.5)
    y = p.y
    c = np.zeros((4, 4, 4))
    for i in (1, 2, 3):
        c[0, i, 0] = y[i - 1] * s
        c[i, 0, 0] = -c[0, i, 0]
    for i, j, k in BRACKET_TRIPLES:
        vec = np.zeros(4)
        vec[j] = y[i - 1]
        vec[i] = -y[j - 1]
        vec[0] = 2 * y[k - 1]
        c[i, j] = s * vec
        c[j, i] = -s * vec
    return c


def _axis_steps(p, rel):
    # frame fields vary on the scale |z_j| / (1 + 4 m R) along each pair of axes
    s1 = rel * abs(p.z1) / p.D
    s2 = rel * abs(p.z2) / p.D
    return np.array([s1, s1, s2, s2])


def numerical_brackets(p, rel=1e-2):
    """Finite-difference commutators of the frame, expressed in the frame."""
    m = p.m
    steps = _axis_steps(p, rel)

    def efield(i):
        return lambda x: frame(TaubNutPoint.from_real(x, m))[0][:, i]

    E, C = frame(p)
    DE = [tc.jacobian(efield(i), p.x, steps) for i in range(4)]
    c = np.zeros((4, 4, 4))
    for i in range(4):
        for j in range(i + 1, 4):
            b = DE[j] @ E[:, i] - DE[i] @ E[:, j]
            c[i, j] = C @ b
            c[j, i] = -c[i, j]
    return c


def koszul_connection(c):
    """``Gamma[i, j, k] = <nabla_{e_i} e_j, e_k>`` from structure constants."""
    return 0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))


def metric_eigenvalues(p):
    """Extreme eigenvalues and Euclidean determinant of ``f`` at ``p``.

    Each eigenvalue of the Hermitian matrix ``h`` appears twice in ``f``
    with a factor 2.  The determinant is taken in the rescaled coordinates
    of :func:`coordinate_balance` (which have unit Jacobian) and the small
    eigenvalue is recovered as ``det / lambda_max``, so the values stay
    accurate when ``e^{4 m |y1|}`` is huge.
    """
    h = hermitian_f(p)
    e = np.exp(2 * p.m * p.y1)
    hb = np.array([[h[0, 0].real * e * e, h[0, 1]], [h[1, 0], h[1, 1].real / (e * e)]])
    det_h = hb[0, 0].real * hb[1, 1].real - abs(hb[0, 1]) ** 2
    a, d = h[0, 0].real, h[1, 1].real
    lam_max = 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + abs(h[0, 1]) ** 2)
    return 2 * det_h / lam_max, 2 * lam_max, float((4 * det_h) ** 2)


def comparison_bounds(samples):
    """Compare ``f`` with the Euclidean metric at each sample point.

    Returns a dict of per-sample arrays plus the worst constants
    ``max(lambda_max / r^2)`` and ``max(1 / (lambda_min r^2))``.
    """
    lam_min, lam_max, det, r2, R, y1 = [], [], [], [], [], []
    for p in samples:
        lo, hi, de = metric_eigenvalues(p)
        lam_min.append(lo)
        lam_max.append(hi)
        det.append(de)
        r2.append(p.r2)
        R.append(p.R)
        y1.append(p.y1)
    out = {k: np.array(v) for k, v in dict(lam_min=lam_min, lam_max=lam_max, det=det,
                                              r2=r2, R=R, y1=y1).items()}
    out["C_upper"] = float(np.max(out["lam_max"] / out["r2"]))
    out["C_lower"] = float(np.max(1 / (out["lam_min"] * out["r2"])))
    out["lower_gap"] = out["r2"] - 2 * out["R"]
    with np.errstate(over="ignore"):
        out["upper_gap"] = (2 * out["R"] * np.exp(4 * np.array([s.m for s in samples]) * out["R"])
                            - out["r2"])
    return out


def fiber_length(m, R):
    """Length ``2 pi / sqrt(V)`` of the circle orbit at radius ``R``."""
    return 2 * np.pi / np.sqrt(2 * m + 0.5 / R)


def riemann_at(p, rel=0.02):
    """Riemann tensor ``R^a_{bcd}`` in real coordinates by nested differences.

    The metric varies on the scale ``|x| / (1 + 4 m R)`` (through
    ``e^{4 m y1}``), which sets the step.  Coordinate differences become
    ill-conditioned once ``m R`` is large; see :func:`frame_riemann`.
    """
    step = rel * np.sqrt(p.r2) / p.D
    return tc.riemann(metric_at(p.m), p.x, step, order=4)


def frame_connection(p, rel=1e-2, closed_form=False):
    """Connection coefficients ``<nabla_{e_i} e_j, e_k>`` of the frame."""
    c = bracket_table(p) if closed_form else numerical_brackets(p, rel)
    return koszul_connection(c), c


def frame_riemann(p, rel=1e-2, rel_y=0.02, closed_form=False):
    """Curvature ``<R(e_i, e_j) e_k, e_l>`` in the orthonormal frame.

    Frame quantities are invariant under the circle action, so ``e0``
    differentiates them to zero and ``e_l = V^{-1/2} d/dy_l`` for
    ``l = 1, 2, 3``; derivatives are taken by moving the point in moment
    coordinates at fixed ``arg z1``.
    """
    G, c = frame_connection(p, rel, closed_form)
    theta = np.angle(p.z1)
    h = rel_y * p.R
    dG = np.zeros((4, 4, 4, 4))  # dG[l] = e_l(Gamma)
    for l in (1, 2, 3):
        e = np.zeros(3)
        e[l - 1] = h
        vals = {s: frame_connection(point_from_moment(p.m, p.y + s * e, theta), rel, closed_form)[0]
                for s in (-2, -1, 1, 2)}
        dG[l] = (8 * (vals[1] - vals[-1]) - (vals[2] - vals[-2])) / (12 * h) / np.sqrt(p.V)
    Rm = (np.einsum("ijkl->ijkl", dG) - np.einsum("jikl->ijkl", dG)
          + np.einsum("jkp,ipl->ijkl", G, G) - np.einsum("ikp,jpl->ijkl", G, G)
          - np.einsum("ijq,qkl->ijkl", c, G))
    return Rm


def curvature_decay(m, radii, n_angles=2, rel=1e-2):
    """Norm of the curvature tensor at probe points on ``{y1 = 0}``.

    Returns per-radius maxima of ``|Rm|_f`` and ``|Ric|_f`` (frame
    computation) and the log-log slope of ``|Rm|_f`` against ``R``.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    rm, ric = [], []
    for R in radii:
        best_rm, best_ric = 0.0, 0.0
        for a in range(n_angles):
            ang = np.pi * (a + 0.25) / n_angles
            p = point_from_moment(m, [0.0, R * np.cos(ang), R * np.sin(ang)], 0.3 + a)
            Rm = frame_riemann(p, rel)
            if not np.all(np.isfinite(Rm)):
                raise FloatingPointError(f"curvature evaluation failed at R={R}")
            best_rm = max(best_rm, float(np.sqrt(np.sum(Rm ** 2))))
            best_ric = max(best_ric, float(np.sqrt(np.sum(np.einsum("ijki->jk", Rm) ** 2))))
        rm.append(best_rm)
        ric.append(best_ric)
    rm = np.array(rm)
    slope = float(np.polyfit(np.log(radii), np.log(rm), 1)[0]) if len(radii) > 1 else np.nan
    return {"R": radii, "rm_norm": rm, "ricci_norm": np.array(ric), "slope": slope}
