"""Pointwise tensor algebra on R^4 = C^2.

Conventions used throughout the package:

* real coordinates ``x = (x1, x2, x3, x4)`` with ``z1 = x1 + i x2`` and
  ``z2 = x3 + i x4``;
* a 1-form is a length-4 array of components against ``dx1..dx4``, a vector
  a length-4 array against ``d/dx1..d/dx4``;
* a 2-form is an antisymmetric 4x4 matrix ``w`` with ``w(X, Y) = X @ w @ Y``;
* an (almost) complex structure is a 4x4 matrix acting on vector components;
  on 1-forms it acts by ``(J a)(X) = -a(J X)``, so that ``I1 dx1 = dx2`` and
  ``d^c = I1 d``;
* a real (1,1)-form ``i sum h[j,k] dz_j ^ dzbar_k`` is stored either as the
  4x4 real matrix or as the Hermitian 2x2 matrix ``h``.  With these choices
  ``dd^c (r^2/4) = dx1^dx2 + dx3^dx4 = omega_e`` and the Riemannian metric of a
  Kaehler form is ``g(X, Y) = omega(X, I1 Y)``.
"""

import itertools

import numpy as np

__all__ = [
    "I1", "I2", "I3", "standard_complex_structures", "act_on_form",
    "wedge", "two_form_wedge_ratio", "herm_to_form", "form_to_herm",
    "metric_from_form", "form_from_metric", "exterior_derivative",
    "exterior_derivative_2form", "hodge_star_r3", "jacobian", "lie_bracket",
    "christoffel", "riemann", "ricci", "tensor_norm", "DZ", "DZBAR",
]


def _structure(images):
    # images[j] = index and sign of J applied to d/dx_j
    J = np.zeros((4, 4))
    for j, (i, s) in enumerate(images):
        J[i, j] = s
    return J


# I1: complex coordinates x1 + i x2, x3 + i x4
I1 = _structure([(1, 1), (0, -1), (3, 1), (2, -1)])
# I2: complex coordinates x1 + i x3, x4 + i x2
I2 = _structure([(2, 1), (3, -1), (0, -1), (1, 1)])
# I3: complex coordinates x1 + i x4, x2 + i x3
I3 = _structure([(3, 1), (2, 1), (1, -1), (0, -1)])

# complex covectors dz1, dz2 and their conjugates as component arrays
DZ = np.array([[1, 1j, 0, 0], [0, 0, 1, 1j]])
DZBAR = DZ.conj()

_EPS4 = np.zeros((4, 4, 4, 4))
for _p in itertools.permutations(range(4)):
    _EPS4[_p] = np.linalg.det(np.eye(4)[list(_p)])


def standard_complex_structures():
    """Return copies of the constant structures ``(I1, I2, I3)``."""
    return I1.copy(), I2.copy(), I3.copy()


def act_on_form(J, a):
    """Apply a complex structure to a 1-form: ``(J a)(X) = -a(J X)``."""
    return -np.asarray(J).T @ np.asarray(a)


def wedge(a, b):
    """Wedge product of two 1-forms as an antisymmetric matrix."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.outer(a, b) - np.outer(b, a)


def two_form_wedge_ratio(w1, w2):
    """Coefficient of ``w1 ^ w2`` against ``dx1^dx2^dx3^dx4``."""
    return 0.25 * np.einsum("abcd,ab,cd->", _EPS4, w1, w2)


def herm_to_form(h):
    """Real 2-form of ``i sum h[j,k] dz_j ^ dzbar_k``.

    Works on a single 2x2 matrix or on a stack ``(..., 2, 2)``.
    """
    h = np.asarray(h)
    w = 1j * np.einsum("...jk,ja,kb->...ab", h, DZ, DZBAR)
    w = w - np.swapaxes(w, -1, -2)
    return w.real


def form_to_herm(w):
    """Hermitian 2x2 matrix of the (1,1)-part of a real 2-form."""
    w = np.asarray(w)
    # h[j,k] = -i w(d/dz_j, d/dzbar_k) with d/dz = (d/dx - i d/dy)/2
    dz_vec = 0.5 * DZBAR  # components of d/dz_j
    dzbar_vec = 0.5 * DZ
    return -1j * np.einsum("...ab,ja,kb->...jk", w, dz_vec, dzbar_vec)


def metric_from_form(w):
    """Riemannian bilinear form ``g(X, Y) = w(X, I1 Y)``."""
    return np.asarray(w) @ I1


def form_from_metric(g):
    """Inverse of :func:`metric_from_form`: ``w(X, Y) = g(I1 X, Y)``."""
    return I1.T @ np.asarray(g)


def _check_step(h):
    h = np.broadcast_to(np.asarray(h, dtype=float), (4,))
    if not np.all(h > 0):
        raise ValueError(f"finite-difference step must be positive, got {h}")
    return h


def jacobian(field, p, h, order=4):
    """Central-difference Jacobian ``D[i, j] = d field_i / d x_j`` at ``p``.

    ``field`` maps a 4-vector to an array of any shape; the derivative axis
    is appended last.  ``h`` is a scalar step or one step per axis.
    """
    h = _check_step(h)
    p = np.asarray(p, dtype=float)
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h[j]
        if order == 2:
            d = (np.asarray(field(p + e)) - np.asarray(field(p - e))) / (2 * h[j])
        else:
            d = (8 * (np.asarray(field(p + e)) - np.asarray(field(p - e)))
                 - (np.asarray(field(p + 2 * e)) - np.asarray(field(p - 2 * e)))) / (12 * h[j])
        cols.append(d)
    return np.stack(cols, axis=-1)


def exterior_derivative(field, p, h, order=2):
    """Exterior derivative of a sampled 1-form field at ``p``.

    Returns the antisymmetric matrix ``(d a)_{jk} = d_j a_k - d_k a_j``;
    the error is O(h^2) for ``order=2`` and O(h^4) for ``order=4``.
    """
    D = jacobian(field, p, h, order=order)  # D[k, j] = d_j a_k
    return D.T - D


def exterior_derivative_2form(field, p, h, order=4):
    """Exterior derivative of a sampled 2-form field as a 4x4x4 array."""
    D = jacobian(field, p, h, order=order)  # D[b, c, a] = d_a w_bc
    return (np.einsum("bca->abc", D) + np.einsum("cab->abc", D)
            + np.einsum("abc->abc", D))


def hodge_star_r3(c):
    """Flat Hodge star of ``c1 dy1 + c2 dy2 + c3 dy3`` in the dy basis.

    The result is a 3x3 antisymmetric matrix ``s`` with
    ``s = c1 dy2^dy3 + c2 dy3^dy1 + c3 dy1^dy2``.
    """
    c1, c2, c3 = c
    return np.array([[0.0, c3, -c2], [-c3, 0.0, c1], [c2, -c1, 0.0]])


def lie_bracket(X, Y, p, h, order=4):
    """``[X, Y](p) = DY X - DX Y`` for sampled vector fields.

    ``h`` may be a scalar or a per-axis array of steps.
    """
    p = np.asarray(p, dtype=float)
    return jacobian(Y, p, h, order) @ X(p) - jacobian(X, p, h, order) @ Y(p)


def christoffel(metric, p, h, order=4):
    """Christoffel symbols ``G[a, b, c] = Gamma^a_{bc}`` of a sampled metric."""
    g = metric(p)
    dg = jacobian(metric, p, h, order)  # dg[b, c, a] = d_a g_bc
    ginv = np.linalg.inv(g)
    # Gamma_{d,bc} = (d_b g_dc + d_c g_db - d_d g_bc) / 2
    lower = 0.5 * (np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg))
    return np.einsum("ad,dbc->abc", ginv, lower)


def riemann(metric, p, h, order=4):
    """Riemann tensor ``R[a, b, c, d] = R^a_{bcd}`` by nested differences.

    ``R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db}
    - G^a_{de} G^e_{cb}``.
    """
    p = np.asarray(p, dtype=float)
    G = christoffel(metric, p, h, order)
    dG = jacobian(lambda q: christoffel(metric, q, h, order), p, h, order)
    # dG[a, d, b, c] = d_c G^a_{db}
    R = (np.einsum("adbc->abcd", dG) - np.einsum("acbd->abcd", dG)
         + np.einsum("ace,edb->abcd", G, G) - np.einsum("ade,ecb->abcd", G, G))
    return R


def ricci(R):
    """Ricci tensor ``Ric_{bd} = R^a_{bad}``."""
    return np.einsum("abad->bd", R)


def tensor_norm(T, g, up=0):
    """Pointwise norm of a tensor using the metric ``g``.

    ``up`` is the number of leading contravariant indices; the remaining
    indices are covariant.
    """
    T = np.asarray(T)
    ginv = np.linalg.inv(g)
    n = T.ndim
    letters = "abcdefgh"[:n]
    other = "ijklmnop"[:n]
    ops = [T]
    spec = [letters]
    for k in range(n):
        if k < up:
            ops.append(g)
        else:
            ops.append(ginv)
        spec.append(letters[k] + other[k])
    ops.append(T)
    spec.append(other)
    val = np.einsum(",".join(spec) + "->", *ops)
    return float(np.sqrt(max(val.real, 0.0)))
