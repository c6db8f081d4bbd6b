"""Lattices, grid fields, Kaehler backgrounds and difference stencils.

A :class:`Grid` is an axis-aligned box in R^4 with ``n`` interior nodes per
axis and one ring of Dirichlet nodes on each face.  Values of a
:class:`GridField` live on the interior nodes; ``padded()`` adds the ring.
Complex Hessians follow the package convention: ``i ddbar phi`` has the
Hermitian coefficient matrix ``phi_{j kbar} = d_j dbar_k phi``.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import taubnut as tn
from .. import tensor as tc

__all__ = [
    "Grid", "GridField", "BackgroundKahler", "real_hessian", "complex_hessian",
    "gradient", "bump", "hermitian_det", "hermitian_min_eig",
]


@dataclass(frozen=True)
class Grid:
    """Box ``[lower, upper]`` with ``n`` interior nodes per axis."""

    lower: tuple = (-1.5, -1.5, -1.5, -1.5)
    upper: tuple = (1.5, 1.5, 1.5, 1.5)
    n: int = 17
    layer: int = 2  # nodes within this many cells of the boundary

    def __post_init__(self):
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (4,))
        up = np.broadcast_to(np.asarray(self.upper, dtype=float), (4,))
        object.__setattr__(self, "lower", tuple(float(v) for v in lo))
        object.__setattr__(self, "upper", tuple(float(v) for v in up))
        if not np.all(up > lo):
            raise ValueError("upper corner must exceed lower corner on every axis")
        if self.layer < 2:
            raise ValueError("boundary layer must be at least 2 cells wide")
        if self.n < 2 * self.layer + 1:
            raise ValueError(f"need at least {2 * self.layer + 1} interior nodes per axis")

    @property
    def h(self):
        return (np.asarray(self.upper) - np.asarray(self.lower)) / (self.n + 1)

    @property
    def shape(self):
        return (self.n,) * 4

    @property
    def size(self):
        return self.n ** 4

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def axes(self, padded=False):
        lo, h = np.asarray(self.lower), self.h
        j = np.arange(self.n + 2) if padded else np.arange(1, self.n + 1)
        return [lo[a] + j * h[a] for a in range(4)]

    def nodes(self, padded=False):
        """Coordinates of the nodes, shape ``(n, n, n, n, 4)``."""
        return np.stack(np.meshgrid(*self.axes(padded), indexing="ij"), axis=-1)

    def layer_mask(self):
        """True on interior nodes within ``layer`` cells of the boundary."""
        j = np.arange(1, self.n + 1)
        near = (j <= self.layer) | (j >= self.n + 1 - self.layer)
        g = np.meshgrid(near, near, near, near, indexing="ij")
        return g[0] | g[1] | g[2] | g[3]

    def refine(self, n):
        return Grid(self.lower, self.upper, n, self.layer)

    def scaled(self, s, n=None):
        c = 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))
        half = 0.5 * (np.asarray(self.upper) - np.asarray(self.lower))
        return Grid(tuple(c - s * half), tuple(c + s * half), n or self.n, self.layer)


@dataclass
class GridField:
    """Scalar values on the interior nodes plus Dirichlet data."""

    grid: Grid
    values: np.ndarray = None
    bc: float = 0.0

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.grid.shape)
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid field has non-finite values")

    @classmethod
    def from_function(cls, grid, fn, bc=0.0):
        return cls(grid, fn(grid.nodes()), bc)

    def padded(self):
        P = np.full((self.grid.n + 2,) * 4, float(self.bc))
        P[1:-1, 1:-1, 1:-1, 1:-1] = self.values
        return P

    def copy(self, values=None):
        return GridField(self.grid, self.values.copy() if values is None else values, self.bc)

    def max_norm(self):
        return float(np.abs(self.values).max())

    def vanishes_on_layer(self, tol=0.0):
        return bool(np.abs(self.values[self.grid.layer_mask()]).max() <= tol)


def _sl(off):
    return tuple(slice(1 + o, (-1 + o) or None) for o in off)


def _unit(a, s=1):
    off = [0, 0, 0, 0]
    off[a] = s
    return off


def _pure(P, a, h):
    return (P[_sl(_unit(a, 1))] - 2 * P[_sl((0, 0, 0, 0))] + P[_sl(_unit(a, -1))]) / h[a] ** 2


def _mixed(P, a, b, h):
    def at(sa, sb):
        off = [0, 0, 0, 0]
        off[a] = sa
        off[b] = sb
        return P[_sl(off)]
    return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h[a] * h[b])


def real_hessian(P, h):
    """All 10 independent second differences of a padded array, ``(..., 4, 4)``."""
    H = np.empty(tuple(s - 2 for s in P.shape) + (4, 4))
    for a in range(4):
        H[..., a, a] = _pure(P, a, h)
        for b in range(a + 1, 4):
            H[..., a, b] = H[..., b, a] = _mixed(P, a, b, h)
    return H


def complex_hessian(P, h):
    """(1,1)-part ``phi_{j kbar}`` of the discrete Hessian, ``(..., 2, 2)``.

    ``d_j dbar_k = (1/4) sum_ab DZBAR[j, a] DZ[k, b] d_a d_b``; the second
    differences ``d1 d2`` and ``d3 d4`` drop out of this projection.
    """
    return 0.25 * np.einsum("ja,kb,...ab->...jk", tc.DZBAR, tc.DZ, real_hessian(P, h))


def gradient(P, h):
    """Centered first differences of a padded array, ``(..., 4)``."""
    return np.stack([(P[_sl(_unit(a, 1))] - P[_sl(_unit(a, -1))]) / (2 * h[a])
                     for a in range(4)], axis=-1)


def hermitian_det(A):
    return (A[..., 0, 0].real * A[..., 1, 1].real - np.abs(A[..., 0, 1]) ** 2)


def hermitian_min_eig(A):
    a, d = A[..., 0, 0].real, A[..., 1, 1].real
    return 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + np.abs(A[..., 0, 1]) ** 2)


def bump(x, center, radius, amplitude=1.0):
    """Smooth compactly supported ``amplitude * exp(1 - 1/(1 - s^2))``."""
    s2 = np.sum((np.asarray(x) - np.asarray(center)) ** 2, axis=-1) / radius ** 2
    out = np.zeros(s2.shape)
    inside = s2 < 1
    out[inside] = amplitude * np.exp(1 - 1 / (1 - s2[inside]))
    return out


@dataclass
class BackgroundKahler:
    """Background Kaehler form: Taub-NUT ``omega_f`` or flat ``omega_e``."""

    kind: str = "taubnut"
    m: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("taubnut", "euclidean"):
            raise ValueError(f"unknown background {self.kind!r}")
        if self.kind == "taubnut" and self.m <= 0:
            raise ValueError("Taub-NUT background needs m > 0")

    @property
    def mass(self):
        return self.m if self.kind == "taubnut" else 0.0

    def hermitian(self, x):
        """Coefficient matrices ``h_Y`` at points ``x`` of shape ``(..., 4)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return np.broadcast_to(0.5 * np.eye(2, dtype=complex), x.shape[:-1] + (2, 2)).copy()
        flat = x.reshape(-1, 4)
        h = tn.taubnut_arrays(flat, self.m)["h"]
        return h.reshape(x.shape[:-1] + (2, 2))

    def on_grid(self, grid):
        """``h_Y`` at the interior nodes, cached per grid."""
        if grid not in self._cache:
            h = self.hermitian(grid.nodes())
            if np.any(hermitian_min_eig(h) <= 0) or np.any(hermitian_det(h) <= 0):
                raise ValueError("background is not positive at every node")
            self._cache[grid] = h
        return self._cache[grid]

    def moment_radius(self, x):
        """``R = |y|`` of the moment map (``r^2/2`` for the flat metric)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return 0.5 * np.sum(x * x, axis=-1)
        d = tn.taubnut_arrays(x.reshape(-1, 4), self.m)
        return d["R"].reshape(x.shape[:-1])

    def rho(self, x):
        """Smooth positive radius ``sqrt(1 + R^2)``."""
        return np.sqrt(1 + self.moment_radius(x) ** 2)

    def metric(self, x):
        """Riemannian metric matrices ``(..., 4, 4)``."""
        return tc.metric_from_form(tc.herm_to_form(self.hermitian(x)))

    def derivatives(self, x, step=1e-2):
        """``d_k h`` and ``d_k dbar_l h`` by fourth-order differences.

        Returns ``(dh, ddh)`` with ``dh[..., k, i, j] = d_k h_ij`` and
        ``ddh[..., k, l, i, j] = d_k dbar_l h_ij``.
        """
        x = np.asarray(x, dtype=float)
        w = np.array([1.0, -8.0, 8.0, -1.0]) / 12
        s = np.array([-2, -1, 1, 2])
        d1 = np.empty(x.shape[:-1] + (4, 2, 2), dtype=complex)
        d2 = np.empty(x.shape[:-1] + (4, 4, 2, 2), dtype=complex)
        for a in range(4):
            e = np.zeros(4)
            e[a] = step
            d1[..., a, :, :] = sum(wi * self.hermitian(x + si * e) for wi, si in zip(w, s)) / step
            for b in range(a, 4):
                f = np.zeros(4)
                f[b] = step
                acc = 0
                for wi, si in zip(w, s):
                    for wj, sj in zip(w, s):
                        acc = acc + wi * wj * self.hermitian(x + si * e + sj * f)
                d2[..., a, b, :, :] = d2[..., b, a, :, :] = acc / step ** 2
        # d_k = (1/2) DZBAR[k] . d,  dbar_l = (1/2) DZ[l] . d
        dh = 0.5 * np.einsum("ka,...aij->...kij", tc.DZBAR, d1)
        ddh = 0.25 * np.einsum("ka,lb,...abij->...klij", tc.DZBAR, tc.DZ, d2)
        return dh, ddh

    def closedness_defect(self, points, step=1e-3):
        """Largest ``|d omega_Y|`` relative to ``|omega_Y|`` at the given points."""
        fn = lambda q: tc.herm_to_form(self.hermitian(q))
        worst = 0.0
        for p in np.atleast_2d(points):
            dw = tc.exterior_derivative_2form(fn, p, step, order=4)
            worst = max(worst, np.abs(dw).max() / np.abs(fn(p)).max())
        return worst
