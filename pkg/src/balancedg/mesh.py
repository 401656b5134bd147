"""Interval and Cartesian meshes plus the positivity point sets."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .quadrature import gauss_lobatto_rule, gauss_rule, lobatto_count


class Mesh1D:
    """Interval mesh given by ascending cell edges."""

    dim = 1

    def __init__(self, cell_edges):
        edges = np.asarray(cell_edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("cell edges must be strictly increasing")
        self.edges = edges
        self.centers = 0.5 * (edges[1:] + edges[:-1])
        self.sizes = np.diff(edges)

    @classmethod
    def uniform(cls, a, b, cells):
        return cls(np.linspace(a, b, cells + 1))

    @property
    def ncells(self):
        return self.sizes.size

    @property
    def shape(self):
        return (self.ncells,)

    @property
    def measure(self):
        return self.edges[-1] - self.edges[0]

    def to_physical(self, xi):
        """Map reference points (npts,) to physical coordinates (ncells, npts)."""
        return self.centers[:, None] + 0.5 * self.sizes[:, None] * np.asarray(xi)[None, :]

    def locate(self, x):
        j = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(j, 0, self.ncells - 1)


class Mesh2D:
    """Tensor-product Cartesian mesh.

    Cells are indexed ``(i, l)`` with ``i`` along x.  Vertical edges carry the
    normal ``(1, 0)`` and horizontal edges ``(0, 1)``; the cell on the
    negative side sees the edge normal as outward, its neighbour the opposite.
    """

    dim = 2

    def __init__(self, x_edges, y_edges):
        x = np.asarray(x_edges, dtype=float)
        y = np.asarray(y_edges, dtype=float)
        for e in (x, y):
            if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
                raise DomainError("edges must be strictly increasing")
        self.x_edges, self.y_edges = x, y
        self.dx = np.diff(x)
        self.dy = np.diff(y)
        self.xc = 0.5 * (x[1:] + x[:-1])
        self.yc = 0.5 * (y[1:] + y[:-1])
        self.areas = np.outer(self.dx, self.dy)

    @classmethod
    def uniform(cls, box, nx, ny):
        (x0, x1), (y0, y1) = box
        return cls(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1))

    @property
    def shape(self):
        return (self.dx.size, self.dy.size)

    @property
    def ncells(self):
        return self.dx.size * self.dy.size

    @property
    def measure(self):
        return (self.x_edges[-1] - self.x_edges[0]) * (self.y_edges[-1] - self.y_edges[0])

    def to_physical(self, ref):
        """Map reference points (npts, 2) to arrays X, Y of shape (nx, ny, npts)."""
        ref = np.asarray(ref, dtype=float)
        X = self.xc[:, None, None] + 0.5 * self.dx[:, None, None] * ref[None, None, :, 0]
        Y = self.yc[None, :, None] + 0.5 * self.dy[None, :, None] * ref[None, None, :, 1]
        return np.broadcast_arrays(X, Y)

    def edge_lengths(self):
        """Lengths of vertical edges (dy per row) and horizontal edges (dx per column)."""
        return self.dy, self.dx

    def outward_normals(self):
        """Outward normals of a cell's (left, right, bottom, top) edges."""
        return np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])


@dataclass(frozen=True)
class PositivityPointSet:
    """Reference-cell points where admissibility is enforced.

    ``weights`` are the convex-decomposition weights of the cell average;
    points only used by source quadrature carry weight zero and the tag
    ``"source"``.
    """

    points: np.ndarray
    tags: tuple
    weights: np.ndarray
    lobatto_end_weight: float = 0.0
    extra: dict = field(default_factory=dict)

    def physical(self, mesh):
        return mesh.to_physical(self.points)

    def decomposition_average(self, values):
        """Weighted sum of point values, i.e. the reproduced cell average."""
        return np.tensordot(values, self.weights, axes=([-1], [0]))


def _merge(points, weights, tags, tol=1e-14):
    out_p, out_w, out_t = [], [], []
    for p, w, t in zip(points, weights, tags):
        for idx, q in enumerate(out_p):
            if np.all(np.abs(np.asarray(q) - np.asarray(p)) < tol):
                out_w[idx] += w
                if t not in out_t[idx].split("+"):
                    out_t[idx] = out_t[idx] + "+" + t
                break
        else:
            out_p.append(p)
            out_w.append(w)
            out_t.append(t)
    return np.array(out_p, dtype=float), np.array(out_w, dtype=float), tuple(out_t)


def pp_point_set_1d(k):
    """Lobatto(L) union Gauss(k+1) on the reference interval."""
    if k < 0:
        raise DomainError("degree must be nonnegative")
    lob = gauss_lobatto_rule(lobatto_count(k))
    gau = gauss_rule(k + 1)
    L = len(lob)
    pts = list(lob.nodes) + list(gau.nodes)
    wts = list(lob.weights) + [0.0] * len(gau)
    tags = ["edge"] + ["interior"] * (L - 2) + ["edge"] + ["source"] * len(gau)
    p, w, t = _merge(pts, wts, tags)
    order = np.argsort(p, kind="stable")
    return PositivityPointSet(p[order], tuple(t[i] for i in order), w[order], lob.weights[0])


def pp_point_set_2d(k, dx=1.0, dy=1.0):
    """Point set (Lobatto x Gauss) U (Gauss x Lobatto) U (Gauss x Gauss).

    Weights follow the split of the cell average into a dx-weighted
    Gauss-in-x/Lobatto-in-y part and a dy-weighted Lobatto-in-x/Gauss-in-y part.
    """
    if k < 0:
        raise DomainError("degree must be nonnegative")
    lob = gauss_lobatto_rule(lobatto_count(k))
    gau = gauss_rule(k + 1)
    sx = dx / (dx + dy)
    sy = dy / (dx + dy)
    L = len(lob)
    pts, wts, tags = [], [], []
    for nu in range(L):
        tag = "edge" if nu in (0, L - 1) else "interior"
        for mu in range(len(gau)):
            # horizontal lines y = yhat_nu (bottom/top edges when nu is an end)
            pts.append((gau.nodes[mu], lob.nodes[nu]))
            wts.append(sx * lob.weights[nu] * gau.weights[mu])
            tags.append(tag)
            # vertical lines x = xhat_nu
            pts.append((lob.nodes[nu], gau.nodes[mu]))
            wts.append(sy * lob.weights[nu] * gau.weights[mu])
            tags.append(tag)
    for a in gau.nodes:
        for b in gau.nodes:
            pts.append((a, b))
            wts.append(0.0)
            tags.append("source")
    p, w, t = _merge(pts, wts, tags)
    return PositivityPointSet(p, t, w, lob.weights[0], {"dx": dx, "dy": dy})
