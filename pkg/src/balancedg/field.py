"""Modal DG fields: evaluation, projection, traces and cell averages."""
import numpy as np

from .basis import basis_for
from .errors import DomainError
from .quadrature import gauss_rule


def tensor_gauss(n):
    """Tensor Gauss points (n*n, 2) and weights on the reference square."""
    g = gauss_rule(n)
    X, Y = np.meshgrid(g.nodes, g.nodes, indexing="ij")
    W = np.outer(g.weights, g.weights)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


class DgField:
    """Per-cell modal coefficients.

    ``coef`` has shape ``mesh.shape + (nmodes, ncomp)``.  The basis is
    orthonormal in the cell mean, so ``coef[..., 0, :]`` is the cell average.
    """

    def __init__(self, mesh, degree, coef):
        self.mesh = mesh
        self.basis = basis_for(mesh.dim, degree)
        coef = np.asarray(coef, dtype=float)
        expected = mesh.shape + (self.basis.nmodes,)
        if coef.shape[:-1] != expected:
            raise DomainError(f"coefficient shape {coef.shape} does not match {expected}+(ncomp,)")
        self.coef = coef

    @property
    def degree(self):
        return self.basis.degree

    @property
    def ncomp(self):
        return self.coef.shape[-1]

    def copy(self):
        return DgField(self.mesh, self.degree, self.coef.copy())

    def with_coef(self, coef):
        return DgField(self.mesh, self.degree, coef)

    def at_reference(self, ref_points):
        """Values at reference points in every cell: mesh.shape + (npts, ncomp)."""
        return self.basis.values(ref_points) @ self.coef

    def cell_average(self, cell=None):
        avg = self.coef[..., 0, :]
        return avg if cell is None else avg[cell]

    def evaluate(self, cell, point):
        """Value at a physical point inside the given cell."""
        mesh = self.mesh
        if mesh.dim == 1:
            a, b = mesh.edges[cell], mesh.edges[cell + 1]
            if not (a - 1e-14 * abs(b - a) <= point <= b + 1e-14 * abs(b - a)):
                raise DomainError(f"point {point} lies outside cell {cell}")
            xi = np.array([(2 * point - a - b) / (b - a)])
            return (self.basis.values(xi) @ self.coef[cell])[0]
        i, l = cell
        x, y = point
        x0, x1 = mesh.x_edges[i], mesh.x_edges[i + 1]
        y0, y1 = mesh.y_edges[l], mesh.y_edges[l + 1]
        tol = 1e-14
        if not (x0 - tol <= x <= x1 + tol and y0 - tol <= y <= y1 + tol):
            raise DomainError(f"point {point} lies outside cell {cell}")
        ref = np.array([[(2 * x - x0 - x1) / (x1 - x0), (2 * y - y0 - y1) / (y1 - y0)]])
        return (self.basis.values(ref) @ self.coef[i, l])[0]

    def cell_traces(self):
        """1D only: (value at right end, value at left end) of each cell."""
        if self.mesh.dim != 1:
            raise DomainError("cell_traces is for 1D fields; use edge_traces in 2D")
        B = self.basis.values(np.array([1.0, -1.0]))
        vals = B @ self.coef
        return vals[:, 0], vals[:, 1]

    def interface_traces(self, ghost_left=None, ghost_right=None):
        """1D pairs (U-, U+) at every interface x_{j+1/2}, j = -1..M-1.

        Without ghosts the two boundary interfaces are periodic.
        """
        right, left = self.cell_traces()
        gl = right[-1] if ghost_left is None else ghost_left
        gr = left[0] if ghost_right is None else ghost_right
        minus = np.concatenate([gl[None], right])
        plus = np.concatenate([left, gr[None]])
        return minus, plus


def l2_project(f, mesh, degree, ncomp=None, quad_points=None):
    """Cellwise L2 projection of ``f(*coords) -> (..., ncomp)`` onto P^k."""
    basis = basis_for(mesh.dim, degree)
    n = quad_points or degree + 3
    if mesh.dim == 1:
        g = gauss_rule(n)
        X = mesh.to_physical(g.nodes)
        vals = np.asarray(f(X), dtype=float)
        weights = g.weights
        B = basis.values(g.nodes)
    else:
        ref, weights = tensor_gauss(n)
        X, Y = mesh.to_physical(ref)
        vals = np.asarray(f(X, Y), dtype=float)
        B = basis.values(ref)
    if vals.ndim == len(mesh.shape) + 1:
        vals = vals[..., None]
    if ncomp is not None and vals.shape[-1] != ncomp:
        raise DomainError(f"projected function returns {vals.shape[-1]} components, expected {ncomp}")
    coef = (B * weights[:, None]).T @ vals
    return DgField(mesh, degree, coef)
