"""Orthonormal modal bases on the reference interval and square.

Normalisation is with respect to the *mean* over the reference cell, so the
zeroth mode is identically one and its coefficient is the cell average.
"""
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from .errors import DomainError


def _legendre_table(k, x):
    """Values and derivatives of sqrt(2a+1) P_a at x, shapes (len(x), k+1)."""
    x = np.asarray(x, dtype=float)
    vals = np.empty(x.shape + (k + 1,))
    ders = np.empty(x.shape + (k + 1,))
    for a in range(k + 1):
        c = np.zeros(a + 1)
        c[a] = np.sqrt(2 * a + 1)
        vals[..., a] = legendre.legval(x, c)
        ders[..., a] = legendre.legval(x, legendre.legder(c)) if a else 0.0
    return vals, ders


class Basis1D:
    dim = 1

    def __init__(self, degree):
        if degree < 0:
            raise DomainError("degree must be nonnegative")
        self.degree = degree
        self.nmodes = degree + 1
        self.mode_degree = np.arange(degree + 1)

    def __repr__(self):
        return f"Basis1D({self.degree})"

    def values(self, xi):
        return _legendre_table(self.degree, xi)[0]

    def derivatives(self, xi):
        """Reference derivatives d/dxi; divide by h/2 for physical ones."""
        return _legendre_table(self.degree, xi)[1]


class Basis2D:
    """Full P^k: products phi_a(xi) phi_b(eta) with a + b <= k."""

    dim = 2

    def __init__(self, degree):
        if degree < 0:
            raise DomainError("degree must be nonnegative")
        self.degree = degree
        self.modes = [(a, t - a) for t in range(degree + 1) for a in range(t, -1, -1)]
        self.nmodes = len(self.modes)
        self.mode_degree = np.array([a + b for a, b in self.modes])
        self.index = {m: i for i, m in enumerate(self.modes)}

    def __repr__(self):
        return f"Basis2D({self.degree})"

    def _tables(self, pts):
        pts = np.asarray(pts, dtype=float)
        vx, dx = _legendre_table(self.degree, pts[..., 0])
        vy, dy = _legendre_table(self.degree, pts[..., 1])
        return vx, dx, vy, dy

    def values(self, pts):
        vx, _, vy, _ = self._tables(pts)
        return np.stack([vx[..., a] * vy[..., b] for a, b in self.modes], axis=-1)

    def gradients(self, pts):
        """Reference gradient, shape (..., nmodes, 2)."""
        vx, dx, vy, dy = self._tables(pts)
        gx = np.stack([dx[..., a] * vy[..., b] for a, b in self.modes], axis=-1)
        gy = np.stack([vx[..., a] * dy[..., b] for a, b in self.modes], axis=-1)
        return np.stack([gx, gy], axis=-1)


@lru_cache(maxsize=None)
def basis_for(dim, degree):
    return Basis1D(degree) if dim == 1 else Basis2D(degree)
