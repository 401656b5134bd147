"""Gauss and Gauss-Lobatto rules on [-1, 1] with weights summing to one."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from .errors import DomainError


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int

    def __len__(self):
        return len(self.nodes)

    def mapped(self, a, b):
        """Nodes mapped to the physical interval [a, b]."""
        return 0.5 * (a + b) + 0.5 * (b - a) * self.nodes


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def gauss_rule(n):
    """n-point Gauss-Legendre rule, exact for degree 2n - 1."""
    if n < 1:
        raise DomainError("Gauss rule needs at least one point")
    x, w = legendre.leggauss(n)
    return QuadratureRule(_frozen(x), _frozen(w / 2.0), 2 * n - 1)


@lru_cache(maxsize=None)
def gauss_lobatto_rule(n):
    """n-point Gauss-Lobatto rule (endpoints included), exact for degree 2n - 3."""
    if n < 2:
        raise DomainError("Gauss-Lobatto rule needs at least two points")
    coeffs = np.zeros(n)
    coeffs[-1] = 1.0  # P_{n-1}
    interior = legendre.legroots(legendre.legder(coeffs)) if n > 2 else np.empty(0)
    # polish the interior roots of P'_{n-1} with a few Newton steps
    d1 = legendre.legder(coeffs)
    d2 = legendre.legder(coeffs, 2)
    for _ in range(3):
        if interior.size:
            interior = interior - legendre.legval(interior, d1) / legendre.legval(interior, d2)
    x = np.concatenate([[-1.0], np.sort(interior), [1.0]])
    p = legendre.legval(x, coeffs)
    w = 1.0 / (n * (n - 1) * p * p)
    return QuadratureRule(_frozen(x), _frozen(w), 2 * n - 3)


def lobatto_count(k):
    """Number of Lobatto points needed for degree k: ceil((k + 3) / 2)."""
    return (k + 4) // 2


def lobatto_end_weight(k):
    L = lobatto_count(k)
    return 1.0 / (L * (L - 1))
