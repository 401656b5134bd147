"""Ghost states for the domain boundary.

A closure is a small record per side.  Periodic sides are wired directly by
the spatial operator; every other kind produces an exterior trace from the
interior one.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

KINDS = ("periodic", "transmissive", "reflective", "dirichlet", "equilibrium", "inflow")


@dataclass(frozen=True)
class Boundary:
    kind: str = "transmissive"
    exact: Optional[Callable] = None  # (t, *coords) -> conserved state
    amplitude: float = 0.0
    angular_frequency: float = 4.0 * np.pi

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.exact is None:
            raise DomainError("dirichlet boundary needs an exact solution")

    def ghost(self, interior, axis, t, coords, equilibrium_state=None):
        """Exterior trace for interior trace(s) ``interior`` (..., ncomp).

        ``axis`` is the coordinate normal to the boundary, ``coords`` the
        boundary point coordinates and ``equilibrium_state`` the projected
        equilibrium trace ``(rho_e, 0, E_e)`` at the same points.
        """
        kind = self.kind
        if kind == "transmissive":
            return interior.copy()
        if kind == "reflective":
            out = interior.copy()
            out[..., 1 + axis] *= -1.0
            return out
        if kind == "dirichlet":
            return np.asarray(self.exact(t, *coords), dtype=float)
        if kind == "equilibrium":
            if equilibrium_state is None:
                raise DomainError("equilibrium ghost needs the projected equilibrium trace")
            return equilibrium_state.copy()
        if kind == "inflow":
            if equilibrium_state is None:
                raise DomainError("inflow perturbation needs the projected equilibrium trace")
            out = equilibrium_state.copy()
            u = self.amplitude * np.sin(self.angular_frequency * t)
            rho = out[..., 0]
            out[..., 1 + axis] = rho * u
            out[..., -1] += 0.5 * rho * u * u
            return out
        raise DomainError("periodic sides have no ghost state")


def ghost_trace(closure, interior, position, time, equilibrium_state=None, axis=0):
    coords = position if isinstance(position, tuple) else (position,)
    return closure.ghost(np.asarray(interior, dtype=float), axis, time, coords, equilibrium_state)


@dataclass(frozen=True)
class BoundaryClosure:
    """Sides ordered (left, right) in 1D and (left, right, bottom, top) in 2D."""

    sides: tuple

    def __post_init__(self):
        if len(self.sides) not in (2, 4):
            raise DomainError("closure needs 2 (1D) or 4 (2D) sides")
        for a, b in zip(self.sides[0::2], self.sides[1::2]):
            if (a.kind == "periodic") != (b.kind == "periodic"):
                raise DomainError("periodic sides must come in pairs")

    @classmethod
    def uniform(cls, kind, dim, **kw):
        return cls(tuple(Boundary(kind, **kw) for _ in range(2 * dim)))

    @property
    def periodic(self):
        return tuple(self.sides[2 * a].kind == "periodic" for a in range(len(self.sides) // 2))
