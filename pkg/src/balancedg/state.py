"""Conserved and primitive states, admissibility and physical fluxes.

States are numpy arrays whose last axis holds ``(rho, m_1[, m_2], E)``,
so a single state, a row of interface traces and a whole grid of
quadrature values all go through the same functions.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError


def dimension(U):
    return np.shape(U)[-1] - 2


class PrimitiveState(NamedTuple):
    rho: np.ndarray
    vel: np.ndarray  # (..., d)
    pres: np.ndarray


@dataclass(frozen=True)
class AdmissibilityReport:
    rho_ok: np.ndarray
    g_value: np.ndarray
    admissible: np.ndarray

    def __bool__(self):
        return bool(np.all(self.admissible))


def _kinetic(U):
    rho = U[..., 0]
    m = U[..., 1:-1]
    return 0.5 * np.sum(m * m, axis=-1) / rho


def internal_energy_functional(U):
    """E - |m|^2/(2 rho), the internal energy density."""
    U = np.asarray(U, dtype=float)
    if np.any(U[..., 0] == 0):
        raise DomainError("internal energy undefined for zero density")
    return U[..., -1] - _kinetic(U)


def is_admissible(U, floor=0.0):
    """Report whether rho > 0 and E - |m|^2/(2 rho) > floor (both strict)."""
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    rho_ok = rho > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        g = U[..., -1] - _kinetic(U)
    finite = np.all(np.isfinite(U), axis=-1)
    ok = rho_ok & (g > floor) & finite
    return AdmissibilityReport(rho_ok, g, ok)


def _require_admissible(U):
    if not is_admissible(U):
        raise DomainError("state is not admissible (needs rho > 0 and positive internal energy)")


def pressure(U, eos):
    """Pressure without admissibility checks (hot-path helper)."""
    return eos.pressure(U[..., 0], U[..., -1] - _kinetic(U))


def cons_to_prim(U, eos):
    U = np.asarray(U, dtype=float)
    _require_admissible(U)
    rho = U[..., 0]
    return PrimitiveState(rho, U[..., 1:-1] / rho[..., None], pressure(U, eos))


def prim_to_cons(W, eos):
    rho = np.asarray(W.rho, dtype=float)
    vel = np.asarray(W.vel, dtype=float)
    p = np.asarray(W.pres, dtype=float)
    if np.any(rho <= 0) or np.any(p <= 0):
        raise DomainError("primitive state needs rho > 0 and p > 0")
    if vel.ndim == rho.ndim:
        vel = vel[..., None]
    E = 0.5 * rho * np.sum(vel * vel, axis=-1) + rho * eos.internal_energy(rho, p)
    return np.concatenate([rho[..., None], rho[..., None] * vel, E[..., None]], axis=-1)


def _normal(n, d):
    n = np.asarray(n, dtype=float)
    if n.ndim == 0:
        n = n.reshape(1)
    if n.shape[-1] != d:
        raise DomainError(f"normal has {n.shape[-1]} components, state has {d}")
    return n


def flux_with_pressure(U, p, n):
    """F(U).n given a precomputed pressure."""
    rho = U[..., 0]
    m = U[..., 1:-1]
    un = np.sum(m * n, axis=-1) / rho
    out = np.empty(np.broadcast_shapes(U.shape, np.shape(n)[:-1] + (U.shape[-1],)))
    out[..., 0] = rho * un
    out[..., 1:-1] = m * un[..., None] + p[..., None] * n
    out[..., -1] = (U[..., -1] + p) * un
    return out


def physical_flux(U, eos, n=1.0):
    """Normal flux (rho u.n, rho (u.n) u + p n, (E + p) u.n)."""
    U = np.asarray(U, dtype=float)
    _require_admissible(U)
    return flux_with_pressure(U, pressure(U, eos), _normal(n, dimension(U)))


def alpha_n(U, eos, n):
    """|u.n| + c (general closures use the redefined speed c-hat)."""
    U = np.asarray(U, dtype=float)
    _require_admissible(U)
    n = _normal(n, dimension(U))
    rho = U[..., 0]
    un = np.sum(U[..., 1:-1] * n, axis=-1) / rho
    return np.abs(un) + eos.signal_speed(rho, pressure(U, eos))


def alpha_max(U, eos):
    """|u| + c."""
    U = np.asarray(U, dtype=float)
    _require_admissible(U)
    rho = U[..., 0]
    speed = np.sqrt(np.sum(U[..., 1:-1] ** 2, axis=-1)) / rho
    return speed + eos.signal_speed(rho, pressure(U, eos))


def wave_speed_bounds(U, p, eos, axis=0):
    """Return (u - c, u + c) along a coordinate axis, no checks."""
    rho = U[..., 0]
    u = U[..., 1 + axis] / rho
    c = eos.signal_speed(rho, p)
    return u - c, u + c
