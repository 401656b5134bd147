"""Equation-of-state closures.

Every model maps density and pressure to specific internal energy and
sound speed, and inverts the internal energy density ``rho*e`` back to a
pressure.  The solver only ever talks to these five methods.
"""
import numpy as np
from scipy.optimize.elementwise import bracket_root, find_root

from .errors import DomainError, NumericError


class IdealGas:
    """Polytropic ideal gas, ``p = (gamma - 1) rho e``."""

    kind = "ideal"

    def __init__(self, gamma=1.4):
        if not gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {gamma}")
        self.gamma = float(gamma)

    def __repr__(self):
        return f"IdealGas(gamma={self.gamma!r})"

    def internal_energy(self, rho, p):
        return p / ((self.gamma - 1.0) * rho)

    def sound_speed(self, rho, p):
        return np.sqrt(self.gamma * p / rho)

    def signal_speed(self, rho, p):
        # max{p/(rho sqrt(2e)), c} reduces to c for an ideal gas
        return np.sqrt(self.gamma * p / rho)

    def pressure(self, rho, rho_e):
        return (self.gamma - 1.0) * rho_e

    def pressure_partials(self, rho, rho_e):
        """Return (dp/drho, dp/d(rho e)) at fixed other argument."""
        return np.zeros_like(np.asarray(rho_e, dtype=float)), np.full_like(
            np.asarray(rho_e, dtype=float), self.gamma - 1.0)


class GeneralEOS:
    """User-supplied closure ``e = internal_energy(rho, p)``.

    The pressure is recovered by bracketed root finding of
    ``p -> rho*internal_energy(rho, p) - rho_e``.  This requires
    ``internal_energy`` to be increasing in ``p`` with ``e -> 0`` as
    ``p -> 0``; a missing sign change raises :class:`NumericError`.
    """

    kind = "general"
    rtol = 1e-13

    def __init__(self, internal_energy, sound_speed):
        self._internal_energy = internal_energy
        self._sound_speed = sound_speed

    def internal_energy(self, rho, p):
        return self._internal_energy(rho, p)

    def sound_speed(self, rho, p):
        return self._sound_speed(rho, p)

    def signal_speed(self, rho, p):
        e = self.internal_energy(rho, p)
        return np.maximum(p / (rho * np.sqrt(2.0 * e)), self.sound_speed(rho, p))

    def pressure(self, rho, rho_e):
        rho, rho_e = np.broadcast_arrays(np.asarray(rho, float), np.asarray(rho_e, float))
        if np.any(rho <= 0) or np.any(rho_e <= 0):
            raise DomainError("pressure recovery needs rho > 0 and rho*e > 0")

        def residual(p, r, re):
            return r * self.internal_energy(r, p) - re

        guess = np.maximum(rho_e, np.finfo(float).tiny)
        bracket = bracket_root(residual, guess, xmin=0.0, args=(rho, rho_e))
        if not np.all(bracket.success):
            raise NumericError("no sign change found while bracketing the pressure")
        root = find_root(residual, bracket.bracket, args=(rho, rho_e),
                         tolerances=dict(xrtol=self.rtol, xatol=0.0))
        if not np.all(root.success):
            raise NumericError("pressure root-finding did not converge")
        return root.x

    def pressure_partials(self, rho, rho_e, rel_step=1e-6):
        """Central differences of the recovered pressure."""
        rho = np.asarray(rho, float)
        rho_e = np.asarray(rho_e, float)
        dr = rel_step * rho
        de = rel_step * rho_e
        dp_drho = (self.pressure(rho + dr, rho_e) - self.pressure(rho - dr, rho_e)) / (2 * dr)
        dp_de = (self.pressure(rho, rho_e + de) - self.pressure(rho, rho_e - de)) / (2 * de)
        return dp_drho, dp_de


class StiffenedGas(GeneralEOS):
    """Stiffened gas ``p = (gamma-1) rho e - gamma p_inf`` with closed-form inverse."""

    def __init__(self, gamma=4.4, p_inf=0.0):
        if not gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {gamma}")
        if p_inf < 0:
            raise DomainError("p_inf must be nonnegative")
        self.gamma = float(gamma)
        self.p_inf = float(p_inf)
        super().__init__(self._e, self._c)

    def __repr__(self):
        return f"StiffenedGas(gamma={self.gamma!r}, p_inf={self.p_inf!r})"

    def _e(self, rho, p):
        return (p + self.gamma * self.p_inf) / ((self.gamma - 1.0) * rho)

    def _c(self, rho, p):
        return np.sqrt(self.gamma * (p + self.p_inf) / rho)

    def pressure(self, rho, rho_e):
        return (self.gamma - 1.0) * rho_e - self.gamma * self.p_inf

    def pressure_partials(self, rho, rho_e):
        rho_e = np.asarray(rho_e, dtype=float)
        return np.zeros_like(rho_e), np.full_like(rho_e, self.gamma - 1.0)


def parse_eos(text):
    """Build a model from ``ideal:1.4`` or ``stiffened:4.4,6e8``."""
    kind, _, args = text.partition(":")
    values = [float(v) for v in args.split(",") if v.strip()]
    kind = kind.strip().lower()
    if kind == "ideal":
        return IdealGas(*values)
    if kind == "stiffened":
        return StiffenedGas(*values)
    raise DomainError(f"unknown equation of state {text!r}")
