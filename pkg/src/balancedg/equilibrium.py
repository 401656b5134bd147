"""Hydrostatic profiles and their projected, precomputed DG counterparts."""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .basis import basis_for
from .errors import DomainError
from .field import DgField, l2_project, tensor_gauss
from .limiters import LimiterParams, point_set_for, scaling_limit
from .quadrature import gauss_rule


@dataclass(frozen=True)
class Potential:
    """Gravitational potential with its analytic gradient.

    ``gradient(*coords)`` returns an array with a trailing axis of length dim.
    """

    value: Callable
    gradient: Callable
    dim: int


def linear_potential(g=1.0, dim=1):
    """phi = g x in 1D, g (x + y) in 2D."""
    if dim == 1:
        return Potential(lambda x: g * np.asarray(x, float),
                         lambda x: np.full(np.shape(x) + (1,), float(g)), 1)
    return Potential(lambda x, y: g * (np.asarray(x, float) + y),
                     lambda x, y: np.full(np.broadcast(x, y).shape + (2,), float(g)), 2)


def quadratic_potential(center=0.0, dim=1):
    """phi = |x - center|^2 / 2."""
    if dim == 1:
        c = float(center)
        return Potential(lambda x: 0.5 * (np.asarray(x, float) - c) ** 2,
                         lambda x: (np.asarray(x, float) - c)[..., None], 1)
    cx, cy = center if np.ndim(center) else (center, center)
    return Potential(lambda x, y: 0.5 * ((np.asarray(x, float) - cx) ** 2 + (np.asarray(y, float) - cy) ** 2),
                     lambda x, y: np.stack(np.broadcast_arrays(np.asarray(x, float) - cx,
                                                               np.asarray(y, float) - cy), axis=-1), 2)


@dataclass(frozen=True)
class EquilibriumProfile:
    """Zero-velocity hydrostatic state rho_e(*coords), p_e(*coords)."""

    rho_e: Callable
    p_e: Callable
    dim: int
    potential: Optional[Potential] = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def grad_phi(self, *coords):
        if self.potential is None:
            raise DomainError(f"{self.kind} profile carries no potential")
        return self.potential.gradient(*coords)

    def check_positive(self, *coords):
        r = np.asarray(self.rho_e(*coords))
        p = np.asarray(self.p_e(*coords))
        if not (np.all(r > 0) and np.all(p > 0)):
            raise DomainError(f"{self.kind} profile is not positive on the sampled domain")


def isothermal_profile(rho0, p0, potential=None, g=None, dim=1):
    """rho = rho0 exp(-phi/RT), p = p0 exp(-phi/RT) with RT = p0/rho0."""
    if rho0 <= 0 or p0 <= 0:
        raise DomainError("isothermal profile needs rho0 > 0 and p0 > 0")
    if potential is None:
        potential = linear_potential(0.0 if g is None else g, dim)
    rt = p0 / rho0

    def rho_e(*c):
        return rho0 * np.exp(-potential.value(*c) / rt)

    def p_e(*c):
        return p0 * np.exp(-potential.value(*c) / rt)

    return EquilibriumProfile(rho_e, p_e, potential.dim, potential, "isothermal",
                              dict(rho0=rho0, p0=p0))


def polytropic_profile(K0, gamma, rho0=1.0, potential=None, g=1.0, dim=1):
    """p = K0 rho^gamma with rho = ((gamma-1)/(K0 gamma) (C - phi))^(1/(gamma-1)).

    C is fixed by rho = rho0 where phi = 0.  Evaluating where the bracket is
    not positive raises DomainError.
    """
    if K0 <= 0 or not gamma > 1 or rho0 <= 0:
        raise DomainError("polytropic profile needs K0 > 0, gamma > 1, rho0 > 0")
    if potential is None:
        potential = linear_potential(g, dim)
    C = K0 * gamma / (gamma - 1.0) * rho0 ** (gamma - 1.0)

    def rho_e(*c):
        bracket = (gamma - 1.0) / (K0 * gamma) * (C - potential.value(*c))
        if np.any(bracket <= 0):
            raise DomainError("polytropic profile density is nonpositive at a requested point")
        return bracket ** (1.0 / (gamma - 1.0))

    def p_e(*c):
        return K0 * rho_e(*c) ** gamma

    return EquilibriumProfile(rho_e, p_e, potential.dim, potential, "polytropic",
                              dict(K0=K0, gamma=gamma, rho0=rho0))


def gas_sphere_profile(K0=1.0, rho_c=1.0, g=1.0, center=(0.0, 0.0), box=None):
    """Self-gravitating polytrope with gamma = 2: rho = rho_c sin(a r)/(a r)."""
    if min(K0, rho_c, g) <= 0:
        raise DomainError("gas sphere parameters must be positive")
    alpha = np.sqrt(2.0 * np.pi * g / K0)
    cx, cy = center
    if box is not None:
        (x0, x1), (y0, y1) = box
        rmax = np.hypot(max(abs(x0 - cx), abs(x1 - cx)), max(abs(y0 - cy), abs(y1 - cy)))
        if alpha * rmax >= np.pi:
            raise DomainError("domain reaches the first zero of the gas-sphere density")

    def radius(x, y):
        return np.hypot(np.asarray(x, float) - cx, np.asarray(y, float) - cy)

    def sinc(x, y):
        return np.sinc(alpha * radius(x, y) / np.pi)

    def dsinc_dr_over_r(r):
        # (d/dr sinc(alpha r)) / r, with its limit -alpha^2/3 at r = 0
        ar = alpha * r
        small = ar < 1e-4
        safe = np.where(small, 1.0, ar)
        exact = alpha * alpha * (safe * np.cos(safe) - np.sin(safe)) / safe ** 3
        series = alpha * alpha * (-1.0 / 3.0 + ar * ar / 30.0)
        return np.where(small, series, exact)

    def grad(x, y):
        f = -2.0 * K0 * rho_c * dsinc_dr_over_r(radius(x, y))
        return np.stack(np.broadcast_arrays(f * (np.asarray(x, float) - cx),
                                            f * (np.asarray(y, float) - cy)), axis=-1)

    pot = Potential(lambda x, y: -2.0 * K0 * rho_c * sinc(x, y), grad, 2)
    return EquilibriumProfile(lambda x, y: rho_c * sinc(x, y),
                              lambda x, y: K0 * (rho_c * sinc(x, y)) ** 2,
                              2, pot, "gas_sphere", dict(K0=K0, rho_c=rho_c, g=g, alpha=alpha))


def tabulated_profile(path):
    """1D profile from a text table with rows ``x rho p`` (monotone cubic).

    Balance holds only to interpolation accuracy of the table.
    """
    from scipy.interpolate import PchipInterpolator

    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 3:
        raise DomainError("equilibrium table needs three columns: x, rho, p")
    order = np.argsort(data[:, 0])
    x, rho, p = data[order].T
    if np.any(rho <= 0) or np.any(p <= 0):
        raise DomainError("tabulated equilibrium must be positive")
    rho_i = PchipInterpolator(x, rho, extrapolate=True)
    p_i = PchipInterpolator(x, p, extrapolate=True)
    dp = p_i.derivative()
    pot = Potential(lambda x_: np.full(np.shape(x_), np.nan),
                    lambda x_: (-dp(x_) / rho_i(x_))[..., None], 1)
    return EquilibriumProfile(rho_i, p_i, 1, pot, "tabulated", dict(path=str(path)))


def equilibrium_state(profile, eos):
    """Conserved-variable function (rho_e, 0, rho_e * e(rho_e, p_e))."""
    d = profile.dim

    def f(*c):
        r = np.asarray(profile.rho_e(*c), float)
        p = np.asarray(profile.p_e(*c), float)
        out = np.zeros(r.shape + (d + 2,))
        out[..., 0] = r
        out[..., -1] = r * eos.internal_energy(r, p)
        return out

    return f


def _scale_factors(eos, rho, E, p, p_star):
    """Per-side factor turning an equilibrium trace into the star state."""
    if eos.kind == "ideal":
        return p_star / p
    return eos.internal_energy(rho, p_star) / (E / rho)


class ProjectedEquilibrium:
    """DG projection of a hydrostatic state with all interface data cached.

    Boundary convention: at a non-periodic boundary the exterior
    equilibrium values equal the interior trace, so the star pressure is the
    interior trace and the scaling factors are one.
    """

    def __init__(self, profile, mesh, degree, eos, periodic=False, params=LimiterParams()):
        if profile.dim != mesh.dim:
            raise DomainError("profile and mesh dimensions differ")
        self.profile = profile
        self.mesh = mesh
        self.degree = degree
        self.eos = eos
        self.dim = mesh.dim
        self.periodic = (periodic,) * mesh.dim if np.ndim(periodic) == 0 else tuple(periodic)
        basis = basis_for(mesh.dim, degree)
        self.basis = basis
        raw = l2_project(equilibrium_state(profile, eos), mesh, degree, mesh.dim + 2)
        ps = point_set_for(mesh, degree)
        B = basis.values(ps.points)
        pts = B @ raw.coef
        self.fix_applied = bool(np.any(pts[..., 0] <= 0) or np.any(pts[..., -1] <= 0))
        coef = scaling_limit(raw.coef, B, params) if self.fix_applied else raw.coef
        self.field = DgField(mesh, degree, coef)
        self.coef = coef
        self.rho_bar = coef[..., 0, 0]
        if mesh.dim == 1:
            self._build_1d()
        else:
            self._build_2d()

    # pressure of a zero-momentum equilibrium value
    def _p(self, rho, E):
        return self.eos.pressure(rho, E)

    def _grad_p(self, rho, E, drho, dE):
        a, b = self.eos.pressure_partials(rho, E)
        if np.ndim(drho) > np.ndim(rho):
            return a[..., None] * drho + b[..., None] * dE
        return a * drho + b * dE

    def _build_1d(self):
        mesh, basis, k = self.mesh, self.basis, self.degree
        c = self.coef
        g = gauss_rule(k + 1)
        self.gauss = g
        B = basis.values(g.nodes)
        D = basis.derivatives(g.nodes) * (2.0 / mesh.sizes[:, None, None])
        vq = B @ c
        dq = D @ c
        self.rho_q = vq[..., 0]
        self.E_q = vq[..., -1]
        self.p_q = self._p(self.rho_q, self.E_q)
        self.dp_q = self._grad_p(self.rho_q, self.E_q, dq[..., 0], dq[..., -1])
        self.p_bar = self._cell_mean_p()

        T = basis.values(np.array([1.0, -1.0])) @ c  # (M, 2, ncomp)
        self.rho_right, self.rho_left = T[:, 0, 0], T[:, 1, 0]
        self.E_right, self.E_left = T[:, 0, -1], T[:, 1, -1]
        self.p_right = self._p(self.rho_right, self.E_right)
        self.p_left = self._p(self.rho_left, self.E_left)

        # interface j+1/2 for j = -1..M-1
        if self.periodic[0]:
            idx_l, idx_r = self.p_right[-1], self.p_left[0]
            r_l, r_r = self.rho_right[-1], self.rho_left[0]
            E_l, E_r = self.E_right[-1], self.E_left[0]
        else:
            idx_l, idx_r = self.p_left[0], self.p_right[-1]
            r_l, r_r = self.rho_left[0], self.rho_right[-1]
            E_l, E_r = self.E_left[0], self.E_right[-1]
        self.pe_minus = np.concatenate([[idx_l], self.p_right])
        self.pe_plus = np.concatenate([self.p_left, [idx_r]])
        self.rho_minus = np.concatenate([[r_l], self.rho_right])
        self.rho_plus = np.concatenate([self.rho_left, [r_r]])
        self.E_minus = np.concatenate([[E_l], self.E_right])
        self.E_plus = np.concatenate([self.E_left, [E_r]])
        self.p_star = 0.5 * (self.pe_minus + self.pe_plus)
        self.zeta_minus = _scale_factors(self.eos, self.rho_minus, self.E_minus, self.pe_minus, self.p_star)
        self.zeta_plus = _scale_factors(self.eos, self.rho_plus, self.E_plus, self.pe_plus, self.p_star)
        self.jump = self.pe_plus - self.pe_minus
        # star pressures seen from each cell: right (j+1/2) and left (j-1/2)
        self.p_star_right = self.p_star[1:]
        self.p_star_left = self.p_star[:-1]

    def _cell_mean_p(self):
        if self.eos.kind == "ideal":
            return self.eos.pressure(self.rho_bar, self.coef[..., 0, -1])
        g = gauss_rule(self.degree + 3)
        if self.dim == 1:
            v = self.basis.values(g.nodes) @ self.coef
            return np.sum(self._p(v[..., 0], v[..., -1]) * g.weights, axis=-1)
        ref, w = tensor_gauss(self.degree + 3)
        v = self.basis.values(ref) @ self.coef
        return np.sum(self._p(v[..., 0], v[..., -1]) * w, axis=-1)

    def _build_2d(self):
        mesh, basis, k = self.mesh, self.basis, self.degree
        c = self.coef
        N = k + 1
        g = gauss_rule(N)
        self.gauss = g
        ref, w = tensor_gauss(N)
        self.vol_points, self.vol_weights = ref, w
        B = basis.values(ref)
        G = basis.gradients(ref)  # (Q, nmodes, 2)
        vq = B @ c
        sx = (2.0 / mesh.dx)[:, None, None, None]
        sy = (2.0 / mesh.dy)[None, :, None, None]
        dxq = (G[..., 0] @ c) * sx
        dyq = (G[..., 1] @ c) * sy
        self.rho_q = vq[..., 0]
        self.E_q = vq[..., -1]
        self.p_q = self._p(self.rho_q, self.E_q)
        grad = np.stack([dxq, dyq], axis=-1)  # (nx, ny, Q, ncomp, 2)
        self.dp_q = self._grad_p(self.rho_q, self.E_q, grad[..., 0, :], grad[..., -1, :])
        self.p_bar = self._cell_mean_p()

        faces = face_points(N)
        tr = {}
        for name, pts in faces.items():
            v = basis.values(pts) @ c  # (nx, ny, N, ncomp)
            tr[name] = (v[..., 0], v[..., -1])
        self.face_rho = {n: v[0] for n, v in tr.items()}
        self.face_E = {n: v[1] for n, v in tr.items()}
        self.face_p = {n: self._p(*v) for n, v in tr.items()}

        # vertical edges (nx+1, ny, N): minus side is the left cell
        self.v_minus, self.v_plus = _pair_edges(tr, "right", "left", axis=0, periodic=self.periodic[0])
        self.h_minus, self.h_plus = _pair_edges(tr, "top", "bottom", axis=1, periodic=self.periodic[1])
        self.v_p_minus = self._p(*self.v_minus)
        self.v_p_plus = self._p(*self.v_plus)
        self.h_p_minus = self._p(*self.h_minus)
        self.h_p_plus = self._p(*self.h_plus)
        self.v_p_star = 0.5 * (self.v_p_minus + self.v_p_plus)
        self.h_p_star = 0.5 * (self.h_p_minus + self.h_p_plus)
        eos = self.eos
        self.v_zeta_minus = _scale_factors(eos, *self.v_minus, self.v_p_minus, self.v_p_star)
        self.v_zeta_plus = _scale_factors(eos, *self.v_plus, self.v_p_plus, self.v_p_star)
        self.h_zeta_minus = _scale_factors(eos, *self.h_minus, self.h_p_minus, self.h_p_star)
        self.h_zeta_plus = _scale_factors(eos, *self.h_plus, self.h_p_plus, self.h_p_star)

        # per-cell face views of the star pressure and of the interior pressure
        self.face_p_star = {
            "left": self.v_p_star[:-1], "right": self.v_p_star[1:],
            "bottom": self.h_p_star[:, :-1], "top": self.h_p_star[:, 1:],
        }
        self.face_zeta = {
            "left": self.v_zeta_plus[:-1], "right": self.v_zeta_minus[1:],
            "bottom": self.h_zeta_plus[:, :-1], "top": self.h_zeta_minus[:, 1:],
        }


def face_points(N):
    """Reference Gauss points on the four faces of the square."""
    g = gauss_rule(N).nodes
    one = np.ones_like(g)
    return {
        "left": np.column_stack([-one, g]),
        "right": np.column_stack([one, g]),
        "bottom": np.column_stack([g, -one]),
        "top": np.column_stack([g, one]),
    }


def _pair_edges(tr, minus_face, plus_face, axis, periodic):
    """Stack face traces into edge arrays with ghost copies at the ends."""
    out_minus, out_plus = [], []
    for q in range(2):
        m = tr[minus_face][q]
        p = tr[plus_face][q]
        first_p = np.take(p, [0], axis=axis)
        last_m = np.take(m, [-1], axis=axis)
        if periodic:
            ghost_minus, ghost_plus = last_m, first_p
        else:
            ghost_minus, ghost_plus = first_p, last_m
        out_minus.append(np.concatenate([ghost_minus, m], axis=axis))
        out_plus.append(np.concatenate([p, ghost_plus], axis=axis))
    return tuple(out_minus), tuple(out_plus)


def project_equilibrium(profile, mesh, degree, eos, periodic=False, params=LimiterParams()):
    return ProjectedEquilibrium(profile, mesh, degree, eos, periodic, params)
