"""Semi-discrete DG operators in 1D and on 2D Cartesian meshes.

Both operators return ``d coef / dt``: with the mean-orthonormal basis the
mass matrix is the cell measure times the identity, so every weak-form term
below is already divided by the cell measure.  Mode 0 is therefore the
cell-average evolution.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import basis_for
from .equilibrium import ProjectedEquilibrium, face_points
from .errors import DomainError, PositivityFault
from .field import tensor_gauss
from .fluxes import hllc_raw, lf_raw
from . import kernels
from .quadrature import gauss_rule, lobatto_end_weight
from .state import flux_with_pressure

SCHEMES = ("wb-hllc", "nonwb-hllc", "wb-lf")


@dataclass
class SchemeConfig:
    degree: int
    eos: object
    equilibrium: ProjectedEquilibrium
    scheme: str = "wb-hllc"
    potential: Optional[object] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}; pick one of {SCHEMES}")
        if self.scheme == "wb-lf":
            if self.eos.kind != "ideal" or self.equilibrium.profile.kind != "isothermal":
                raise DomainError("the modified LF scheme needs an isothermal profile and an ideal gas")
            if self.equilibrium.dim != 1:
                raise DomainError("the modified LF scheme is one-dimensional")
        if self.scheme == "nonwb-hllc" and self.potential is None:
            raise DomainError("the non-balanced scheme needs a potential with a gradient")


def _internal(U):
    return U[..., -1] - 0.5 * np.sum(U[..., 1:-1] ** 2, axis=-1) / U[..., 0]


def _check(U, what, ncell_axes):
    with np.errstate(invalid="ignore", divide="ignore"):
        g = _internal(U)
        bad = ~(U[..., 0] > 0) | ~(g > 0) | ~np.all(np.isfinite(U), axis=-1)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        cell = tuple(int(i) for i in idx[:ncell_axes])
        raise PositivityFault(f"inadmissible {what} value in cell {cell}", cell)


def _speed(U, p, eos, axis):
    return np.abs(U[..., 1 + axis] / U[..., 0]) + eos.signal_speed(U[..., 0], p)


class Operator1D:
    def __init__(self, mesh, config, closure):
        if mesh.dim != 1:
            raise DomainError("Operator1D needs a 1D mesh")
        self.mesh = mesh
        self.cfg = config
        self.closure = closure
        self.eos = config.eos
        self.eq = config.equilibrium
        if self.eq.periodic[0] != closure.periodic[0]:
            raise DomainError("equilibrium and closure disagree on periodicity")
        k = config.degree
        self.k = k
        self.basis = basis_for(1, k)
        g = gauss_rule(k + 1)
        self.gauss = g
        B = self.basis.values(g.nodes)
        D = self.basis.derivatives(g.nodes)
        self.B = B
        self.Bw = B * g.weights[:, None]  # (N, nm)
        self.Dw = D * g.weights[:, None]
        self.T = self.basis.values(np.array([1.0, -1.0]))  # rows: right end, left end
        self.h = mesh.sizes
        self.inv_h = 1.0 / mesh.sizes
        self.w_end = lobatto_end_weight(k)
        if config.scheme == "nonwb-hllc":
            X = mesh.to_physical(g.nodes)
            self.grad_phi_q = config.potential.gradient(X)[..., 0]

    # ------------------------------------------------------------------ states
    def point_values(self, coef):
        return self.B @ coef

    def cell_traces(self, coef):
        v = self.T @ coef
        return v[:, 0], v[:, 1]

    def _eq_state(self, side):
        eq = self.eq
        if side == 0:
            return np.array([eq.rho_left[0], 0.0, eq.E_left[0]])
        return np.array([eq.rho_right[-1], 0.0, eq.E_right[-1]])

    def interface_states(self, coef, t):
        """(U-, U+) at every interface including the two boundary ones."""
        right, left = self.cell_traces(coef)
        if self.closure.periodic[0]:
            gl, gr = right[-1], left[0]
        else:
            x0, x1 = self.mesh.edges[0], self.mesh.edges[-1]
            gl = self.closure.sides[0].ghost(left[0], 0, t, (np.array(x0),), self._eq_state(0))
            gr = self.closure.sides[1].ghost(right[-1], 0, t, (np.array(x1),), self._eq_state(1))
        minus = np.concatenate([gl[None], right])
        plus = np.concatenate([left, gr[None]])
        return minus, plus

    # ---------------------------------------------------------------- pieces
    def element_flux_integral(self, coef, vq=None, pq=None):
        if vq is None:
            vq = self.point_values(coef)
            _check(vq, "Gauss-point", 1)
        if pq is None:
            pq = self.eos.pressure(vq[..., 0], _internal(vq))
        F = flux_with_pressure(vq, pq, np.ones(1))
        return (self.Dw.T @ F) * (2.0 * self.inv_h)[:, None, None]

    def numerical_flux(self, minus, plus):
        eos, eq, scheme = self.eos, self.eq, self.cfg.scheme
        if scheme == "wb-hllc":
            minus = minus * eq.zeta_minus[:, None]
            plus = plus * eq.zeta_plus[:, None]
        pm = eos.pressure(minus[..., 0], _internal(minus))
        pp = eos.pressure(plus[..., 0], _internal(plus))
        if scheme == "wb-lf":
            alpha = np.maximum(_speed(minus, pm, eos, 0), _speed(plus, pp, eos, 0))
            rmax = np.maximum(eq.rho_minus, eq.rho_plus)
            return lf_raw(minus, plus, pm, pp, eq.rho_minus, eq.rho_plus, rmax, alpha)
        return hllc_raw(minus, plus, pm, pp, eos.signal_speed(minus[..., 0], pm),
                        eos.signal_speed(plus[..., 0], pp), 0)

    def interface_flux_term(self, Fhat):
        phi_r, phi_l = self.T[0], self.T[1]
        return -(phi_r[None, :, None] * Fhat[1:, None, :]
                 - phi_l[None, :, None] * Fhat[:-1, None, :]) * self.inv_h[:, None, None]

    def wb_source(self, coef, vq=None):
        """Well-balanced source: momentum and energy rows, per mode."""
        eq = self.eq
        if vq is None:
            vq = self.point_values(coef)
        rho_ratio = coef[:, 0, 0] / eq.rho_bar
        mom_ratio = coef[:, 0, 1] / eq.rho_bar
        r = vq[..., 0] / eq.rho_q - rho_ratio[:, None]
        s = vq[..., 1] / eq.rho_q - mom_ratio[:, None]
        phi_r, phi_l = self.T[0], self.T[1]
        bnd = ((eq.p_star_right[:, None] * phi_r[None] - eq.p_star_left[:, None] * phi_l[None])
               - 2.0 * (eq.p_q @ self.Dw)) * self.inv_h[:, None]
        out = np.zeros_like(coef)
        out[..., 1] = (r * eq.dp_q) @ self.Bw + rho_ratio[:, None] * bnd
        out[..., 2] = (s * eq.dp_q) @ self.Bw + mom_ratio[:, None] * bnd
        return out

    def nonwb_source(self, coef, vq=None):
        if vq is None:
            vq = self.point_values(coef)
        gp = self.grad_phi_q
        out = np.zeros_like(coef)
        out[..., 1] = (-vq[..., 0] * gp) @ self.Bw
        out[..., 2] = (-vq[..., 1] * gp) @ self.Bw
        return out

    def rhs(self, coef, t=0.0):
        vq = self.point_values(coef)
        _check(vq, "Gauss-point", 1)
        minus, plus = self.interface_states(coef, t)
        _check(minus, "trace", 1)
        _check(plus, "trace", 1)
        pq = self.eos.pressure(vq[..., 0], _internal(vq))
        out = self.element_flux_integral(coef, vq, pq)
        out += self.interface_flux_term(self.numerical_flux(minus, plus))
        if self.cfg.scheme == "nonwb-hllc":
            out += self.nonwb_source(coef, vq)
        else:
            out += self.wb_source(coef, vq)
        return out

    # ------------------------------------------------------------------- CFL
    def source_speeds(self, coef, vq=None):
        """(per-cell max over Gauss points of |p_x|/(rho_e sqrt(2e)), cell-mean term)."""
        eq = self.eq
        if vq is None:
            vq = self.point_values(coef)
        e_q = _internal(vq) / vq[..., 0]
        local = np.max(np.abs(eq.dp_q) / (eq.rho_q * np.sqrt(2.0 * e_q)), axis=-1)
        avg = coef[:, 0, :]
        e_bar = _internal(avg) / avg[:, 0]
        integral = eq.dp_q @ self.gauss.weights * self.h
        mean = np.abs(eq.p_star_right - eq.p_star_left - integral) / (eq.rho_bar * np.sqrt(2.0 * e_bar))
        return local, mean

    def alpha(self, coef, t=0.0):
        """Per-cell CFL coefficient of the positivity condition.

        k = 0: alpha_hat with alpha_hat * dt <= h.
        k >= 1: alpha_tilde with alpha_tilde * dt <= w_end * h.
        """
        eos, eq, scheme = self.eos, self.eq, self.cfg.scheme
        minus, plus = self.interface_states(coef, t)
        pm = eos.pressure(minus[..., 0], _internal(minus))
        pp = eos.pressure(plus[..., 0], _internal(plus))
        am = _speed(minus, pm, eos, 0)
        ap = _speed(plus, pp, eos, 0)
        a_if = np.maximum(am, ap)  # per interface
        amax = np.maximum(a_if[:-1], a_if[1:])
        local, mean = self.source_speeds(coef)
        if scheme == "wb-lf":
            rmax = np.maximum(eq.rho_minus, eq.rho_plus)
            if self.k == 0:
                return (a_if[:-1] * rmax[:-1] + a_if[1:] * rmax[1:]) / (2.0 * eq.rho_bar) + mean
            ratio = np.maximum(rmax[1:] / eq.rho_minus[1:], rmax[:-1] / eq.rho_plus[:-1])
            return ratio * amax + self.w_end * (self.h * local + mean)
        if scheme == "nonwb-hllc":
            return 2.0 * amax
        if self.k == 0:
            return 2.0 * (eq.zeta_minus[1:] + eq.zeta_plus[:-1]) * amax + mean
        ratio = np.maximum(eq.zeta_minus[1:], eq.zeta_plus[:-1])
        return 2.0 * ratio * amax + self.w_end * (self.h * local + mean)

    def dt_coefficients(self, coef, t=0.0):
        """A_j such that dt * A_j <= w_end is the positivity condition."""
        a = self.alpha(coef, t)
        if self.k == 0 and self.cfg.scheme != "nonwb-hllc":
            return self.w_end * a * self.inv_h
        return a * self.inv_h

    def max_stable_dt(self, coef, cfl, t=0.0):
        return cfl / np.max(self.dt_coefficients(coef, t))


class Operator2D:
    FACES = ("left", "right", "bottom", "top")

    def __init__(self, mesh, config, closure):
        if mesh.dim != 2:
            raise DomainError("Operator2D needs a 2D mesh")
        if config.scheme == "wb-lf":
            raise DomainError("the modified LF scheme is one-dimensional")
        self.mesh = mesh
        self.cfg = config
        self.closure = closure
        self.eos = config.eos
        self.eq = config.equilibrium
        if tuple(self.eq.periodic) != tuple(closure.periodic):
            raise DomainError("equilibrium and closure disagree on periodicity")
        k = config.degree
        self.k = k
        self.basis = basis_for(2, k)
        N = k + 1
        g = gauss_rule(N)
        self.gauss = g
        ref, wq = tensor_gauss(N)
        self.ref, self.wq = ref, wq
        B = self.basis.values(ref)
        G = self.basis.gradients(ref)
        self.B = B
        self.Bw = B * wq[:, None]
        self.Gxw = G[..., 0] * wq[:, None]
        self.Gyw = G[..., 1] * wq[:, None]
        self.face_ref = face_points(N)
        self.Bf = {f: self.basis.values(p) for f, p in self.face_ref.items()}
        self.Bfw = {f: b * g.weights[:, None] for f, b in self.Bf.items()}
        self.inv_dx = (1.0 / mesh.dx)[:, None, None]
        self.inv_dy = (1.0 / mesh.dy)[None, :, None]
        self.w_end = lobatto_end_weight(k)
        self.compiled = self.eos.kind == "ideal"
        if config.scheme == "nonwb-hllc":
            X, Y = mesh.to_physical(ref)
            self.grad_phi_q = config.potential.gradient(X, Y)
        # boundary point coordinates
        gy = mesh.yc[:, None] + 0.5 * mesh.dy[:, None] * g.nodes[None]
        gx = mesh.xc[:, None] + 0.5 * mesh.dx[:, None] * g.nodes[None]
        self._bcoords = {
            "left": (np.full_like(gy, mesh.x_edges[0]), gy),
            "right": (np.full_like(gy, mesh.x_edges[-1]), gy),
            "bottom": (gx, np.full_like(gx, mesh.y_edges[0])),
            "top": (gx, np.full_like(gx, mesh.y_edges[-1])),
        }

    def point_values(self, coef):
        return self.B @ coef

    def face_values(self, coef):
        return {f: self.Bf[f] @ coef for f in self.FACES}

    def _eq_face_state(self, face, index):
        memo = self.__dict__.setdefault("_eq_face_memo", {})
        if (face, index) not in memo:
            memo[face, index] = self._eq_face_state_build(face, index)
        return memo[face, index]

    def _eq_face_state_build(self, face, index):
        eq = self.eq
        r = np.take(eq.face_rho[face], index, axis=0 if face in ("left", "right") else 1)
        E = np.take(eq.face_E[face], index, axis=0 if face in ("left", "right") else 1)
        out = np.zeros(r.shape + (4,))
        out[..., 0] = r
        out[..., 3] = E
        return out

    def edge_states(self, coef, t, faces=None):
        """Vertical (nx+1, ny, N, 4) and horizontal (nx, ny+1, N, 4) trace pairs."""
        tf = faces if faces is not None else self.face_values(coef)
        per_x, per_y = self.closure.periodic
        sides = self.closure.sides
        if per_x:
            gl, gr = tf["right"][-1], tf["left"][0]
        else:
            gl = sides[0].ghost(tf["left"][0], 0, t, self._bcoords["left"], self._eq_face_state("left", 0))
            gr = sides[1].ghost(tf["right"][-1], 0, t, self._bcoords["right"], self._eq_face_state("right", -1))
        if per_y:
            gb, gt = tf["top"][:, -1], tf["bottom"][:, 0]
        else:
            gb = sides[2].ghost(tf["bottom"][:, 0], 1, t, self._bcoords["bottom"], self._eq_face_state("bottom", 0))
            gt = sides[3].ghost(tf["top"][:, -1], 1, t, self._bcoords["top"], self._eq_face_state("top", -1))
        vm = np.concatenate([gl[None], tf["right"]], axis=0)
        vp = np.concatenate([tf["left"], gr[None]], axis=0)
        hm = np.concatenate([gb[:, None], tf["top"]], axis=1)
        hp = np.concatenate([tf["bottom"], gt[:, None]], axis=1)
        return vm, vp, hm, hp

    def element_flux_integral(self, coef, vq=None, pq=None):
        if vq is None:
            vq = self.point_values(coef)
            _check(vq, "Gauss-point", 2)
        if pq is None:
            pq = self.eos.pressure(vq[..., 0], _internal(vq))
        Fx = flux_with_pressure(vq, pq, np.array([1.0, 0.0]))
        Fy = flux_with_pressure(vq, pq, np.array([0.0, 1.0]))
        return (self.Gxw.T @ Fx) * (2.0 * self.inv_dx[..., None]) + (self.Gyw.T @ Fy) * (2.0 * self.inv_dy[..., None])

    def _flux(self, minus, plus, zm, zp, axis):
        eos = self.eos
        if self.cfg.scheme == "wb-hllc":
            minus = minus * zm[..., None]
            plus = plus * zp[..., None]
        pm = eos.pressure(minus[..., 0], _internal(minus))
        pp = eos.pressure(plus[..., 0], _internal(plus))
        return hllc_raw(minus, plus, pm, pp, eos.signal_speed(minus[..., 0], pm),
                        eos.signal_speed(plus[..., 0], pp), axis)

    def numerical_fluxes(self, vm, vp, hm, hp):
        eq = self.eq
        Fv = self._flux(vm, vp, eq.v_zeta_minus, eq.v_zeta_plus, 0)
        Fh = self._flux(hm, hp, eq.h_zeta_minus, eq.h_zeta_plus, 1)
        return Fv, Fh

    def edge_flux_term(self, Fv, Fh):
        Bfw = self.Bfw
        out = -((Bfw["right"].T @ Fv[1:]) - (Bfw["left"].T @ Fv[:-1])) * self.inv_dx[..., None]
        out -= ((Bfw["top"].T @ Fh[:, 1:]) - (Bfw["bottom"].T @ Fh[:, :-1])) * self.inv_dy[..., None]
        return out

    def _boundary_pressure_terms(self):
        """Per mode: sum over edges of (|E|/|K|) sum_mu w p_star n phi minus the volume pressure term."""
        eq, Bfw = self.eq, self.Bfw
        ps = eq.face_p_star
        bx = (ps["right"] @ Bfw["right"] - ps["left"] @ Bfw["left"]) * self.inv_dx \
            - 2.0 * (eq.p_q @ self.Gxw) * self.inv_dx
        by = (ps["top"] @ Bfw["top"] - ps["bottom"] @ Bfw["bottom"]) * self.inv_dy \
            - 2.0 * (eq.p_q @ self.Gyw) * self.inv_dy
        return bx, by

    def wb_source(self, coef, vq=None):
        eq = self.eq
        if vq is None:
            vq = self.point_values(coef)
        if not hasattr(self, "_bnd"):
            self._bnd = self._boundary_pressure_terms()
        bx, by = self._bnd
        rho_ratio = coef[..., 0, 0] / eq.rho_bar
        mx_ratio = coef[..., 0, 1] / eq.rho_bar
        my_ratio = coef[..., 0, 2] / eq.rho_bar
        r = vq[..., 0] / eq.rho_q - rho_ratio[..., None]
        sx = vq[..., 1] / eq.rho_q - mx_ratio[..., None]
        sy = vq[..., 2] / eq.rho_q - my_ratio[..., None]
        dpx, dpy = eq.dp_q[..., 0], eq.dp_q[..., 1]
        out = np.zeros_like(coef)
        out[..., 1] = (r * dpx) @ self.Bw + rho_ratio[..., None] * bx
        out[..., 2] = (r * dpy) @ self.Bw + rho_ratio[..., None] * by
        out[..., 3] = ((sx * dpx + sy * dpy) @ self.Bw
                       + mx_ratio[..., None] * bx + my_ratio[..., None] * by)
        return out

    def nonwb_source(self, coef, vq=None):
        if vq is None:
            vq = self.point_values(coef)
        gx, gy = self.grad_phi_q[..., 0], self.grad_phi_q[..., 1]
        out = np.zeros_like(coef)
        out[..., 1] = (-vq[..., 0] * gx) @ self.Bw
        out[..., 2] = (-vq[..., 0] * gy) @ self.Bw
        out[..., 3] = (-(vq[..., 1] * gx + vq[..., 2] * gy)) @ self.Bw
        return out

    def rhs(self, coef, t=0.0):
        if self.compiled:
            return self._rhs_compiled(coef, t)
        return self.rhs_reference(coef, t)

    def _fault(self, flat, what):
        cell = tuple(int(i) for i in np.unravel_index(flat, self.mesh.shape))
        raise PositivityFault(f"inadmissible {what} value in cell {cell}", cell)

    # Compiled ideal-gas path: one pass for traces, one for volume terms and
    # one over edges, with boundary ghosts supplied from Python.
    def _compiled_data(self):
        if getattr(self, "_cd", None) is not None:
            return self._cd
        eq, (nx, ny) = self.eq, self.mesh.shape
        N = self.k + 1
        cd = {}
        cd["Bf"] = np.ascontiguousarray(np.stack([self.Bf[f] for f in self.FACES]))
        cd["Bfw"] = np.ascontiguousarray(np.stack([self.Bfw[f] for f in self.FACES]))
        cd["inv_dx"] = np.ascontiguousarray(self.inv_dx[:, 0, 0])
        cd["inv_dy"] = np.ascontiguousarray(self.inv_dy[0, :, 0])
        dummy3 = np.zeros((1, 1, 1))
        if self.cfg.scheme == "wb-hllc":
            if not hasattr(self, "_bnd"):
                self._bnd = self._boundary_pressure_terms()
            c = np.ascontiguousarray
            cd["src"] = (c(eq.rho_q), c(eq.dp_q[..., 0]), c(eq.dp_q[..., 1]), c(eq.rho_bar),
                         c(self._bnd[0]), c(self._bnd[1]), dummy3, dummy3)
            zeta = (eq.v_zeta_minus, eq.v_zeta_plus, eq.h_zeta_minus, eq.h_zeta_plus)
            cd["grad_norm"] = c(np.sqrt(np.sum(eq.dp_q ** 2, axis=-1)))
        else:
            cd["src"] = (dummy3, dummy3, dummy3, np.zeros((1, 1)), dummy3, dummy3,
                         np.ascontiguousarray(self.grad_phi_q[..., 0]),
                         np.ascontiguousarray(self.grad_phi_q[..., 1]))
            v = np.ones((nx + 1, ny, N))
            h = np.ones((nx, ny + 1, N))
            zeta = (v, v, h, h)
        cd["zeta"] = tuple(np.ascontiguousarray(z, dtype=float) for z in zeta)
        self._cd = cd
        return cd

    def _compiled_traces(self, coef, t):
        """Face traces (nx, ny, 4, N, 4) and the four boundary ghost arrays.

        The last result is kept so the step-size estimate and the first stage
        of the following step share one evaluation.
        """
        cache = getattr(self, "_trace_cache", None)
        if cache is not None and cache[0] is coef and cache[1] == t:
            return cache[2], cache[3]
        TF, ghosts = self._compiled_traces_uncached(coef, t)
        self._trace_cache = (coef, t, TF, ghosts)
        return TF, ghosts

    def _compiled_traces_uncached(self, coef, t):
        cd = self._compiled_data()
        nx, ny = self.mesh.shape
        N = self.k + 1
        TF = np.empty((nx, ny, 4, N, 4))
        bad = kernels.face_traces_2d(coef, cd["Bf"], TF)
        if bad >= 0:
            self._fault(bad, "edge")
        per_x, per_y = self.closure.periodic
        sides = self.closure.sides
        if per_x:
            gl, gr = TF[-1, :, 1], TF[0, :, 0]
        else:
            gl = sides[0].ghost(TF[0, :, 0], 0, t, self._bcoords["left"], self._eq_face_state("left", 0))
            gr = sides[1].ghost(TF[-1, :, 1], 0, t, self._bcoords["right"], self._eq_face_state("right", -1))
        if per_y:
            gb, gt = TF[:, -1, 3], TF[:, 0, 2]
        else:
            gb = sides[2].ghost(TF[:, 0, 2], 1, t, self._bcoords["bottom"], self._eq_face_state("bottom", 0))
            gt = sides[3].ghost(TF[:, -1, 3], 1, t, self._bcoords["top"], self._eq_face_state("top", -1))
        ghosts = tuple(np.ascontiguousarray(g, dtype=float) for g in (gl, gr, gb, gt))
        for g in ghosts:
            _check(g, "boundary ghost", 1)
        return TF, ghosts

    def _rhs_compiled(self, coef, t=0.0):
        cd = self._compiled_data()
        coef = np.ascontiguousarray(coef)
        TF, ghosts = self._compiled_traces(coef, t)
        out = np.empty_like(coef)
        bad = kernels.volume_terms_2d(coef, self.B, self.Gxw, self.Gyw, self.Bw, cd["inv_dx"], cd["inv_dy"],
                                      self.eos.gamma - 1.0, self.cfg.scheme == "wb-hllc", *cd["src"], out)
        if bad >= 0:
            self._fault(bad, "Gauss-point")
        kernels.edge_terms_2d(TF, *ghosts, *cd["zeta"], cd["Bfw"], cd["inv_dx"], cd["inv_dy"],
                              self.eos.gamma, out)
        return out

    def rhs_reference(self, coef, t=0.0):
        vq = self.point_values(coef)
        _check(vq, "Gauss-point", 2)
        tf = self.face_values(coef)
        for f in self.FACES:
            _check(tf[f], "edge", 2)
        vm, vp, hm, hp = self.edge_states(coef, t, tf)
        pq = self.eos.pressure(vq[..., 0], _internal(vq))
        out = self.element_flux_integral(coef, vq, pq)
        out += self.edge_flux_term(*self.numerical_fluxes(vm, vp, hm, hp))
        if self.cfg.scheme == "nonwb-hllc":
            out += self.nonwb_source(coef, vq)
        else:
            out += self.wb_source(coef, vq)
        return out

    # ------------------------------------------------------------------- CFL
    def source_speeds(self, coef, vq=None):
        eq = self.eq
        if vq is None:
            vq = self.point_values(coef)
        e_q = _internal(vq) / vq[..., 0]
        grad_norm = np.sqrt(np.sum(eq.dp_q ** 2, axis=-1))
        local = np.max(grad_norm / (eq.rho_q * np.sqrt(2.0 * e_q)), axis=-1)
        if not hasattr(self, "_bnd"):
            self._bnd = self._boundary_pressure_terms()
        # a/|K|: edge sums of the star pressure minus the volume integral of grad p_e
        ax = self._bnd[0][..., 0] - eq.dp_q[..., 0] @ self.wq
        ay = self._bnd[1][..., 0] - eq.dp_q[..., 1] @ self.wq
        avg = coef[..., 0, :]
        e_bar = _internal(avg) / avg[..., 0]
        mean = np.hypot(ax, ay) / (eq.rho_bar * np.sqrt(2.0 * e_bar))
        return local, mean

    def alpha_parts(self, coef, t=0.0):
        """(alpha_F, star/interior ratio per face, local source speed, mean source speed)."""
        if self.compiled:
            return self._alpha_parts_compiled(coef, t)
        return self.alpha_parts_reference(coef, t)

    def _alpha_parts_compiled(self, coef, t=0.0):
        eq = self.eq
        cd = self._compiled_data()
        nx, ny = self.mesh.shape
        coef = np.ascontiguousarray(coef)
        TF, ghosts = self._compiled_traces(coef, t)
        av = np.empty((nx + 1, ny))
        ah = np.empty((nx, ny + 1))
        kernels.edge_max_speeds_2d(TF, *ghosts, self.eos.gamma, av, ah)
        alpha_f = np.maximum.reduce([av[:-1], av[1:], ah[:, :-1], ah[:, 1:]])
        if self.cfg.scheme == "nonwb-hllc":
            return alpha_f, eq.face_zeta, None, None
        local = kernels.local_source_speed_2d(coef, self.B, cd["src"][0], cd["grad_norm"])
        return alpha_f, eq.face_zeta, local, self._mean_source_speed(coef)

    def _mean_source_speed(self, coef):
        eq = self.eq
        if not hasattr(self, "_bnd"):
            self._bnd = self._boundary_pressure_terms()
        ax = self._bnd[0][..., 0] - eq.dp_q[..., 0] @ self.wq
        ay = self._bnd[1][..., 0] - eq.dp_q[..., 1] @ self.wq
        avg = coef[..., 0, :]
        e_bar = _internal(avg) / avg[..., 0]
        return np.hypot(ax, ay) / (eq.rho_bar * np.sqrt(2.0 * e_bar))

    def alpha_parts_reference(self, coef, t=0.0):
        eos, eq = self.eos, self.eq
        vm, vp, hm, hp = self.edge_states(coef, t)
        av = np.maximum(_speed(vm, eos.pressure(vm[..., 0], _internal(vm)), eos, 0),
                        _speed(vp, eos.pressure(vp[..., 0], _internal(vp)), eos, 0)).max(axis=-1)
        ah = np.maximum(_speed(hm, eos.pressure(hm[..., 0], _internal(hm)), eos, 1),
                        _speed(hp, eos.pressure(hp[..., 0], _internal(hp)), eos, 1)).max(axis=-1)
        alpha_f = np.maximum.reduce([av[:-1], av[1:], ah[:, :-1], ah[:, 1:]])
        local, mean = self.source_speeds(coef)
        return alpha_f, eq.face_zeta, local, mean

    def dt_coefficients(self, coef, t=0.0):
        """A_K such that dt * A_K <= w_end is the positivity condition."""
        alpha_f, zeta, local, mean = self.alpha_parts(coef, t)
        inv_dx, inv_dy = self.inv_dx[..., 0], self.inv_dy[..., 0]
        if self.cfg.scheme == "nonwb-hllc":
            return 2.0 * alpha_f * (inv_dx + inv_dy)
        if self.k == 0:
            zsum = (zeta["left"][..., 0] + zeta["right"][..., 0]) * inv_dx \
                + (zeta["bottom"][..., 0] + zeta["top"][..., 0]) * inv_dy
            return self.w_end * (2.0 * alpha_f * zsum + mean)
        ratio = np.maximum.reduce([zeta[f].max(axis=-1) for f in self.FACES])
        return 2.0 * alpha_f * ratio * (inv_dx + inv_dy) + self.w_end * (local + mean)

    def max_stable_dt(self, coef, cfl, t=0.0):
        return cfl / np.max(self.dt_coefficients(coef, t))


def make_operator(mesh, config, closure):
    return Operator1D(mesh, config, closure) if mesh.dim == 1 else Operator2D(mesh, config, closure)


# Functional entry points -------------------------------------------------

def spatial_operator(operator, coef, t=0.0):
    return operator.rhs(coef, t)


def element_flux_integral(operator, coef):
    return operator.element_flux_integral(coef)


def wb_source_1d(operator, coef):
    return operator.wb_source(coef)


def wb_source_2d(operator, coef):
    return operator.wb_source(coef)


def nonwb_source(operator, coef):
    return operator.nonwb_source(coef)


def cfl_alpha_hat_1d(operator, coef, t=0.0):
    if operator.k != 0:
        raise DomainError("alpha_hat is the first-order coefficient; use cfl_alpha_tilde for k >= 1")
    return operator.alpha(coef, t)


def cfl_alpha_tilde(operator, coef, t=0.0):
    if operator.mesh.dim == 1:
        return operator.alpha(coef, t)
    return operator.alpha_parts(coef, t)


def max_stable_dt(operator, coef, cfl, t=0.0):
    return operator.max_stable_dt(coef, cfl, t)
