"""HLLC fluxes, their well-balanced scaling, and the modified Lax-Friedrichs flux."""
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ContractError, DomainError
from .state import dimension, flux_with_pressure, is_admissible, pressure


@njit(cache=True, error_model="numpy")
def _hllc_kernel(UL, UR, pL, pR, cL, cR, nidx, out):
    n, nc = UL.shape
    last = nc - 1
    for i in range(n):
        rl = UL[i, 0]
        rr = UR[i, 0]
        ul = UL[i, nidx] / rl
        ur = UR[i, nidx] / rr
        El = UL[i, last]
        Er = UR[i, last]
        pl = pL[i]
        pr = pR[i]
        sl = min(ul - cL[i], ur - cR[i])
        sr = max(ul + cL[i], ur + cR[i])
        if sl >= 0.0:
            out[i, 0] = rl * ul
            for j in range(1, last):
                out[i, j] = UL[i, j] * ul
            out[i, nidx] += pl
            out[i, last] = (El + pl) * ul
            continue
        if sr <= 0.0:
            out[i, 0] = rr * ur
            for j in range(1, last):
                out[i, j] = UR[i, j] * ur
            out[i, nidx] += pr
            out[i, last] = (Er + pr) * ur
            continue
        den = rl * (sl - ul) - rr * (sr - ur)
        if den == 0.0:
            out[i, 0] = rl * ul
            for j in range(1, last):
                out[i, j] = UL[i, j] * ul
            out[i, nidx] += pl
            out[i, last] = (El + pl) * ul
            continue
        ss = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / den
        if ss >= 0.0:
            r, u, E, p, s = rl, ul, El, pl, sl
            src = UL
        else:
            r, u, E, p, s = rr, ur, Er, pr, sr
            src = UR
        # ratio first: it is exactly 1 across a resting contact
        ratio = (s - u) / (s - ss)
        fac = r * ratio
        # F* = F + S (U* - U)
        out[i, 0] = r * u + s * (fac - r)
        for j in range(1, last):
            if j == nidx:
                out[i, j] = src[i, j] * u + p + s * (fac * ss - src[i, j])
            else:
                out[i, j] = src[i, j] * u + s * (ratio * src[i, j] - src[i, j])
        Estar = ratio * E + fac * (ss - u) * (ss + p / (r * (s - u)))
        out[i, last] = (E + p) * u + s * (Estar - E)


def hllc_raw(UL, UR, pL, pR, cL, cR, axis=0):
    """HLLC along a coordinate axis, no admissibility checks.

    ``cL``/``cR`` are signal speeds (sound speed for ideal gases).
    """
    shape = UL.shape
    nc = shape[-1]
    a = np.ascontiguousarray(UL.reshape(-1, nc))
    b = np.ascontiguousarray(UR.reshape(-1, nc))
    out = np.empty_like(a)
    _hllc_kernel(a, b, np.ascontiguousarray(pL.reshape(-1)), np.ascontiguousarray(pR.reshape(-1)),
                 np.ascontiguousarray(cL.reshape(-1)), np.ascontiguousarray(cR.reshape(-1)),
                 1 + axis, out)
    return out.reshape(shape)


def hllc_axis(UL, UR, eos, axis=0):
    """HLLC along a coordinate axis computing pressures and speeds from the closure."""
    pL = pressure(UL, eos)
    pR = pressure(UR, eos)
    return hllc_raw(UL, UR, pL, pR, eos.signal_speed(UL[..., 0], pL),
                    eos.signal_speed(UR[..., 0], pR), axis)


def _checked(*states):
    for U in states:
        if not is_admissible(U):
            raise DomainError("HLLC needs admissible states")


def hllc_flux_1d(UL, UR, eos):
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    _checked(UL, UR)
    UL, UR = np.broadcast_arrays(UL, UR)
    return hllc_axis(UL, UR, eos, 0)


def _rotate(U, n):
    """Express momentum in the (n, t) frame with t = (-n_y, n_x)."""
    out = U.copy()
    mx, my = U[..., 1], U[..., 2]
    out[..., 1] = mx * n[..., 0] + my * n[..., 1]
    out[..., 2] = -mx * n[..., 1] + my * n[..., 0]
    return out


def _unrotate(F, n):
    out = F.copy()
    fn, ft = F[..., 1], F[..., 2]
    out[..., 1] = fn * n[..., 0] - ft * n[..., 1]
    out[..., 2] = fn * n[..., 1] + ft * n[..., 0]
    return out


def hllc_flux_2d(UL, UR, n, eos):
    """HLLC in direction n: rotate, solve along the normal, rotate back."""
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    _checked(UL, UR)
    n = np.asarray(n, dtype=float)
    if n.shape[-1] != 2 or dimension(UL) != 2:
        raise DomainError("2D HLLC needs 2D states and a 2-vector normal")
    if not np.allclose(np.sum(n * n, axis=-1), 1.0, rtol=0, atol=1e-12):
        raise DomainError("normal must be a unit vector")
    shape = np.broadcast_shapes(UL.shape, UR.shape, n.shape[:-1] + (4,))
    UL, UR = np.broadcast_to(UL, shape), np.broadcast_to(UR, shape)
    n = np.broadcast_to(n, shape[:-1] + (2,))
    return _unrotate(hllc_axis(_rotate(UL, n), _rotate(UR, n), eos, 0), n)


@dataclass(frozen=True)
class WaveSpeeds:
    s_left: np.ndarray
    s_right: np.ndarray
    s_star: np.ndarray


@dataclass(frozen=True)
class HllcIntermediate:
    u_star_left: np.ndarray
    u_star_right: np.ndarray


def wave_speeds(UL, UR, eos):
    """Outer and middle HLLC speeds for 1D states; ordering is verified."""
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    _checked(UL, UR)
    pl, pr = pressure(UL, eos), pressure(UR, eos)
    rl, rr = UL[..., 0], UR[..., 0]
    ul, ur = UL[..., 1] / rl, UR[..., 1] / rr
    cl, cr = eos.signal_speed(rl, pl), eos.signal_speed(rr, pr)
    sl = np.minimum(ul - cl, ur - cr)
    sr = np.maximum(ul + cl, ur + cr)
    ss = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / (rl * (sl - ul) - rr * (sr - ur))
    if np.any(ss < sl) or np.any(ss > sr):
        raise DomainError("middle wave speed outside the outer speeds")
    return WaveSpeeds(sl, sr, ss)


def hllc_intermediates(UL, UR, eos):
    """Star states on both sides of the contact (1D)."""
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    w = wave_speeds(UL, UR, eos)
    out = []
    for U, s in ((UL, w.s_left), (UR, w.s_right)):
        r = U[..., 0]
        u = U[..., 1] / r
        p = pressure(U, eos)
        fac = r * (s - u) / (s - w.s_star)
        E = fac * (U[..., 2] / r + (w.s_star - u) * (w.s_star + p / (r * (s - u))))
        out.append(np.stack([fac, fac * w.s_star, E], axis=-1))
    return HllcIntermediate(*out)


def wb_scale(eos, pe, p_star, rho_e=None, E_e=None):
    """Factor multiplying an interface trace in the well-balanced flux.

    Ideal gas: p_star / pe.  General closure: e(rho_e, p_star) / (E_e / rho_e).
    """
    pe = np.asarray(pe, dtype=float)
    if np.any(pe <= 0):
        raise DomainError("equilibrium pressure traces must be positive")
    if eos.kind == "ideal":
        return p_star / pe
    if rho_e is None or E_e is None:
        raise DomainError("general closures need equilibrium density and energy traces")
    return eos.internal_energy(rho_e, p_star) / (E_e / rho_e)


def wb_hllc_1d(trace_minus, trace_plus, pe_minus, pe_plus, eos, pe_star=None,
               rho_e_minus=None, rho_e_plus=None, E_e_minus=None, E_e_plus=None):
    """HLLC of the traces rescaled toward the common star equilibrium state."""
    if pe_star is None:
        pe_star = 0.5 * (np.asarray(pe_minus, float) + pe_plus)
    zl = wb_scale(eos, pe_minus, pe_star, rho_e_minus, E_e_minus)
    zr = wb_scale(eos, pe_plus, pe_star, rho_e_plus, E_e_plus)
    UL = np.asarray(trace_minus, float) * np.asarray(zl)[..., None]
    UR = np.asarray(trace_plus, float) * np.asarray(zr)[..., None]
    return hllc_flux_1d(UL, UR, eos)


def wb_hllc_2d(trace_int, trace_ext, pe_int, pe_ext, n, eos,
               rho_e_int=None, rho_e_ext=None, E_e_int=None, E_e_ext=None):
    pe_star = 0.5 * (np.asarray(pe_int, float) + pe_ext)
    zi = wb_scale(eos, pe_int, pe_star, rho_e_int, E_e_int)
    ze = wb_scale(eos, pe_ext, pe_star, rho_e_ext, E_e_ext)
    UI = np.asarray(trace_int, float) * np.asarray(zi)[..., None]
    UE = np.asarray(trace_ext, float) * np.asarray(ze)[..., None]
    return hllc_flux_2d(UI, UE, n, eos)


def lf_raw(UL, UR, pL, pR, rho_e_l, rho_e_r, rho_e_max, alpha):
    FL = flux_with_pressure(UL, pL, np.ones(1))
    FR = flux_with_pressure(UR, pR, np.ones(1))
    jump = UR / rho_e_r[..., None] - UL / rho_e_l[..., None]
    return 0.5 * (FL + FR - (alpha * rho_e_max)[..., None] * jump)


def modified_lf_flux_1d(trace_minus, trace_plus, rho_e_minus, rho_e_plus, rho_e_max, alpha_lf, eos):
    """1/2 [F(U-) + F(U+) - alpha rho_max (U+/rho_e+ - U-/rho_e-)]."""
    UL = np.asarray(trace_minus, float)
    UR = np.asarray(trace_plus, float)
    _checked(UL, UR)
    rl, rr = np.asarray(rho_e_minus, float), np.asarray(rho_e_plus, float)
    rmax = np.asarray(rho_e_max, float)
    alpha = np.asarray(alpha_lf, float)
    pL, pR = pressure(UL, eos), pressure(UR, eos)
    bound = np.maximum(np.abs(UL[..., 1] / UL[..., 0]) + eos.signal_speed(UL[..., 0], pL),
                       np.abs(UR[..., 1] / UR[..., 0]) + eos.signal_speed(UR[..., 0], pR))
    if np.any(alpha < bound * (1 - 1e-14)):
        raise ContractError("Lax-Friedrichs viscosity below max wave speed of the traces")
    if np.any(rmax < np.maximum(rl, rr) * (1 - 1e-14)):
        raise ContractError("rho_e_max must bound both equilibrium density traces")
    return lf_raw(UL, UR, pL, pR, rl, rr, rmax, alpha)
