"""Positivity-preserving scaling limiter and a TVB trouble-cell limiter."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PositivityFault
from .kernels import SAFETY
from .mesh import pp_point_set_1d, pp_point_set_2d


@dataclass(frozen=True)
class LimiterParams:
    eps1_cap: float = 1e-13
    eps2_cap: float = 1e-13
    tvb_m: float = 0.0

    def __post_init__(self):
        if not (self.eps1_cap > 0 and self.eps2_cap > 0):
            raise DomainError("positivity floors must be positive")
        if self.tvb_m < 0:
            raise DomainError("TVB constant must be nonnegative")


def point_set_for(mesh, degree):
    if mesh.dim == 1:
        return pp_point_set_1d(degree)
    return pp_point_set_2d(degree, float(mesh.dx[0]), float(mesh.dy[0]))


def _internal(vals):
    return vals[..., -1] - 0.5 * np.sum(vals[..., 1:-1] ** 2, axis=-1) / vals[..., 0]


def _first_bad(mask):
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if idx.size else None


def check_averages(coef):
    """Raise PositivityFault if any cell average is inadmissible or not finite."""
    avg = coef[..., 0, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        bad = ~(avg[..., 0] > 0) | ~(_internal(avg) > 0) | ~np.all(np.isfinite(avg), axis=-1)
    if np.any(bad):
        cell = _first_bad(bad)
        raise PositivityFault(f"inadmissible cell average in cell {cell}", cell)


def scaling_limit(coef, point_values_matrix, params=LimiterParams(), thetas=False):
    """Scale modal content toward the cell average until the point set is admissible.

    ``point_values_matrix`` maps modal coefficients to point values
    (shape (npts, nmodes)).  Returns a new coefficient array.
    """
    check_averages(coef)
    coef = coef.copy()
    avg = coef[..., 0, :]
    vals = point_values_matrix @ coef

    rho_bar = avg[..., 0]
    rho_min = vals[..., 0].min(axis=-1)
    eps1 = np.minimum(params.eps1_cap, rho_bar)
    denom = rho_bar - rho_min
    with np.errstate(divide="ignore", invalid="ignore"):
        theta1 = np.where(rho_min < eps1, (rho_bar - eps1) / denom * SAFETY, 1.0)
    theta1 = np.clip(theta1, 0.0, 1.0)
    coef[..., 1:, 0] *= theta1[..., None]
    vals[..., 0] = rho_bar[..., None] + theta1[..., None] * (vals[..., 0] - rho_bar[..., None])

    g_bar = _internal(avg)
    g_min = _internal(vals).min(axis=-1)
    eps2 = np.minimum(params.eps2_cap, g_bar)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta2 = np.where(g_min < eps2, (g_bar - eps2) / (g_bar - g_min) * SAFETY, 1.0)
    theta2 = np.clip(theta2, 0.0, 1.0)
    coef[..., 1:, :] *= theta2[..., None, None]
    if thetas:
        return coef, theta1, theta2
    return coef


def pp_limit(field, point_set=None, params=LimiterParams()):
    """Positivity-preserving limiter applied to a DgField."""
    ps = point_set or point_set_for(field.mesh, field.degree)
    B = field.basis.values(ps.points)
    return field.with_coef(scaling_limit(field.coef, B, params))


# --------------------------------------------------------------------------
# Trouble-cell detection and characteristic TVB limiting

def tvb_minmod(a, b, c, threshold):
    """TVB-modified minmod: keep ``a`` where |a| <= threshold."""
    s = np.sign(a)
    same = (s == np.sign(b)) & (s == np.sign(c))
    mm = np.where(same, s * np.minimum(np.abs(a), np.minimum(np.abs(b), np.abs(c))), 0.0)
    return np.where(np.abs(a) <= threshold, a, mm)


def _noise_floor(avg, rel=1e-10):
    """Per-component tolerance below which limiter decisions ignore changes."""
    scale = np.empty_like(avg)
    scale[..., 0] = np.abs(avg[..., 0])
    scale[..., -1] = np.abs(avg[..., -1])
    scale[..., 1:-1] = np.sqrt(np.abs(avg[..., :1] * avg[..., -1:]))
    return rel * scale + 1e-300


def eigenvectors(avg, eos, axis=0):
    """Right eigenvectors of the flux Jacobian along ``axis`` at states ``avg``.

    Ideal gases only; other closures fall back to the identity, i.e.
    componentwise limiting.
    """
    n = avg.shape[-1]
    if eos is None or eos.kind != "ideal":
        return np.broadcast_to(np.eye(n), avg.shape[:-1] + (n, n)).copy()
    rho = avg[..., 0]
    vel = avg[..., 1:-1] / rho[..., None]
    q2 = np.sum(vel * vel, axis=-1)
    p = (eos.gamma - 1.0) * (avg[..., -1] - 0.5 * rho * q2)
    c = np.sqrt(eos.gamma * p / rho)
    H = (avg[..., -1] + p) / rho
    un = vel[..., axis]
    R = np.zeros(avg.shape[:-1] + (n, n))
    # columns: u-c, entropy, [shear], u+c
    R[..., 0, 0] = 1.0
    R[..., 0, 1] = 1.0
    R[..., 0, -1] = 1.0
    for d in range(n - 2):
        R[..., 1 + d, 0] = vel[..., d]
        R[..., 1 + d, 1] = vel[..., d]
        R[..., 1 + d, -1] = vel[..., d]
    R[..., 1 + axis, 0] -= c
    R[..., 1 + axis, -1] += c
    R[..., -1, 0] = H - un * c
    R[..., -1, 1] = 0.5 * q2
    R[..., -1, -1] = H + un * c
    if n == 4:
        t = 1 - axis
        R[..., 1 + t, 2] = 1.0
        R[..., -1, 2] = vel[..., t]
    return R


def _flag(ut, utt, dp, dm, threshold, floor):
    a = np.abs(tvb_minmod(ut, dp, dm, threshold) - ut) > floor
    b = np.abs(tvb_minmod(utt, dp, dm, threshold) - utt) > floor
    return np.any(a | b, axis=-1)


def detect_trouble_cells(field, params=LimiterParams(), periodic=False):
    """Cells whose interface deviations are changed by the TVB minmod."""
    return detect_trouble_coef(field.coef, field.basis, field.mesh, params, periodic)


def detect_trouble_coef(coef, basis, mesh, params, periodic):
    per = (periodic,) * mesh.dim if np.ndim(periodic) == 0 else tuple(periodic)
    if basis.degree == 0:
        return np.zeros(mesh.shape, dtype=bool)
    avg = coef[..., 0, :]
    floor = _noise_floor(avg)
    if mesh.dim == 1:
        T = basis.values(np.array([1.0, -1.0])) @ coef
        dp, dm, interior = _differences(avg, 0, per[0])
        thr = (params.tvb_m * mesh.sizes ** 2)[:, None]
        return _flag(T[:, 0] - avg, avg - T[:, 1], dp, dm, thr, floor) & interior
    mids = basis.values(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])) @ coef
    dpx, dmx, inx = _differences(avg, 0, per[0])
    dpy, dmy, iny = _differences(avg, 1, per[1])
    thx = (params.tvb_m * mesh.dx ** 2)[:, None, None]
    thy = (params.tvb_m * mesh.dy ** 2)[None, :, None]
    fx = _flag(mids[..., 0, :] - avg, avg - mids[..., 1, :], dpx, dmx, thx, floor) & inx
    fy = _flag(mids[..., 2, :] - avg, avg - mids[..., 3, :], dpy, dmy, thy, floor) & iny
    return fx | fy


def _differences(avg, axis, periodic):
    """Forward/backward differences of cell averages and a mask of cells with both neighbours.

    On a non-periodic boundary the missing difference repeats the available one.
    """
    nxt = np.roll(avg, -1, axis=axis)
    prv = np.roll(avg, 1, axis=axis)
    dp, dm = nxt - avg, avg - prv
    interior = np.ones(avg.shape[:-1], dtype=bool)
    if not periodic:
        idx = [slice(None)] * avg.ndim
        first, last = list(idx), list(idx)
        first[axis], last[axis] = 0, -1
        first, last = tuple(first), tuple(last)
        dm[first] = dp[first]
        dp[last] = dm[last]
        interior[first[:-1]] = False
        interior[last[:-1]] = False
    if avg.shape[axis] == 1:
        interior[...] = False
    return dp, dm, interior


def characteristic_slope_limit(field, mask, eos, params=LimiterParams(), periodic=False):
    return field.with_coef(characteristic_limit_coef(field.coef, field.basis, field.mesh, mask, eos,
                                                     params, periodic))


def characteristic_limit_coef(coef, basis, mesh, mask, eos, params=LimiterParams(), periodic=False):
    """Replace flagged cells by a minmod-limited linear polynomial in characteristic variables."""
    if not np.any(mask) or basis.degree == 0:
        return coef
    per = (periodic,) * mesh.dim if np.ndim(periodic) == 0 else tuple(periodic)
    coef = coef.copy()
    avg_all = coef[..., 0, :]
    root3 = np.sqrt(3.0)
    cells = np.nonzero(mask)
    avg = avg_all[cells]
    bad = ~(avg[..., 0] > 0)
    if np.any(bad):
        raise DomainError("cannot build characteristic variables at an inadmissible average")
    new = np.zeros(coef[cells].shape)
    new[:, 0] = avg
    if mesh.dim == 1:
        dp, dm, _ = _differences(avg_all, 0, per[0])
        slope_ids = [(1, 0, dp[cells], dm[cells], params.tvb_m * mesh.sizes[cells[0]] ** 2)]
    else:
        dpx, dmx, _ = _differences(avg_all, 0, per[0])
        dpy, dmy, _ = _differences(avg_all, 1, per[1])
        slope_ids = [
            (basis.index[(1, 0)], 0, dpx[cells], dmx[cells], params.tvb_m * mesh.dx[cells[0]] ** 2),
            (basis.index[(0, 1)], 1, dpy[cells], dmy[cells], params.tvb_m * mesh.dy[cells[1]] ** 2),
        ]
    for mode, axis, dp_c, dm_c, thr in slope_ids:
        R = eigenvectors(avg, eos, axis)
        Linv = np.linalg.inv(R)
        w_slope = np.einsum("nij,nj->ni", Linv, root3 * coef[cells][:, mode])
        w_dp = np.einsum("nij,nj->ni", Linv, dp_c)
        w_dm = np.einsum("nij,nj->ni", Linv, dm_c)
        lim = tvb_minmod(w_slope, w_dp, w_dm, np.asarray(thr)[:, None])
        new[:, mode] = np.einsum("nij,nj->ni", R, lim) / root3
    coef[cells] = new
    return coef


def trouble_cell_limit(coef, basis, mesh, eos, params=LimiterParams(), periodic=False):
    """Detect trouble cells and limit them; compiled in 2D, numpy in 1D."""
    if basis.degree == 0:
        return coef
    per = (periodic,) * mesh.dim if np.ndim(periodic) == 0 else tuple(periodic)
    if mesh.dim == 1:
        mask = detect_trouble_coef(coef, basis, mesh, params, per)
        return characteristic_limit_coef(coef, basis, mesh, mask, eos, params, per)
    from . import kernels
    coef = np.ascontiguousarray(coef)
    if np.any(~(coef[..., 0, 0] > 0)):
        raise DomainError("cannot build characteristic variables at an inadmissible average")
    mids = basis.values(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]))
    out = coef.copy()
    gamma = eos.gamma if eos is not None and eos.kind == "ideal" else 0.0
    kernels.tvb_limit_2d(coef, np.ascontiguousarray(mids), params.tvb_m * mesh.dx ** 2,
                         params.tvb_m * mesh.dy ** 2, bool(per[0]), bool(per[1]), gamma,
                         basis.index[(1, 0)], basis.index[(0, 1)], 1e-10, out)
    return out
