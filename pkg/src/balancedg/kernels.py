"""Compiled loops for the ideal-gas 2D operator and the scaling limiter.

Every kernel mirrors a numpy routine elsewhere in the package; the numpy
versions stay the reference and the tests compare the two.
Arrays are flattened over cells: coefficients are (ncell, nmodes, ncomp).
"""
import numpy as np
from numba import njit

# Active positivity scalings are shrunk by this factor so that the floor
# survives round-off when the average is many orders above it.
SAFETY = 1.0 - 1e-14


@njit(cache=True, error_model="numpy")
def scaling_thetas(V, flat, eps1_cap, eps2_cap, thetas):
    """Density and internal-energy scaling factors per cell.

    ``V`` holds point values (npts, ncell, ncomp), ``flat`` the modal
    coefficients (ncell, nmodes, ncomp).
    Writes theta1, theta2 into ``thetas`` (2, ncell) and returns the minimum
    density and internal energy over the limited point values.
    """
    npts, nc, ncomp = V.shape
    avg = flat[:, 0, :]
    last = ncomp - 1
    rho_low = np.inf
    g_low = np.inf
    for c in range(nc):
        rbar = avg[c, 0]
        rmin = np.inf
        for q in range(npts):
            rmin = min(rmin, V[q, c, 0])
        eps1 = min(eps1_cap, rbar)
        t1 = 1.0
        if rmin < eps1:
            t1 = min(max((rbar - eps1) / (rbar - rmin) * SAFETY, 0.0), 1.0)
        kin = 0.0
        for j in range(1, last):
            kin += avg[c, j] * avg[c, j]
        gbar = avg[c, last] - 0.5 * kin / rbar
        gmin = np.inf
        for q in range(npts):
            r = rbar + t1 * (V[q, c, 0] - rbar)
            kq = 0.0
            for j in range(1, last):
                kq += V[q, c, j] * V[q, c, j]
            gmin = min(gmin, V[q, c, last] - 0.5 * kq / r)
        eps2 = min(eps2_cap, gbar)
        t2 = 1.0
        if gmin < eps2:
            t2 = min(max((gbar - eps2) / (gbar - gmin) * SAFETY, 0.0), 1.0)
        thetas[0, c] = t1
        thetas[1, c] = t2
        # limited values are the average plus t2 times the (t1-scaled) deviation
        for q in range(npts):
            r = rbar + t2 * t1 * (V[q, c, 0] - rbar)
            kq = 0.0
            for j in range(1, last):
                m = avg[c, j] + t2 * (V[q, c, j] - avg[c, j])
                kq += m * m
            E = avg[c, last] + t2 * (V[q, c, last] - avg[c, last])
            rho_low = min(rho_low, r)
            g_low = min(g_low, E - 0.5 * kq / r)
    return rho_low, g_low


@njit(cache=True, error_model="numpy")
def apply_thetas(flat, thetas, out):
    """Scale the non-constant modes: density by theta1*theta2, the rest by theta2."""
    nc, nm, ncomp = flat.shape
    for c in range(nc):
        t1 = thetas[0, c]
        t2 = thetas[1, c]
        for k in range(ncomp):
            out[c, 0, k] = flat[c, 0, k]
        for a in range(1, nm):
            out[c, a, 0] = flat[c, a, 0] * t1 * t2
            for k in range(1, ncomp):
                out[c, a, k] = flat[c, a, k] * t2


@njit(cache=True, error_model="numpy")
def point_extremes(V, gm1):
    """(min density, min internal energy or ideal pressure) over point-major values."""
    npts, nc, ncomp = V.shape
    last = ncomp - 1
    rmin = np.inf
    gmin = np.inf
    for q in range(npts):
        for c in range(nc):
            r = V[q, c, 0]
            kin = 0.0
            for j in range(1, last):
                kin += V[q, c, j] * V[q, c, j]
            rmin = min(rmin, r)
            gmin = min(gmin, V[q, c, last] - 0.5 * kin / r)
    return rmin, gm1 * gmin if gm1 > 0 else gmin


# ---------------------------------------------------------------------------
# fused 2D stage

@njit(cache=True, error_model="numpy", inline="always", fastmath={"contract"})
def _hllc_normal(rl, ml, tl, El, rr, mr, tr, Er, gamma, f):
    """HLLC flux in the edge frame: (rho, normal mom, tangential mom, E) -> f[0:4]."""
    gm1 = gamma - 1.0
    ul = ml / rl
    ur = mr / rr
    pl = gm1 * (El - 0.5 * (ml * ml + tl * tl) / rl)
    pr = gm1 * (Er - 0.5 * (mr * mr + tr * tr) / rr)
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    sl = min(ul - cl, ur - cr)
    sr = max(ul + cl, ur + cr)
    den = rl * (sl - ul) - rr * (sr - ur)
    if sl >= 0.0 or (sr > 0.0 and den == 0.0):
        f[0] = ml
        f[1] = ml * ul + pl
        f[2] = tl * ul
        f[3] = (El + pl) * ul
        return
    if sr <= 0.0:
        f[0] = mr
        f[1] = mr * ur + pr
        f[2] = tr * ur
        f[3] = (Er + pr) * ur
        return
    ss = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / den
    if ss >= 0.0:
        r, m, t, E, p, s, u = rl, ml, tl, El, pl, sl, ul
    else:
        r, m, t, E, p, s, u = rr, mr, tr, Er, pr, sr, ur
    # ratio first: it is exactly 1 across a resting contact
    ratio = (s - u) / (s - ss)
    fac = r * ratio
    f[0] = m + s * (fac - r)
    f[1] = m * u + p + s * (fac * ss - m)
    f[2] = t * u + s * (ratio * t - t)
    Estar = ratio * E + fac * (ss - u) * (ss + p / (r * (s - u)))
    f[3] = (E + p) * u + s * (Estar - E)


@njit(cache=True, error_model="numpy", fastmath={"contract", "arcp"})
def face_traces_2d(coef, Bf, TF):
    """TF[i, j, f, q, :] = traces on face f (left, right, bottom, top); returns first bad flat cell or -1."""
    nx, ny, nm, _ = coef.shape
    nf, N, _ = Bf.shape
    bad = -1
    for i in range(nx):
        for j in range(ny):
            for f in range(nf):
                for q in range(N):
                    r = mx = my = E = 0.0
                    for a in range(nm):
                        b = Bf[f, q, a]
                        r += b * coef[i, j, a, 0]
                        mx += b * coef[i, j, a, 1]
                        my += b * coef[i, j, a, 2]
                        E += b * coef[i, j, a, 3]
                    TF[i, j, f, q, 0] = r
                    TF[i, j, f, q, 1] = mx
                    TF[i, j, f, q, 2] = my
                    TF[i, j, f, q, 3] = E
                    if bad < 0:
                        g = E - 0.5 * (mx * mx + my * my) / r if r > 0.0 else -1.0
                        if not (g > 0.0 and g < np.inf):
                            bad = i * ny + j
    return bad


@njit(cache=True, error_model="numpy", fastmath={"contract"})
def edge_terms_2d(TF, gl, gr, gb, gt, zvm, zvp, zhm, zhp, Bfw, inv_dx, inv_dy, gamma, out):
    """Numerical fluxes on every edge, lifted into ``out`` (nx, ny, nm, 4).

    ``gl``/``gr`` are exterior states on the left/right boundary (ny, N, 4),
    ``gb``/``gt`` on the bottom/top (nx, N, 4).  ``z*`` are the scaling
    factors on vertical (nx+1, ny, N) and horizontal (nx, ny+1, N) edges.
    """
    nx, ny, _, N, _ = TF.shape
    nm = Bfw.shape[2]
    f = np.empty(4)
    for i in range(nx + 1):
        for j in range(ny):
            for q in range(N):
                if i == 0:
                    a0, a1, a2, a3 = gl[j, q, 0], gl[j, q, 1], gl[j, q, 2], gl[j, q, 3]
                else:
                    a0, a1, a2, a3 = TF[i - 1, j, 1, q, 0], TF[i - 1, j, 1, q, 1], TF[i - 1, j, 1, q, 2], TF[i - 1, j, 1, q, 3]
                if i == nx:
                    b0, b1, b2, b3 = gr[j, q, 0], gr[j, q, 1], gr[j, q, 2], gr[j, q, 3]
                else:
                    b0, b1, b2, b3 = TF[i, j, 0, q, 0], TF[i, j, 0, q, 1], TF[i, j, 0, q, 2], TF[i, j, 0, q, 3]
                zm = zvm[i, j, q]
                zp = zvp[i, j, q]
                _hllc_normal(zm * a0, zm * a1, zm * a2, zm * a3, zp * b0, zp * b1, zp * b2, zp * b3, gamma, f)
                # frame (n = +x): components already in (rho, mx, my, E) order
                if i > 0:
                    w = inv_dx[i - 1]
                    for a in range(nm):
                        c = Bfw[1, q, a] * w
                        for k in range(4):
                            out[i - 1, j, a, k] -= c * f[k]
                if i < nx:
                    w = inv_dx[i]
                    for a in range(nm):
                        c = Bfw[0, q, a] * w
                        for k in range(4):
                            out[i, j, a, k] += c * f[k]
    for i in range(nx):
        for j in range(ny + 1):
            for q in range(N):
                if j == 0:
                    a0, a1, a2, a3 = gb[i, q, 0], gb[i, q, 1], gb[i, q, 2], gb[i, q, 3]
                else:
                    a0, a1, a2, a3 = TF[i, j - 1, 3, q, 0], TF[i, j - 1, 3, q, 1], TF[i, j - 1, 3, q, 2], TF[i, j - 1, 3, q, 3]
                if j == ny:
                    b0, b1, b2, b3 = gt[i, q, 0], gt[i, q, 1], gt[i, q, 2], gt[i, q, 3]
                else:
                    b0, b1, b2, b3 = TF[i, j, 2, q, 0], TF[i, j, 2, q, 1], TF[i, j, 2, q, 2], TF[i, j, 2, q, 3]
                zm = zhm[i, j, q]
                zp = zhp[i, j, q]
                # edge frame (n = +y): normal momentum my, tangential mx
                _hllc_normal(zm * a0, zm * a2, zm * a1, zm * a3, zp * b0, zp * b2, zp * b1, zp * b3, gamma, f)
                f1 = f[1]
                f[1] = f[2]
                f[2] = f1
                if j > 0:
                    w = inv_dy[j - 1]
                    for a in range(nm):
                        c = Bfw[3, q, a] * w
                        for k in range(4):
                            out[i, j - 1, a, k] -= c * f[k]
                if j < ny:
                    w = inv_dy[j]
                    for a in range(nm):
                        c = Bfw[2, q, a] * w
                        for k in range(4):
                            out[i, j, a, k] += c * f[k]


@njit(cache=True, error_model="numpy", fastmath={"contract", "arcp"})
def volume_terms_2d(coef, B, Gxw, Gyw, Bw, inv_dx, inv_dy, gm1, balanced,
                    rho_q, dpx, dpy, rho_bar, bx, by, gphx, gphy, out):
    """Element flux integral and gravity source per cell, written into ``out``.

    Returns the first flat cell index with an inadmissible Gauss-point value, or -1.
    """
    nx, ny, nm, _ = coef.shape
    nq = B.shape[0]
    acc = np.zeros((nm, 4))
    for i in range(nx):
        sx = 2.0 * inv_dx[i]
        for j in range(ny):
            sy = 2.0 * inv_dy[j]
            acc[:, :] = 0.0
            rr = mxr = myr = 0.0
            if balanced:
                rr = coef[i, j, 0, 0] / rho_bar[i, j]
                mxr = coef[i, j, 0, 1] / rho_bar[i, j]
                myr = coef[i, j, 0, 2] / rho_bar[i, j]
            for q in range(nq):
                r = mx = my = E = 0.0
                for a in range(nm):
                    b = B[q, a]
                    r += b * coef[i, j, a, 0]
                    mx += b * coef[i, j, a, 1]
                    my += b * coef[i, j, a, 2]
                    E += b * coef[i, j, a, 3]
                if not r > 0.0:
                    return i * ny + j
                u = mx / r
                v = my / r
                g = E - 0.5 * (mx * u + my * v)
                if not (g > 0.0 and g < np.inf):
                    return i * ny + j
                p = gm1 * g
                f0 = mx * sx
                f1 = (mx * u + p) * sx
                f2 = my * u * sx
                f3 = (E + p) * u * sx
                h0 = my * sy
                h1 = mx * v * sy
                h2 = (my * v + p) * sy
                h3 = (E + p) * v * sy
                if balanced:
                    rq = rho_q[i, j, q]
                    w = r / rq - rr
                    s1 = w * dpx[i, j, q]
                    s2 = w * dpy[i, j, q]
                    s3 = (mx / rq - mxr) * dpx[i, j, q] + (my / rq - myr) * dpy[i, j, q]
                else:
                    s1 = -r * gphx[i, j, q]
                    s2 = -r * gphy[i, j, q]
                    s3 = -(mx * gphx[i, j, q] + my * gphy[i, j, q])
                for a in range(nm):
                    gx = Gxw[q, a]
                    gy = Gyw[q, a]
                    b = Bw[q, a]
                    acc[a, 0] += gx * f0 + gy * h0
                    acc[a, 1] += gx * f1 + gy * h1 + b * s1
                    acc[a, 2] += gx * f2 + gy * h2 + b * s2
                    acc[a, 3] += gx * f3 + gy * h3 + b * s3
            for a in range(nm):
                out[i, j, a, 0] = acc[a, 0]
                if balanced:
                    out[i, j, a, 1] = acc[a, 1] + rr * bx[i, j, a]
                    out[i, j, a, 2] = acc[a, 2] + rr * by[i, j, a]
                    out[i, j, a, 3] = acc[a, 3] + mxr * bx[i, j, a] + myr * by[i, j, a]
                else:
                    out[i, j, a, 1] = acc[a, 1]
                    out[i, j, a, 2] = acc[a, 2]
                    out[i, j, a, 3] = acc[a, 3]
    return -1


@njit(cache=True, error_model="numpy")
def edge_max_speeds_2d(TF, gl, gr, gb, gt, gamma, av, ah):
    """Max over points of |u_n| + c on vertical (nx+1, ny) and horizontal (nx, ny+1) edges."""
    nx, ny, _, N, _ = TF.shape
    for i in range(nx + 1):
        for j in range(ny):
            best = 0.0
            for q in range(N):
                for side in range(2):
                    if side == 0:
                        s = gl[j, q] if i == 0 else TF[i - 1, j, 1, q]
                    else:
                        s = gr[j, q] if i == nx else TF[i, j, 0, q]
                    r = s[0]
                    p = (gamma - 1.0) * (s[3] - 0.5 * (s[1] * s[1] + s[2] * s[2]) / r)
                    best = max(best, abs(s[1] / r) + np.sqrt(gamma * p / r))
            av[i, j] = best
    for i in range(nx):
        for j in range(ny + 1):
            best = 0.0
            for q in range(N):
                for side in range(2):
                    if side == 0:
                        s = gb[i, q] if j == 0 else TF[i, j - 1, 3, q]
                    else:
                        s = gt[i, q] if j == ny else TF[i, j, 2, q]
                    r = s[0]
                    p = (gamma - 1.0) * (s[3] - 0.5 * (s[1] * s[1] + s[2] * s[2]) / r)
                    best = max(best, abs(s[2] / r) + np.sqrt(gamma * p / r))
            ah[i, j] = best


@njit(cache=True, error_model="numpy")
def local_source_speed_2d(coef, B, rho_q, grad_norm):
    nx, ny, nm, _ = coef.shape
    nq = B.shape[0]
    out = np.zeros((nx, ny))
    for i in range(nx):
        for j in range(ny):
            best = 0.0
            for q in range(nq):
                r = mx = my = E = 0.0
                for a in range(nm):
                    b = B[q, a]
                    r += b * coef[i, j, a, 0]
                    mx += b * coef[i, j, a, 1]
                    my += b * coef[i, j, a, 2]
                    E += b * coef[i, j, a, 3]
                e = (E - 0.5 * (mx * mx + my * my) / r) / r
                best = max(best, grad_norm[i, j, q] / (rho_q[i, j, q] * np.sqrt(2.0 * e)))
            out[i, j] = best
    return out


# ---------------------------------------------------------------------------
# 2D trouble-cell limiter

@njit(cache=True, error_model="numpy", inline="always")
def _minmod_tvb(a, b, c, thr):
    if abs(a) <= thr:
        return a
    if a > 0.0 and b > 0.0 and c > 0.0:
        return min(a, b, c)
    if a < 0.0 and b < 0.0 and c < 0.0:
        return max(a, b, c)
    return 0.0


@njit(cache=True, error_model="numpy")
def _eigenvectors_2d(U, gamma, axis, R):
    """Right eigenvectors at the state U along ``axis``; identity if gamma <= 0."""
    R[:, :] = 0.0
    if gamma <= 0.0:
        for k in range(4):
            R[k, k] = 1.0
        return
    r = U[0]
    u = U[1] / r
    v = U[2] / r
    q2 = u * u + v * v
    p = (gamma - 1.0) * (U[3] - 0.5 * r * q2)
    c = np.sqrt(gamma * p / r)
    H = (U[3] + p) / r
    un = u if axis == 0 else v
    ut = v if axis == 0 else u
    n = 1 + axis
    t = 2 - axis
    for col in (0, 1, 3):
        R[0, col] = 1.0
        R[1, col] = u
        R[2, col] = v
    R[n, 0] -= c
    R[n, 3] += c
    R[3, 0] = H - un * c
    R[3, 1] = 0.5 * q2
    R[3, 3] = H + un * c
    R[t, 2] = 1.0
    R[3, 2] = ut


@njit(cache=True, error_model="numpy")
def _left_eigenvectors_2d(U, gamma, axis, L):
    """Inverse of the matrix built by ``_eigenvectors_2d``, written out."""
    L[:, :] = 0.0
    if gamma <= 0.0:
        for k in range(4):
            L[k, k] = 1.0
        return
    r = U[0]
    u = U[1] / r
    v = U[2] / r
    q2 = u * u + v * v
    p = (gamma - 1.0) * (U[3] - 0.5 * r * q2)
    c = np.sqrt(gamma * p / r)
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * b1 * q2
    un = u if axis == 0 else v
    ut = v if axis == 0 else u
    n = 1 + axis
    t = 2 - axis
    L[0, 0] = 0.5 * (b2 + un / c)
    L[0, 1] = -0.5 * b1 * u
    L[0, 2] = -0.5 * b1 * v
    L[0, n] -= 0.5 / c
    L[0, 3] = 0.5 * b1
    L[1, 0] = 1.0 - b2
    L[1, 1] = b1 * u
    L[1, 2] = b1 * v
    L[1, 3] = -b1
    L[2, 0] = -ut
    L[2, t] = 1.0
    L[3, 0] = 0.5 * (b2 - un / c)
    L[3, 1] = -0.5 * b1 * u
    L[3, 2] = -0.5 * b1 * v
    L[3, n] += 0.5 / c
    L[3, 3] = 0.5 * b1


@njit(cache=True, error_model="numpy")
def tvb_limit_2d(coef, Mid, thr_x, thr_y, per_x, per_y, gamma, i10, i01, rel, out):
    """Flag cells whose mid-edge deviations the TVB minmod changes and replace them
    by a limited linear polynomial in characteristic variables.

    ``Mid`` rows evaluate the basis at the right, left, top and bottom edge
    midpoints.  ``out`` starts as a copy of ``coef``.  Returns the number of
    flagged cells.
    """
    nx, ny, nm, _ = coef.shape
    root3 = np.sqrt(3.0)
    mids = np.empty((4, 4))
    floor = np.empty(4)
    dpx = np.empty(4)
    dmx = np.empty(4)
    dpy = np.empty(4)
    dmy = np.empty(4)
    R = np.empty((4, 4))
    L = np.empty((4, 4))
    w = np.empty((3, 4))
    count = 0
    for i in range(nx):
        for j in range(ny):
            av = coef[i, j, 0]
            has_x = per_x or (0 < i < nx - 1)
            has_y = per_y or (0 < j < ny - 1)
            ip, im = (i + 1) % nx, (i - 1) % nx
            jp, jm = (j + 1) % ny, (j - 1) % ny
            for k in range(4):
                dpx[k] = coef[ip, j, 0, k] - av[k]
                dmx[k] = av[k] - coef[im, j, 0, k]
                dpy[k] = coef[i, jp, 0, k] - av[k]
                dmy[k] = av[k] - coef[i, jm, 0, k]
            if not per_x:
                if i == 0:
                    for k in range(4):
                        dmx[k] = dpx[k]
                if i == nx - 1:
                    for k in range(4):
                        dpx[k] = dmx[k]
            if not per_y:
                if j == 0:
                    for k in range(4):
                        dmy[k] = dpy[k]
                if j == ny - 1:
                    for k in range(4):
                        dpy[k] = dmy[k]
            if nx == 1:
                has_x = False
            if ny == 1:
                has_y = False
            floor[0] = rel * abs(av[0]) + 1e-300
            floor[3] = rel * abs(av[3]) + 1e-300
            floor[1] = floor[2] = rel * np.sqrt(abs(av[0] * av[3])) + 1e-300
            for e in range(4):
                for k in range(4):
                    s = 0.0
                    for a in range(nm):
                        s += Mid[e, a] * coef[i, j, a, k]
                    mids[e, k] = s
            flag = False
            for k in range(4):
                if has_x:
                    ut = mids[0, k] - av[k]
                    utt = av[k] - mids[1, k]
                    if (abs(_minmod_tvb(ut, dpx[k], dmx[k], thr_x[i]) - ut) > floor[k]
                            or abs(_minmod_tvb(utt, dpx[k], dmx[k], thr_x[i]) - utt) > floor[k]):
                        flag = True
                if has_y:
                    ut = mids[2, k] - av[k]
                    utt = av[k] - mids[3, k]
                    if (abs(_minmod_tvb(ut, dpy[k], dmy[k], thr_y[j]) - ut) > floor[k]
                            or abs(_minmod_tvb(utt, dpy[k], dmy[k], thr_y[j]) - utt) > floor[k]):
                        flag = True
            if not flag:
                continue
            count += 1
            for a in range(1, nm):
                for k in range(4):
                    out[i, j, a, k] = 0.0
            for axis in range(2):
                mode = i10 if axis == 0 else i01
                thr = thr_x[i] if axis == 0 else thr_y[j]
                _eigenvectors_2d(av, gamma, axis, R)
                _left_eigenvectors_2d(av, gamma, axis, L)
                for row in range(4):
                    s0 = s1 = s2 = 0.0
                    for k in range(4):
                        s0 += L[row, k] * root3 * coef[i, j, mode, k]
                        s1 += L[row, k] * (dpx[k] if axis == 0 else dpy[k])
                        s2 += L[row, k] * (dmx[k] if axis == 0 else dmy[k])
                    w[0, row] = _minmod_tvb(s0, s1, s2, thr)
                for k in range(4):
                    s = 0.0
                    for row in range(4):
                        s += R[k, row] * w[0, row]
                    out[i, j, mode, k] = s / root3
    return count
