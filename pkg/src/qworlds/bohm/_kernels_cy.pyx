# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled guidance kernels: packet sums, velocity field, guarded RK4.

Mirrors the policy of the pure backend exactly: fixed base step, recursive
halving (max 20 levels) whenever a stage density drops below 10x the
floor, abort when a node region persists at the deepest level.  Packets
must arrive sorted by sector so sector sums can be accumulated in one
pass.
"""
from libc.math cimport atan2, cos, exp, sin, sqrt

import numpy as np

cdef double PREF = (2.0 * 3.14159265358979323846) ** -0.25
cdef int MAX_HALVINGS = 20
cdef double GUARD_FACTOR = 10.0


cdef inline void _fields_c(
    Py_ssize_t n,
    const long[::1] sector,
    const double[::1] x0,
    const double[::1] v,
    const double[::1] s0,
    const double[::1] phase,
    const double[::1] wre,
    const double[::1] wim,
    double x,
    double t,
    double* v_out,
    double* rho_out,
) nogil:
    cdef double rho = 0.0, cur = 0.0
    cdef double a_re = 0.0, a_im = 0.0, da_re = 0.0, da_im = 0.0
    cdef long running = -1
    cdef Py_ssize_t p
    cdef double st_re, st_im, m2, d, denom, exr, exi, amp, ang
    cdef double c_re, c_im, p_re, p_im, f_re, f_im
    for p in range(n):
        if sector[p] != running:
            if running != -1:
                rho += a_re * a_re + a_im * a_im
                cur += a_re * da_im - a_im * da_re
            a_re = a_im = da_re = da_im = 0.0
            running = sector[p]
        st_re = s0[p]
        st_im = t / (2.0 * s0[p])
        m2 = st_re * st_re + st_im * st_im
        d = x - x0[p] - v[p] * t
        denom = 4.0 * s0[p] * m2
        exr = -d * d * st_re / denom
        exi = d * d * st_im / denom + v[p] * (x - x0[p]) - 0.5 * v[p] * v[p] * t + phase[p]
        # prefactor (2 pi)^(-1/4) * s_t^(-1/2), principal branch via polar form
        amp = exp(exr) * PREF / sqrt(sqrt(m2))
        ang = exi - 0.5 * atan2(st_im, st_re)
        c_re = amp * cos(ang)
        c_im = amp * sin(ang)
        p_re = wre[p] * c_re - wim[p] * c_im
        p_im = wre[p] * c_im + wim[p] * c_re
        a_re += p_re
        a_im += p_im
        # derivative factor  -d / (2 s0 s_t) + i v
        f_re = -d * st_re / (2.0 * s0[p] * m2)
        f_im = d * st_im / (2.0 * s0[p] * m2) + v[p]
        da_re += p_re * f_re - p_im * f_im
        da_im += p_re * f_im + p_im * f_re
    if running != -1:
        rho += a_re * a_re + a_im * a_im
        cur += a_re * da_im - a_im * da_re
    rho_out[0] = rho
    v_out[0] = cur / rho if rho > 0.0 else 0.0


cdef struct StepResult:
    double x
    int ok


cdef StepResult _advance_c(
    Py_ssize_t n,
    const long[::1] sector,
    const double[::1] x0,
    const double[::1] v,
    const double[::1] s0,
    const double[::1] phase,
    const double[::1] wre,
    const double[::1] wim,
    double x,
    double t,
    double h,
    int depth,
    double floor,
) nogil:
    cdef double v1, v2, v3, v4, r1, r2, r3, r4, rho_min, x_new
    cdef StepResult out, first
    _fields_c(n, sector, x0, v, s0, phase, wre, wim, x, t, &v1, &r1)
    _fields_c(n, sector, x0, v, s0, phase, wre, wim, x + 0.5 * h * v1, t + 0.5 * h, &v2, &r2)
    _fields_c(n, sector, x0, v, s0, phase, wre, wim, x + 0.5 * h * v2, t + 0.5 * h, &v3, &r3)
    _fields_c(n, sector, x0, v, s0, phase, wre, wim, x + h * v3, t + h, &v4, &r4)
    rho_min = r1
    if r2 < rho_min: rho_min = r2
    if r3 < rho_min: rho_min = r3
    if r4 < rho_min: rho_min = r4
    x_new = x + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
    if rho_min >= GUARD_FACTOR * floor:
        out.x = x_new
        out.ok = 1
        return out
    if depth >= MAX_HALVINGS:
        if rho_min >= floor:
            out.x = x_new
            out.ok = 1
        else:
            out.x = x
            out.ok = 0
        return out
    first = _advance_c(n, sector, x0, v, s0, phase, wre, wim, x, t, 0.5 * h, depth + 1, floor)
    if not first.ok:
        return first
    return _advance_c(n, sector, x0, v, s0, phase, wre, wim,
                      first.x, t + 0.5 * h, 0.5 * h, depth + 1, floor)


def fields(packed, x, double t):
    """Vectorized (velocity, density) arrays over positions ``x``."""
    cdef const long[::1] sector = packed.sector
    cdef const double[::1] x0 = packed.x0
    cdef const double[::1] vv = packed.v
    cdef const double[::1] s0 = packed.s0
    cdef const double[::1] phase = packed.phase
    cdef const double[::1] wre = packed.wre
    cdef const double[::1] wim = packed.wim
    cdef Py_ssize_t n = sector.shape[0]
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    cdef double[::1] xv = np.ascontiguousarray(xs)
    cdef Py_ssize_t m = xv.shape[0]
    v_out = np.empty(m, dtype=np.float64)
    r_out = np.empty(m, dtype=np.float64)
    cdef double[::1] vo = v_out
    cdef double[::1] ro = r_out
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            _fields_c(n, sector, x0, vv, s0, phase, wre, wim, xv[i], t, &vo[i], &ro[i])
    return v_out, r_out


def integrate(packed, double x_init, double t0, double t_max, double dt, double floor):
    """Single trajectory with full (t, x, v, rho) sample storage."""
    cdef const long[::1] sector = packed.sector
    cdef const double[::1] x0 = packed.x0
    cdef const double[::1] vv = packed.v
    cdef const double[::1] s0 = packed.s0
    cdef const double[::1] phase = packed.phase
    cdef const double[::1] wre = packed.wre
    cdef const double[::1] wim = packed.wim
    cdef Py_ssize_t n = sector.shape[0]
    cdef Py_ssize_t n_steps = <Py_ssize_t> round((t_max - t0) / dt)
    ts = np.empty(n_steps + 1, dtype=np.float64)
    xs = np.empty(n_steps + 1, dtype=np.float64)
    vs = np.empty(n_steps + 1, dtype=np.float64)
    rs = np.empty(n_steps + 1, dtype=np.float64)
    cdef double[::1] tv = ts
    cdef double[::1] xv = xs
    cdef double[::1] vel = vs
    cdef double[::1] rho = rs
    cdef double x = x_init, t, vcur, rcur
    cdef Py_ssize_t i, count = 0
    cdef bint aborted = False
    cdef StepResult step
    with nogil:
        for i in range(n_steps):
            t = t0 + i * dt
            _fields_c(n, sector, x0, vv, s0, phase, wre, wim, x, t, &vcur, &rcur)
            tv[i] = t
            xv[i] = x
            vel[i] = vcur
            rho[i] = rcur
            count = i + 1
            step = _advance_c(n, sector, x0, vv, s0, phase, wre, wim, x, t, dt, 0, floor)
            if not step.ok:
                aborted = True
                break
            x = step.x
        if not aborted:
            t = t0 + n_steps * dt
            _fields_c(n, sector, x0, vv, s0, phase, wre, wim, x, t, &vcur, &rcur)
            tv[n_steps] = t
            xv[n_steps] = x
            vel[n_steps] = vcur
            rho[n_steps] = rcur
            count = n_steps + 1
    return ts[:count], xs[:count], vs[:count], rs[:count], aborted


def integrate_batch(packed, x_inits, double t0, double t_max, double dt, double floor):
    """Endpoint-only integration of many trajectories."""
    cdef const long[::1] sector = packed.sector
    cdef const double[::1] x0 = packed.x0
    cdef const double[::1] vv = packed.v
    cdef const double[::1] s0 = packed.s0
    cdef const double[::1] phase = packed.phase
    cdef const double[::1] wre = packed.wre
    cdef const double[::1] wim = packed.wim
    cdef Py_ssize_t n = sector.shape[0]
    starts = np.ascontiguousarray(np.asarray(x_inits, dtype=np.float64))
    cdef double[::1] sv = starts
    cdef Py_ssize_t m = sv.shape[0]
    x_final = np.empty(m, dtype=np.float64)
    v_final = np.empty(m, dtype=np.float64)
    flipped = np.zeros(m, dtype=np.uint8)
    dead = np.zeros(m, dtype=np.uint8)
    cdef double[::1] xf = x_final
    cdef double[::1] vf = v_final
    cdef unsigned char[::1] fl = flipped
    cdef unsigned char[::1] de = dead
    cdef Py_ssize_t n_steps = <Py_ssize_t> round((t_max - t0) / dt)
    cdef Py_ssize_t i, j
    cdef double x, t, vcur, rcur, sign0
    cdef StepResult step
    with nogil:
        for j in range(m):
            x = sv[j]
            sign0 = 1.0 if x > 0.0 else (-1.0 if x < 0.0 else 0.0)
            for i in range(n_steps):
                t = t0 + i * dt
                step = _advance_c(n, sector, x0, vv, s0, phase, wre, wim, x, t, dt, 0, floor)
                if not step.ok:
                    de[j] = 1
                    break
                x = step.x
                if (x > 0.0 and sign0 <= 0.0) or (x < 0.0 and sign0 >= 0.0) or x == 0.0:
                    fl[j] = 1
            _fields_c(n, sector, x0, vv, s0, phase, wre, wim, x, t0 + n_steps * dt, &vcur, &rcur)
            xf[j] = x
            vf[j] = vcur
    return x_final, v_final, flipped.astype(bool), dead.astype(bool)
