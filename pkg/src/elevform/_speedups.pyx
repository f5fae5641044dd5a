# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled closed-loop integrator.

Same contract as ``_reference.integrate``: fixed-step Euler/RK4 on the
follower positions and disturbance estimates with analytically moving
leaders, evaluating the bearing-chain elevation values for every edge at
every stage.  All state lives in preallocated C buffers; the step loop
never touches Python objects.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, cos, fabs, pow, sin, sqrt

from .errors import GeometryFault

cnp.import_array()

DEF COINCIDENCE = 1e-9
DEF PARALLEL_TOL = 1e-8

EULER = 0
RK4 = 1


cdef inline double _sig1(double x, double alpha) noexcept nogil:
    if x > 0.0:
        return pow(x, alpha)
    if x < 0.0:
        return -pow(-x, alpha)
    return 0.0


cdef int _derivative(double t,
                     int mode, double rho,
                     long[:, ::1] edges0, double[::1] f_star,
                     double[:, ::1] p_leader0, double[::1] v_star,
                     double[:, :, ::1] Q_f, double[:, ::1] omega_loc,
                     double kp, double ke, double alpha,
                     double[:, ::1] p_f, double[:, ::1] w,
                     double[:, ::1] P, double[:, ::1] S,
                     double[:, ::1] dp, double[:, ::1] dw) noexcept nogil:
    """Fill dp/dw at time t. Returns 0, or +-(k+1) flagging edge k
    (positive: coincidence, negative: ball overlap)."""
    cdef Py_ssize_t n_l = p_leader0.shape[0]
    cdef Py_ssize_t n_f = p_f.shape[0]
    cdef Py_ssize_t n = n_l + n_f
    cdef Py_ssize_t m = edges0.shape[0]
    cdef Py_ssize_t i, j, k, a, b
    cdef double ex, ey, ez, l, gx, gy, gz
    cdef double etx, ety, etz, lt, c, f, z
    cdef double ux, uy, uz, un, half, ch, sh
    cdef double g1x, g1y, g1z, g2x, g2y, g2z
    cdef double sx, sy, sz, slx, sly, slz
    cdef double dlx, dly, dlz

    for i in range(n_l):
        P[i, 0] = p_leader0[i, 0] + t * v_star[0]
        P[i, 1] = p_leader0[i, 1] + t * v_star[1]
        P[i, 2] = p_leader0[i, 2] + t * v_star[2]
    for i in range(n_f):
        P[n_l + i, 0] = p_f[i, 0]
        P[n_l + i, 1] = p_f[i, 1]
        P[n_l + i, 2] = p_f[i, 2]
    for i in range(n):
        S[i, 0] = 0.0
        S[i, 1] = 0.0
        S[i, 2] = 0.0

    for k in range(m):
        a = edges0[k, 0]
        b = edges0[k, 1]
        ex = P[b, 0] - P[a, 0]
        ey = P[b, 1] - P[a, 1]
        ez = P[b, 2] - P[a, 2]
        l = sqrt(ex * ex + ey * ey + ez * ez)
        if l <= COINCIDENCE:
            return <int>(k + 1)
        gx = ex / l
        gy = ey / l
        gz = ez / l
        if mode == 2:
            # rod of height rho above the target agent
            etx = ex
            ety = ey
            etz = ez + rho
            lt = sqrt(etx * etx + ety * ety + etz * etz)
            c = (ex * etx + ey * ety + ez * etz) / (l * lt)
            f = c / sqrt(1.0 - c * c)
        else:
            if l <= 2.0 * rho:
                return -<int>(k + 1)
            # tangent bearings to the ball of radius rho, in the plane of
            # the edge and the global z axis (x axis if near-parallel)
            ux = -gz * gx
            uy = -gz * gy
            uz = 1.0 - gz * gz
            un = sqrt(ux * ux + uy * uy + uz * uz)
            if un < PARALLEL_TOL:
                ux = 1.0 - gx * gx
                uy = -gx * gy
                uz = -gx * gz
                un = sqrt(ux * ux + uy * uy + uz * uz)
            ux /= un
            uy /= un
            uz /= un
            half = asin(rho / l)
            ch = cos(half)
            sh = sin(half)
            g1x = ch * gx + sh * ux
            g1y = ch * gy + sh * uy
            g1z = ch * gz + sh * uz
            g2x = ch * gx - sh * ux
            g2y = ch * gy - sh * uy
            g2z = ch * gz - sh * uz
            c = g1x * g2x + g1y * g2y + g1z * g2z
            f = 1.0 / sqrt((1.0 - c) / 2.0)
        z = f - f_star[k]
        S[a, 0] += gx * z
        S[a, 1] += gy * z
        S[a, 2] += gz * z
        S[b, 0] -= gx * z
        S[b, 1] -= gy * z
        S[b, 2] -= gz * z

    for i in range(n_f):
        sx = S[n_l + i, 0]
        sy = S[n_l + i, 1]
        sz = S[n_l + i, 2]
        # local-frame bearing sum: Q_i^T S_i
        slx = Q_f[i, 0, 0] * sx + Q_f[i, 1, 0] * sy + Q_f[i, 2, 0] * sz
        sly = Q_f[i, 0, 1] * sx + Q_f[i, 1, 1] * sy + Q_f[i, 2, 1] * sz
        slz = Q_f[i, 0, 2] * sx + Q_f[i, 1, 2] * sy + Q_f[i, 2, 2] * sz
        dw[i, 0] = -ke * slx
        dw[i, 1] = -ke * sly
        dw[i, 2] = -ke * slz
        # local velocity, then back to the global frame
        dlx = kp * _sig1(slx, alpha) - w[i, 0] + omega_loc[i, 0]
        dly = kp * _sig1(sly, alpha) - w[i, 1] + omega_loc[i, 1]
        dlz = kp * _sig1(slz, alpha) - w[i, 2] + omega_loc[i, 2]
        dp[i, 0] = Q_f[i, 0, 0] * dlx + Q_f[i, 0, 1] * dly + Q_f[i, 0, 2] * dlz
        dp[i, 1] = Q_f[i, 1, 0] * dlx + Q_f[i, 1, 1] * dly + Q_f[i, 1, 2] * dlz
        dp[i, 2] = Q_f[i, 2, 0] * dlx + Q_f[i, 2, 1] * dly + Q_f[i, 2, 2] * dlz
    return 0


def integrate(int mode, double rho, edges0, f_star, p_leader0, v_star,
              Q_f, omega_loc, double kp, double ke, double alpha,
              p_f0, w0, double t0, double dt, long nsteps, long stride,
              int method):
    """Integrate and return sampled (T, P, W_loc); see ``_reference.integrate``."""
    cdef long[:, ::1] edges = np.ascontiguousarray(edges0, dtype=np.int64)
    cdef double[::1] fst = np.ascontiguousarray(f_star, dtype=np.float64)
    cdef double[:, ::1] pl0 = np.ascontiguousarray(p_leader0, dtype=np.float64)
    cdef double[::1] vs = np.ascontiguousarray(v_star, dtype=np.float64)
    cdef double[:, :, ::1] Q = np.ascontiguousarray(Q_f, dtype=np.float64)
    cdef double[:, ::1] oml = np.ascontiguousarray(omega_loc, dtype=np.float64)

    cdef Py_ssize_t n_l = pl0.shape[0]
    cdef Py_ssize_t n_f = Q.shape[0]
    cdef Py_ssize_t n = n_l + n_f
    cdef long n_samples = nsteps // stride + 1

    T_arr = np.empty(n_samples)
    P_arr = np.empty((n_samples, n, 3))
    W_arr = np.empty((n_samples, n_f, 3))
    cdef double[::1] T = T_arr
    cdef double[:, :, ::1] P_out = P_arr
    cdef double[:, :, ::1] W_out = W_arr

    pf_arr = np.array(p_f0, dtype=np.float64, order="C")
    w_arr = np.array(w0, dtype=np.float64, order="C")
    cdef double[:, ::1] p_f = pf_arr
    cdef double[:, ::1] w = w_arr

    scratch = [np.zeros((n, 3)), np.zeros((n, 3))]
    cdef double[:, ::1] P = scratch[0]
    cdef double[:, ::1] S = scratch[1]
    stage = [np.zeros((n_f, 3)) for _ in range(10)]
    cdef double[:, ::1] k1p = stage[0]
    cdef double[:, ::1] k1w = stage[1]
    cdef double[:, ::1] k2p = stage[2]
    cdef double[:, ::1] k2w = stage[3]
    cdef double[:, ::1] k3p = stage[4]
    cdef double[:, ::1] k3w = stage[5]
    cdef double[:, ::1] k4p = stage[6]
    cdef double[:, ::1] k4w = stage[7]
    cdef double[:, ::1] ptmp = stage[8]
    cdef double[:, ::1] wtmp = stage[9]

    cdef long k, slot
    cdef Py_ssize_t i, j
    cdef double t, t_err
    cdef int err = 0
    cdef double sixth = dt / 6.0

    with nogil:
        err = _record(T, P_out, W_out, 0, t0, pl0, vs, p_f, w, n_l, n_f)
    slot = 1

    for k in range(nsteps):
        t = t0 + k * dt
        t_err = t
        with nogil:
            if method == 0:
                err = _derivative(t, mode, rho, edges, fst, pl0, vs, Q, oml,
                                  kp, ke, alpha, p_f, w, P, S, k1p, k1w)
                if err == 0:
                    for i in range(n_f):
                        for j in range(3):
                            p_f[i, j] += dt * k1p[i, j]
                            w[i, j] += dt * k1w[i, j]
            else:
                err = _derivative(t, mode, rho, edges, fst, pl0, vs, Q, oml,
                                  kp, ke, alpha, p_f, w, P, S, k1p, k1w)
                if err == 0:
                    for i in range(n_f):
                        for j in range(3):
                            ptmp[i, j] = p_f[i, j] + 0.5 * dt * k1p[i, j]
                            wtmp[i, j] = w[i, j] + 0.5 * dt * k1w[i, j]
                    t_err = t + 0.5 * dt
                    err = _derivative(t + 0.5 * dt, mode, rho, edges, fst, pl0, vs,
                                      Q, oml, kp, ke, alpha, ptmp, wtmp, P, S, k2p, k2w)
                if err == 0:
                    for i in range(n_f):
                        for j in range(3):
                            ptmp[i, j] = p_f[i, j] + 0.5 * dt * k2p[i, j]
                            wtmp[i, j] = w[i, j] + 0.5 * dt * k2w[i, j]
                    err = _derivative(t + 0.5 * dt, mode, rho, edges, fst, pl0, vs,
                                      Q, oml, kp, ke, alpha, ptmp, wtmp, P, S, k3p, k3w)
                if err == 0:
                    for i in range(n_f):
                        for j in range(3):
                            ptmp[i, j] = p_f[i, j] + dt * k3p[i, j]
                            wtmp[i, j] = w[i, j] + dt * k3w[i, j]
                    t_err = t + dt
                    err = _derivative(t + dt, mode, rho, edges, fst, pl0, vs,
                                      Q, oml, kp, ke, alpha, ptmp, wtmp, P, S, k4p, k4w)
                if err == 0:
                    for i in range(n_f):
                        for j in range(3):
                            p_f[i, j] += sixth * (k1p[i, j] + 2.0 * k2p[i, j]
                                                  + 2.0 * k3p[i, j] + k4p[i, j])
                            w[i, j] += sixth * (k1w[i, j] + 2.0 * k2w[i, j]
                                                + 2.0 * k3w[i, j] + k4w[i, j])
        if err != 0:
            _raise_fault(err, t_err)
        if (k + 1) % stride == 0 and slot < n_samples:
            with nogil:
                _record(T, P_out, W_out, slot, t0 + (k + 1) * dt, pl0, vs,
                        p_f, w, n_l, n_f)
            slot += 1

    return T_arr, P_arr, W_arr


cdef int _record(double[::1] T, double[:, :, ::1] P_out, double[:, :, ::1] W_out,
                 long slot, double t, double[:, ::1] pl0, double[::1] vs,
                 double[:, ::1] p_f, double[:, ::1] w,
                 Py_ssize_t n_l, Py_ssize_t n_f) noexcept nogil:
    cdef Py_ssize_t i, j
    T[slot] = t
    for i in range(n_l):
        for j in range(3):
            P_out[slot, i, j] = pl0[i, j] + t * vs[j]
    for i in range(n_f):
        for j in range(3):
            P_out[slot, n_l + i, j] = p_f[i, j]
            W_out[slot, i, j] = w[i, j]
    return 0


def _raise_fault(int err, double t):
    if err > 0:
        raise GeometryFault(
            f"t={t:.6f} s: agents of edge {err} coincide", t=t, edge=err)
    raise GeometryFault(
        f"t={t:.6f} s: balls of edge {-err} overlap", t=t, edge=-err)
