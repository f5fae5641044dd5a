"""Pure-numpy closed-loop integrator.

Reference implementation of the hot loop: import-time fallback when the
compiled kernel is unavailable, correctness oracle for it otherwise.  The
derivative evaluation is vectorized over edges; the step loop stays in
Python.  Semantics are identical to ``_speedups.integrate``.
"""

import numpy as np

from .errors import GeometryFault

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])
_COINCIDENCE = 1e-9
_PARALLEL_TOL = 1e-8

EULER, RK4 = 0, 1


def _edge_f(P, edges0, mode, rho, t):
    """Bearing-chain f per edge; raises GeometryFault on bad geometry."""
    heads = edges0[:, 0]
    tails = edges0[:, 1]
    E = P[tails] - P[heads]  # vector from first-listed vertex toward second
    l = np.sqrt(np.sum(E * E, axis=1))
    bad = l <= _COINCIDENCE
    if np.any(bad):
        k = int(np.argmax(bad))
        raise GeometryFault(
            f"t={t:.6f} s: agents of edge {k + 1} coincide (separation {l[k]:.3e} m)",
            t=t, edge=k + 1,
        )
    g = E / l[:, None]
    if mode == 2:
        E_top = E + rho * _Z
        l_top = np.sqrt(np.sum(E_top * E_top, axis=1))
        c = np.sum(E * E_top, axis=1) / (l * l_top)
        f = c / np.sqrt(1.0 - c * c)
    else:
        overlap = l <= 2.0 * rho
        if np.any(overlap):
            k = int(np.argmax(overlap))
            raise GeometryFault(
                f"t={t:.6f} s: balls of edge {k + 1} overlap (separation {l[k]:.6g} <= {2 * rho:.6g} m)",
                t=t, edge=k + 1,
            )
        u = _Z - g[:, 2:3] * g
        norm_u = np.sqrt(np.sum(u * u, axis=1))
        fallback = norm_u < _PARALLEL_TOL
        if np.any(fallback):
            u[fallback] = _X - g[fallback, 0:1] * g[fallback]
            norm_u[fallback] = np.sqrt(np.sum(u[fallback] * u[fallback], axis=1))
        a = u / norm_u[:, None]
        half = np.arcsin(rho / l)
        ch, sh = np.cos(half)[:, None], np.sin(half)[:, None]
        g1 = ch * g + sh * a
        g2 = ch * g - sh * a
        c = np.sum(g1 * g2, axis=1)
        f = 1.0 / np.sqrt((1.0 - c) / 2.0)
    return f, g


def _derivative(t, p_f, w_loc, prob):
    """Follower position/estimate derivatives at absolute time ``t``."""
    (mode, rho, edges0, f_star, p_leader0, v_star, Q_f, omega_loc,
     kp, ke, alpha, n, n_l) = prob
    P = np.empty((n, 3))
    P[:n_l] = p_leader0 + t * v_star
    P[n_l:] = p_f
    f, g = _edge_f(P, edges0, mode, rho, t)
    z = f - f_star
    S = np.zeros((n, 3))
    gz = g * z[:, None]
    np.add.at(S, edges0[:, 0], gz)   # bearing from head toward tail
    np.add.at(S, edges0[:, 1], -gz)
    s_loc = np.einsum("ikj,ik->ij", Q_f, S[n_l:])
    sig_s = np.sign(s_loc) * np.abs(s_loc) ** alpha
    dp_loc = kp * sig_s - w_loc + omega_loc
    dp = np.einsum("ijk,ik->ij", Q_f, dp_loc)
    dw = -ke * s_loc
    return dp, dw


def integrate(mode, rho, edges0, f_star, p_leader0, v_star, Q_f, omega_loc,
              kp, ke, alpha, p_f0, w0, t0, dt, nsteps, stride, method):
    """Integrate the closed loop and return sampled (T, P, W_loc).

    Leaders follow the exact line p_leader0 + t * v_star at every stage;
    followers integrate with fixed-step Euler or RK4.  A sample is stored
    at step 0 and after every ``stride`` full steps: S = nsteps//stride + 1
    samples in total.
    """
    edges0 = np.ascontiguousarray(edges0, dtype=np.int64)
    n_l = p_leader0.shape[0]
    n_f = p_f0.shape[0]
    n = n_l + n_f
    prob = (mode, rho, edges0, np.asarray(f_star, float), p_leader0,
            np.asarray(v_star, float), Q_f, omega_loc, kp, ke, alpha, n, n_l)

    n_samples = nsteps // stride + 1
    T = np.empty(n_samples)
    P_out = np.empty((n_samples, n, 3))
    W_out = np.empty((n_samples, n_f, 3))

    p_f = np.array(p_f0, dtype=float)
    w = np.array(w0, dtype=float)

    def record(slot, k):
        t = t0 + k * dt
        T[slot] = t
        P_out[slot, :n_l] = p_leader0 + t * v_star
        P_out[slot, n_l:] = p_f
        W_out[slot] = w

    record(0, 0)
    slot = 1
    for k in range(nsteps):
        t = t0 + k * dt
        if method == EULER:
            dp, dw = _derivative(t, p_f, w, prob)
            p_f = p_f + dt * dp
            w = w + dt * dw
        else:
            k1p, k1w = _derivative(t, p_f, w, prob)
            k2p, k2w = _derivative(t + 0.5 * dt, p_f + 0.5 * dt * k1p, w + 0.5 * dt * k1w, prob)
            k3p, k3w = _derivative(t + 0.5 * dt, p_f + 0.5 * dt * k2p, w + 0.5 * dt * k2w, prob)
            k4p, k4w = _derivative(t + dt, p_f + dt * k3p, w + dt * k3w, prob)
            p_f = p_f + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            w = w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        if (k + 1) % stride == 0 and slot < n_samples:
            record(slot, k + 1)
            slot += 1
    return T, P_out, W_out
