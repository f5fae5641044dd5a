"""Per-follower control law and disturbance estimator.

Both operations consume only quantities available in the follower's own
frame: bearings to neighbors, current and desired elevation values, and
the follower's running disturbance estimate.  They return derivatives;
integration happens in the engine.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhoodError


@dataclass(frozen=True)
class ControlGains:
    """Gains k_p, k_e > 0 and fractional exponent alpha in (0, 1)."""

    kp: float
    ke: float
    alpha: float

    def __post_init__(self):
        problems = []
        if self.kp <= 0:
            problems.append(f"kp must be positive, got {self.kp}")
        if self.ke <= 0:
            problems.append(f"ke must be positive, got {self.ke}")
        if not 0.0 < self.alpha < 1.0:
            problems.append(f"alpha must lie in (0, 1), got {self.alpha}")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class LocalMeasurement:
    """What one follower senses: per-neighbor bearing, f, and desired f.

    ``bearings`` has shape (k, 3) with unit rows, expressed in the
    follower's local frame; ``f`` and ``f_star`` are length-k.
    """

    bearings: np.ndarray
    f: np.ndarray
    f_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bearings", np.atleast_2d(np.asarray(self.bearings, dtype=float)))
        object.__setattr__(self, "f", np.atleast_1d(np.asarray(self.f, dtype=float)))
        object.__setattr__(self, "f_star", np.atleast_1d(np.asarray(self.f_star, dtype=float)))
        k = self.bearings.shape[0]
        if self.f.shape != (k,) or self.f_star.shape != (k,):
            raise ValueError("bearings, f, f_star must agree on the neighbor count")


def sig(x, beta):
    """Componentwise signed power: sign(x_k) * |x_k|**beta.

    Continuous and odd for beta > 0, with sig(0) = 0, and satisfying
    x . sig(x, beta) = sum_k |x_k|**(1 + beta).
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** beta


def weighted_bearing_sum(meas):
    """sum_j g_ij * (f_ij - f*_ij) over the follower's neighbors."""
    if meas.bearings.shape[0] == 0:
        raise EmptyNeighborhoodError("measurement contains no neighbors")
    return meas.bearings.T @ (meas.f - meas.f_star)


def control_input(meas, est, gains):
    """Velocity command in the follower's local frame.

    kp * sig(sum_j g_ij (f_ij - f*_ij), alpha) - est, where ``est`` is the
    local-frame disturbance estimate.  Depends on nothing but the
    arguments.
    """
    s = weighted_bearing_sum(meas)
    return gains.kp * sig(s, gains.alpha) - np.asarray(est, dtype=float)


def estimator_derivative(meas, gains):
    """Time derivative of the local disturbance estimate: -ke * sum_j g_ij (f_ij - f*_ij)."""
    return -gains.ke * weighted_bearing_sum(meas)
