"""Rigid agent frames and bearing vectors.

Every agent owns a fixed private coordinate frame described by a rotation
``Q`` (local axes expressed in global coordinates) and a translation ``T``:
a global point ``p`` reads ``Q^T (p + T)`` in the agent's frame.  Both are
constant for the lifetime of a run.  Bearings are unit vectors between
agents; they may be expressed in the global frame or in an agent's local
frame, and differences of positions make them independent of ``T``.
"""

import numpy as np

from .errors import (
    CoincidentAgentsError,
    NotOrthogonalError,
    NotProperRotationError,
)

ORTHOGONALITY_TOL = 1e-12
COINCIDENCE_THRESHOLD = 1e-9  # meters


def validate_rotation(Q):
    """Check that ``Q`` is a proper rotation and return it as float array.

    Raises NotOrthogonalError if ``Q^T Q`` deviates from the identity by
    more than 1e-12 (max-abs), NotProperRotationError if det(Q) is -1
    rather than +1.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] not in (2, 3):
        raise NotOrthogonalError(f"expected a 2x2 or 3x3 matrix, got shape {Q.shape}")
    residual = np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0])))
    if residual > ORTHOGONALITY_TOL:
        raise NotOrthogonalError(f"Q^T Q deviates from identity by {residual:.3e}")
    det = np.linalg.det(Q)
    if abs(det - 1.0) > 1e-12:
        raise NotProperRotationError(f"det(Q) = {det:.15f}, expected +1")
    return Q


def lift_rotation(Q):
    """Embed a 2x2 rotation in 3D as a rotation of the x-y block."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape == (3, 3):
        return Q
    out = np.eye(3)
    out[:2, :2] = Q
    return out


def rot_z(angle):
    """3D rotation by ``angle`` radians about the global z axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_axis_angle(axis, angle):
    """Rodrigues rotation about ``axis`` (need not be unit) by ``angle``."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise ValueError("rotation axis must be nonzero")
    k = axis / norm
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


class AgentFrame:
    """Fixed rigid transform from an agent's private frame to the global one.

    ``rotation`` is validated on construction; both arrays are stored
    read-only so a frame can be shared freely between threads.
    """

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation=None, translation=None):
        if rotation is None:
            rotation = np.eye(3)
        rotation = lift_rotation(validate_rotation(rotation))
        if translation is None:
            translation = np.zeros(3)
        translation = np.asarray(translation, dtype=float)
        if translation.shape == (2,):
            translation = np.array([translation[0], translation[1], 0.0])
        if translation.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {translation.shape}")
        rotation = rotation.copy()
        translation = translation.copy()
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    def __setattr__(self, name, value):
        raise AttributeError("AgentFrame is immutable")

    def __repr__(self):
        return f"AgentFrame(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"

    @property
    def is_identity(self):
        return np.array_equal(self.rotation, np.eye(3)) and not self.translation.any()


IDENTITY_FRAME = AgentFrame()


def to_local(p_global, frame):
    """Express a global point in ``frame``: returns ``Q^T (p + T)``."""
    p = np.asarray(p_global, dtype=float)
    return frame.rotation.T @ (p + frame.translation)


def from_local(p_local, frame):
    """Inverse of :func:`to_local`: returns ``Q p_local - T``."""
    p = np.asarray(p_local, dtype=float)
    return frame.rotation @ p - frame.translation


def bearing(p_i, p_j):
    """Unit vector from ``p_i`` toward ``p_j`` (in the frame of the inputs).

    Antisymmetric: bearing(a, b) == -bearing(b, a) up to floating point.
    Raises CoincidentAgentsError when the points are closer than the
    coincidence threshold (1e-9 m) instead of producing NaNs.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    edge = p_j - p_i
    dist = np.linalg.norm(edge)
    if dist <= COINCIDENCE_THRESHOLD:
        raise CoincidentAgentsError(f"agents separated by {dist:.3e} m")
    return edge / dist
