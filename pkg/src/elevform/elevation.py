"""Elevation-angle measurement model and the rigidity matrix.

Each neighbor carries a measurement target: a vertical rod of height
``h_c`` in the planar case, a ball of radius ``r_c`` in the spatial case.
The angle subtended at the observer is frame independent, and its
cot/cosec transform equals (distance / rho), giving a per-edge scalar
``f_k`` that encodes range while being measurable from bearings alone.

The simulator always evaluates ``f`` through the bearing chain
(:func:`elevation_f_2d_from_bearings` / :func:`elevation_f_3d_from_bearings`);
the direct distance ratios exist as independent oracles for testing.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    BallsOverlapError,
    CoincidentAgentsError,
    DegenerateAngleError,
    GeometryError,
    NonPositiveDistanceError,
)
from .frames import COINCIDENCE_THRESHOLD, bearing

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])
_PARALLEL_TOL = 1e-8
DEGENERATE_TOL = 1e-12
RANK_TOL = 1e-8  # singular values below RANK_TOL * sigma_max count as zero


class Mode(enum.Enum):
    PLANAR_2D = "2d"
    SPATIAL_3D = "3d"

    @property
    def dimension(self):
        return 2 if self is Mode.PLANAR_2D else 3


@dataclass(frozen=True)
class ElevationParams:
    """Measurement-model parameters: mode plus rho (rod height or ball radius)."""

    mode: Mode
    rho: float

    def __post_init__(self):
        if self.rho <= 0:
            raise NonPositiveDistanceError(f"rho must be positive, got {self.rho}")


def elevation_f_2d_from_distance(l, h_c):
    """Distance-ratio oracle for the planar case: returns l / h_c."""
    if l <= 0:
        raise NonPositiveDistanceError(f"distance must be positive, got {l}")
    if h_c <= 0:
        raise NonPositiveDistanceError(f"rod height must be positive, got {h_c}")
    return l / h_c


def elevation_f_3d_from_distance(l, r_c):
    """Distance-ratio oracle for the spatial case: returns l / r_c."""
    if l <= 0:
        raise NonPositiveDistanceError(f"distance must be positive, got {l}")
    if r_c <= 0:
        raise NonPositiveDistanceError(f"ball radius must be positive, got {r_c}")
    return l / r_c


def elevation_f_2d_from_bearings(g_ij, g_ij_top):
    """Planar f from the bearings to a neighbor and to its rod endpoint.

    Both bearings must be expressed in the same frame; the result is
    c / sqrt(1 - c^2) with c their inner product, and is identical for
    local and global bearings.
    """
    c = float(np.dot(g_ij, g_ij_top))
    if abs(c) >= 1.0 - DEGENERATE_TOL:
        raise DegenerateAngleError(f"bearing inner product {c} too close to +/-1")
    return c / np.sqrt(1.0 - c * c)


def elevation_f_3d_from_bearings(g1, g2):
    """Spatial f from the two tangent bearings: 1 / sqrt((1 - c) / 2)."""
    c = float(np.dot(g1, g2))
    if c >= 1.0 - DEGENERATE_TOL:
        raise DegenerateAngleError(f"bearing inner product {c} too close to 1")
    return 1.0 / np.sqrt((1.0 - c) / 2.0)


def tangent_bearings_3d(p_i, p_j, r_c):
    """Bearings from ``p_i`` to the two tangent points of the ball at ``p_j``.

    The tangent points are chosen in the plane spanned by the edge vector
    and the global z axis (x axis when the edge is within 1e-8 of parallel
    to z), which makes the construction deterministic; the resulting inner
    product depends only on the distance.  Raises BallsOverlapError unless
    the separation strictly exceeds 2 r_c.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    edge = p_j - p_i
    l = np.linalg.norm(edge)
    if l <= 2.0 * r_c:
        raise BallsOverlapError(f"separation {l:.6g} <= 2 r_c = {2 * r_c:.6g}")
    g = edge / l
    u = _Z - np.dot(_Z, g) * g
    norm_u = np.linalg.norm(u)
    if norm_u < _PARALLEL_TOL:
        u = _X - np.dot(_X, g) * g
        norm_u = np.linalg.norm(u)
    a = u / norm_u
    half_angle = np.arcsin(r_c / l)
    c, s = np.cos(half_angle), np.sin(half_angle)
    return c * g + s * a, c * g - s * a


def rod_top_bearing(p_i, p_j, h_c):
    """Bearing from ``p_i`` to the endpoint of the rod above ``p_j``."""
    return bearing(p_i, np.asarray(p_j, dtype=float) + h_c * _Z)


def edge_elevation_f(p_i, p_j, params):
    """f for a single observer/target pair via the bearing chain."""
    if params.mode is Mode.PLANAR_2D:
        g = bearing(p_i, p_j)
        g_top = rod_top_bearing(p_i, p_j, params.rho)
        return elevation_f_2d_from_bearings(g, g_top)
    g1, g2 = tangent_bearings_3d(p_i, p_j, params.rho)
    return elevation_f_3d_from_bearings(g1, g2)


def _positions(p, n=None):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p.reshape(-1, 3)
    if n is not None and p.shape[0] != n:
        raise ValueError(f"expected {n} agent positions, got {p.shape[0]}")
    return p


def elevation_function(p, graph, params):
    """Per-edge elevation values f_k = l_k / rho, in edge order.

    ``p`` is the stacked global configuration (3n flat or (n, 3)).  Every
    entry is computed through the bearing chain.  Geometric failures are
    re-raised with the offending 1-based edge index attached.
    """
    P = _positions(p, graph.n)
    f = np.empty(graph.m)
    for k, (i, j) in enumerate(graph.edges):
        try:
            f[k] = edge_elevation_f(P[i - 1], P[j - 1], params)
        except GeometryError as exc:
            raise type(exc)(f"edge {k + 1} ({i},{j}): {exc}") from exc
    return f


def rigidity_matrix(p, graph, params):
    """Jacobian of :func:`elevation_function` w.r.t. the stacked positions.

    Row k is rho^-1 * ghat_k^T applied to the head/tail blocks of edge k,
    with ghat_k the unit vector from tail to head; an m-by-3n dense array.
    """
    P = _positions(p, graph.n)
    R = np.zeros((graph.m, 3 * graph.n))
    inv_rho = 1.0 / params.rho
    for k, (i, j) in enumerate(graph.edges):
        edge = P[i - 1] - P[j - 1]  # head minus tail
        dist = np.linalg.norm(edge)
        if dist <= COINCIDENCE_THRESHOLD:
            raise CoincidentAgentsError(f"edge {k + 1} ({i},{j}): separation {dist:.3e} m")
        ghat = edge / dist
        R[k, 3 * (i - 1): 3 * i] = inv_rho * ghat
        R[k, 3 * (j - 1): 3 * j] = -inv_rho * ghat
    return R


@dataclass(frozen=True)
class RigidityResult:
    rigid: bool
    rank: int
    required_rank: int
    singular_values: np.ndarray
    gap: float  # ratio of smallest counted to largest discarded singular value


def is_infinitesimally_rigid(R, d, n):
    """Numerical-rank test of the rigidity matrix.

    Rigid iff rank(R) == d*n - d*(d+1)/2, with singular values below
    1e-8 * sigma_max treated as zero.  ``gap`` reports how cleanly the
    spectrum splits at the threshold (inf when nothing was discarded).
    """
    sv = np.linalg.svd(np.asarray(R, dtype=float), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        rank = 0
        gap = np.inf
    else:
        keep = sv > RANK_TOL * sv[0]
        rank = int(np.count_nonzero(keep))
        dropped = sv[~keep]
        gap = np.inf if dropped.size == 0 or dropped[0] == 0.0 else float(sv[keep][-1] / dropped[0])
    required = d * n - d * (d + 1) // 2
    return RigidityResult(rank == required, rank, required, sv, gap)
