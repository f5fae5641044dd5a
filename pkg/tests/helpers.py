"""Shared geometry builders and random generators for the test suite."""

import numpy as np

from elevform import (
    AgentFrame,
    ControlGains,
    ElevationParams,
    FormationGraph,
    Mode,
    Scenario,
)

SQRT3 = np.sqrt(3.0)


def random_rotation(rng):
    """Haar-ish uniform proper rotation from a QR factorization."""
    A = rng.standard_normal((3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, [0, 1]] = Q[:, [1, 0]]
    return Q


def random_signed_permutation(rng):
    """Uniform element of the proper signed-permutation rotations."""
    P = np.zeros((3, 3))
    for row, col in enumerate(rng.permutation(3)):
        P[row, col] = rng.choice([-1.0, 1.0])
    if np.linalg.det(P) < 0:
        P[0] *= -1.0
    return P


def regular_tetrahedron(side=1.0):
    """Vertices of a regular tetrahedron with the first edge on the x axis."""
    return side * np.array([
        [-0.5, 0.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.0, SQRT3 / 2.0, 0.0],
        [0.0, SQRT3 / 6.0, np.sqrt(6.0) / 3.0],
    ])


def tetrahedron_graph():
    return FormationGraph(4, 2, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])


def hexagon_vertices():
    """Regular hexagon of side 1 whose first two vertices are the leaders."""
    center = np.array([0.0, 0.5 - SQRT3 / 2.0, 0.0])
    angles = np.deg2rad([60, 120, 180, 240, 300, 0])
    return center + np.column_stack([np.cos(angles), np.sin(angles), np.zeros(6)])


def hexagon_graph():
    return FormationGraph(
        6, 2,
        [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1), (1, 3), (1, 4), (1, 5)],
    )


def edge_lengths(P, graph):
    P = np.asarray(P, dtype=float).reshape(-1, 3)
    return np.array([np.linalg.norm(P[i - 1] - P[j - 1]) for i, j in graph.edges])


def make_scenario(graph, mode, rho, p0, desired_lengths, *, gains=None, omega=None,
                  omega_frame="global", v_star=(0.0, 0.0, 0.0), frames=(),
                  dt=1e-3, t_end=30.0, integrator="rk4", stride=10, name="test"):
    if gains is None:
        gains = ControlGains(0.5, 0.1, 0.5)
    if omega is None:
        omega = np.zeros((graph.n_followers, 3))
    return Scenario(
        graph=graph,
        params=ElevationParams(mode, rho),
        gains=gains,
        p0=np.asarray(p0, dtype=float).reshape(-1),
        desired_lengths=np.asarray(desired_lengths, dtype=float),
        omega=np.asarray(omega, dtype=float),
        omega_frame=omega_frame,
        v_star=np.asarray(v_star, dtype=float),
        frames=tuple(frames),
        dt=dt,
        t_end=t_end,
        integrator=integrator,
        sample_stride=stride,
        name=name,
    )


def frames_from_rotations(rotations, rng=None, translations=True):
    """AgentFrames from rotation matrices, with optional random translations."""
    frames = []
    for Q in rotations:
        T = rng.uniform(-1.0, 1.0, 3) if (rng is not None and translations) else np.zeros(3)
        frames.append(AgentFrame(Q, T))
    return tuple(frames)
