"""Trajectory analysis: energy functions, decay certificates, rigidity.

``V1 = rho/2 ||z_e||^2`` measures the formation error alone and
``V = V1 + ||w_tilde||^2 / (2 ke)`` adds the estimate error.  Away from
equilibrium, whenever the estimate error is small against the formation
error (the *gate* condition), V1 is guaranteed to decay at least at a
fractional power rate; the per-sample gate/bound columns let a logged run
be audited against that certificate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import elevation
from ._reference import _edge_f
from .elevation import Mode, is_infinitesimally_rigid, rigidity_matrix
from .errors import DimensionMismatchError, NoPositiveEigenvalueError, RigidityCheckFailed

EIGENVALUE_TOL = 1e-10  # relative cutoff for "zero" eigenvalues


def formation_error(f, f_star):
    """Componentwise elevation error z_e = f - f_star, in edge order."""
    f = np.asarray(f, dtype=float)
    f_star = np.asarray(f_star, dtype=float)
    if f.shape != f_star.shape:
        raise DimensionMismatchError(f"f has shape {f.shape}, f_star {f_star.shape}")
    return f - f_star


def lyapunov(z_e, omega_tilde, rho, ke):
    """(V1, V) for one sample: rho/2 ||z_e||^2 and V1 + ||w_tilde||^2/(2 ke)."""
    if ke <= 0 or rho <= 0:
        raise ValueError("rho and ke must be positive")
    z_e = np.asarray(z_e, dtype=float)
    omega_tilde = np.asarray(omega_tilde, dtype=float)
    V1 = 0.5 * rho * float(z_e @ z_e)
    V = V1 + float(omega_tilde.reshape(-1) @ omega_tilde.reshape(-1)) / (2.0 * ke)
    return V1, V


def follower_mask_matrix(graph):
    """Block-diagonal projector onto follower coordinates, shape (3n, 3n)."""
    M = np.zeros((3 * graph.n, 3 * graph.n))
    start = 3 * graph.n_leaders
    M[start:, start:] = np.eye(3 * graph.n_followers)
    return M


@dataclass(frozen=True)
class FtissConstants:
    """Constants of the decay certificate at one configuration.

    ``lambda_plus`` is the smallest positive eigenvalue of R M R^T with M
    the follower projector; ``hm_norm`` the spectral norm of (H (x) I3) M.
    ``gate_coeff`` scales ||z_e||^alpha in the gate condition and
    ``decay_coeff`` scales V1^((1+alpha)/2) in the decay bound.  rho and
    alpha ride along so the bound can be evaluated from z_e alone.
    """

    lambda_plus: float
    hm_norm: float
    gate_coeff: float
    decay_coeff: float
    rho: float
    alpha: float


def smallest_positive_eigenvalue(A):
    """Smallest eigenvalue of symmetric PSD ``A`` above the zero cutoff."""
    eigs = np.linalg.eigvalsh(A)
    top = eigs[-1]
    if top <= 0.0:
        raise NoPositiveEigenvalueError("matrix has no positive eigenvalue")
    positive = eigs[eigs > EIGENVALUE_TOL * top]
    if positive.size == 0:
        raise NoPositiveEigenvalueError("all eigenvalues below tolerance")
    return float(positive[0])


def ftiss_constants(R, graph, gains, rho):
    """Decay-certificate constants from the rigidity matrix at a configuration."""
    R = np.asarray(R, dtype=float)
    Mbar = follower_mask_matrix(graph)
    lam = smallest_positive_eigenvalue(R @ Mbar @ R.T)
    H = np.asarray(graph._incidence, dtype=float)
    hm_norm = float(np.linalg.norm(np.kron(H, np.eye(3)) @ Mbar, 2))
    kp, alpha = gains.kp, gains.alpha
    exp_half = (1.0 + alpha) / 2.0
    gate_coeff = kp * rho ** (1.0 + alpha) * lam ** exp_half / (2.0 * hm_norm)
    decay_coeff = 2.0 ** ((alpha - 1.0) / 2.0) * kp * rho ** exp_half * lam ** exp_half
    return FtissConstants(lam, hm_norm, gate_coeff, decay_coeff, rho, alpha)


def ftiss_gate_and_bound(z_e, omega_tilde, consts, alpha=None):
    """(gate, bound) for one sample.

    gate: ||w_tilde|| <= gate_coeff ||z_e||^alpha, the regime in which the
    decay certificate applies.  bound: -decay_coeff * V1^((1+alpha)/2), an
    upper bound on dV1/dt valid whenever the gate holds.
    """
    if alpha is None:
        alpha = consts.alpha
    z_e = np.asarray(z_e, dtype=float)
    omega_tilde = np.asarray(omega_tilde, dtype=float)
    z_norm = float(np.linalg.norm(z_e))
    w_norm = float(np.linalg.norm(omega_tilde))
    gate = w_norm <= consts.gate_coeff * z_norm ** alpha
    V1 = 0.5 * consts.rho * z_norm ** 2
    bound = -consts.decay_coeff * V1 ** ((1.0 + alpha) / 2.0)
    return gate, bound


def estimate_error_stacked(scenario, est_global):
    """Stacked (3n,) estimate-error vector for one sample.

    w_hat - omega for stationary leaders; the leader velocity joins the
    effective disturbance once the leaders move, so w_hat - omega + v_star
    per follower then.  Leader blocks are zero.
    """
    nf = scenario.graph.n_followers
    target = scenario.omega_global - scenario.v_star[None, :]
    out = np.zeros(3 * scenario.graph.n)
    out[3 * scenario.graph.n_leaders:] = (np.asarray(est_global).reshape(nf, 3) - target).reshape(-1)
    return out


def trajectory_columns(scenario, T, P, est_global):
    """Per-sample z_e, V1, V, gate, bound for a sampled trajectory.

    The rigidity quantities entering the gate/bound are re-evaluated at
    each sample's configuration.
    """
    graph, params, gains = scenario.graph, scenario.params, scenario.gains
    edges0 = np.array([(i - 1, j - 1) for i, j in graph.edges], dtype=np.int64)
    f_star = scenario.f_star
    S = T.size
    z_e = np.empty((S, graph.m))
    V1 = np.empty(S)
    V = np.empty(S)
    gate = np.zeros(S, dtype=bool)
    bound = np.empty(S)
    Mbar = follower_mask_matrix(graph)
    H = np.asarray(graph._incidence, dtype=float)
    hm_norm = float(np.linalg.norm(np.kron(H, np.eye(3)) @ Mbar, 2))
    exp_half = (1.0 + gains.alpha) / 2.0
    for s in range(S):
        f, _ = _edge_f(P[s], edges0, params.mode.dimension, params.rho, T[s])
        z_e[s] = f - f_star
        w_tilde = estimate_error_stacked(scenario, est_global[s])
        V1[s], V[s] = lyapunov(z_e[s], w_tilde, params.rho, gains.ke)
        R = rigidity_matrix(P[s], graph, params)
        try:
            lam = smallest_positive_eigenvalue(R @ Mbar @ R.T)
        except NoPositiveEigenvalueError:
            gate[s] = False
            bound[s] = 0.0
            continue
        gate_coeff = gains.kp * params.rho ** (1.0 + gains.alpha) * lam ** exp_half / (2.0 * hm_norm)
        decay_coeff = 2.0 ** ((gains.alpha - 1.0) / 2.0) * gains.kp * params.rho ** exp_half * lam ** exp_half
        z_norm = np.linalg.norm(z_e[s])
        w_norm = np.linalg.norm(w_tilde)
        gate[s] = w_norm <= gate_coeff * z_norm ** gains.alpha
        bound[s] = -decay_coeff * V1[s] ** exp_half
    return z_e, V1, V, gate, bound


def numerical_v1_rate(t, V1):
    """dV1/dt from the logged sequence: centered differences, one-sided ends."""
    return np.gradient(np.asarray(V1, dtype=float), np.asarray(t, dtype=float))


def convergence_time(log, eps):
    """First sample time after which ||z_e|| stays below ``eps``; None if never."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    norms = log.ze_norm()
    above = np.nonzero(norms >= eps)[0]
    if above.size == 0:
        return float(log.t[0])
    if above[-1] == norms.size - 1:
        return None
    return float(log.t[above[-1] + 1])


# -- desired-configuration realization and rigidity reporting ---------------


def realize_configuration(scenario, tol=1e-8):
    """Embed the desired edge lengths, starting from the initial positions.

    Least-squares refinement of the per-edge length residuals; in planar
    mode only x-y coordinates move.  Returns the stacked configuration
    (3n,).  Raises RigidityCheckFailed when the distances cannot be
    realized from this starting guess.
    """
    graph = scenario.graph
    P0 = scenario.p0.reshape(-1, 3).copy()
    planar = scenario.params.mode is Mode.PLANAR_2D
    idx = np.array([(i - 1, j - 1) for i, j in graph.edges])
    target = scenario.desired_lengths

    def lengths(P):
        diffs = P[idx[:, 0]] - P[idx[:, 1]]
        return np.sqrt(np.sum(diffs * diffs, axis=1))

    if planar:
        x0 = P0[:, :2].reshape(-1)

        def residuals(x):
            P = np.column_stack([x.reshape(-1, 2), P0[:, 2]])
            return lengths(P) - target
    else:
        x0 = P0.reshape(-1)

        def residuals(x):
            return lengths(x.reshape(-1, 3)) - target

    sol = least_squares(residuals, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    worst = np.max(np.abs(sol.fun))
    if worst > tol:
        raise RigidityCheckFailed(
            [f"desired distances not realizable from the initial guess "
             f"(worst residual {worst:.3e} m)"]
        )
    if planar:
        P = np.column_stack([sol.x.reshape(-1, 2), P0[:, 2]])
    else:
        P = sol.x.reshape(-1, 3)
    return P.reshape(-1)


@dataclass(frozen=True)
class RigidityReport:
    rank: int
    required_rank: int
    rigid: bool
    lambda_plus: float
    singular_values: np.ndarray
    desired_configuration: np.ndarray


def rigidity_report(scenario):
    """Rigidity diagnostics of the desired formation.

    Realizes the desired distances, evaluates the rigidity matrix there,
    and reports rank vs required rank, the smallest positive eigenvalue of
    R M R^T, and the singular values.
    """
    p_star = realize_configuration(scenario)
    graph, params = scenario.graph, scenario.params
    R = rigidity_matrix(p_star, graph, params)
    result = is_infinitesimally_rigid(R, params.mode.dimension, graph.n)
    Mbar = follower_mask_matrix(graph)
    try:
        lam = smallest_positive_eigenvalue(R @ Mbar @ R.T)
    except NoPositiveEigenvalueError:
        lam = float("nan")
    return RigidityReport(
        rank=result.rank,
        required_rank=result.required_rank,
        rigid=result.rigid,
        lambda_plus=lam,
        singular_values=result.singular_values,
        desired_configuration=p_star,
    )


def check_desired_rigidity(scenario):
    """Raise RigidityCheckFailed unless the desired formation is rigid."""
    report = rigidity_report(scenario)
    if not report.rigid:
        raise RigidityCheckFailed(
            [f"desired formation is not infinitesimally rigid: "
             f"rank {report.rank} != required {report.required_rank}"]
        )
    return report
