"""CSV emission and human-readable run summaries.

All files use 17-significant-digit floats (lossless for float64), LF line
endings, and a fixed column layout:

    t,p_1_x,p_1_y,p_1_z,...,p_n_z,ze_1,...,ze_m,V1,V,gate,bound

with the gate flag encoded as 0/1.
"""

import numpy as np

from . import analysis


def _fmt(x):
    return format(float(x), ".17g")


def csv_header(n, m):
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [f"p_{i}_x", f"p_{i}_y", f"p_{i}_z"]
    cols += [f"ze_{k}" for k in range(1, m + 1)]
    cols += ["V1", "V", "gate", "bound"]
    return ",".join(cols)


def emit_csv(log, path):
    """Write the full trajectory log; lossless for all stored floats."""
    n = log.scenario.graph.n
    m = log.scenario.graph.m
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_header(n, m) + "\n")
        for s in range(log.n_samples):
            row = [_fmt(log.t[s])]
            row += [_fmt(x) for x in log.p[s].reshape(-1)]
            row += [_fmt(x) for x in log.z_e[s]]
            row += [_fmt(log.V1[s]), _fmt(log.V[s])]
            row.append("1" if log.gate[s] else "0")
            row.append(_fmt(log.bound[s]))
            fh.write(",".join(row) + "\n")


def read_csv_log(path):
    """Parse a log CSV back into arrays (inverse of :func:`emit_csv`)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(x) for x in row] for row in rows])
    n = sum(1 for c in header if c.endswith("_x"))
    m = sum(1 for c in header if c.startswith("ze_"))
    out = {
        "header": header,
        "t": data[:, 0],
        "p": data[:, 1:1 + 3 * n].reshape(-1, n, 3),
        "z_e": data[:, 1 + 3 * n:1 + 3 * n + m],
        "V1": data[:, -4],
        "V": data[:, -3],
        "gate": data[:, -2].astype(bool),
        "bound": data[:, -1],
    }
    return out


def emit_plot_data(log, directory, stem=None):
    """One CSV per figure: agent trajectories, and error components vs t."""
    import os

    stem = stem or log.scenario.name
    n = log.scenario.graph.n
    m = log.scenario.graph.m
    traj_path = os.path.join(directory, f"{stem}_trajectories.csv")
    with open(traj_path, "w", encoding="utf-8", newline="\n") as fh:
        cols = ["t"]
        for i in range(1, n + 1):
            cols += [f"p_{i}_x", f"p_{i}_y", f"p_{i}_z"]
        fh.write(",".join(cols) + "\n")
        for s in range(log.n_samples):
            fh.write(",".join([_fmt(log.t[s])] + [_fmt(x) for x in log.p[s].reshape(-1)]) + "\n")

    err_path = os.path.join(directory, f"{stem}_errors.csv")
    ze_norm = log.ze_norm()
    with open(err_path, "w", encoding="utf-8", newline="\n") as fh:
        cols = ["t"] + [f"ze_{k}" for k in range(1, m + 1)] + ["ze_norm"]
        fh.write(",".join(cols) + "\n")
        for s in range(log.n_samples):
            fh.write(",".join([_fmt(log.t[s])] + [_fmt(x) for x in log.z_e[s]] + [_fmt(ze_norm[s])]) + "\n")
    return traj_path, err_path


def emit_summary(log, consts=None, report=None):
    """Plain-text digest of a finished run."""
    scenario = log.scenario
    lines = []
    add = lines.append
    ze = log.ze_norm()
    add(f"scenario           : {scenario.name}")
    add(f"mode               : {scenario.params.mode.value}, rho = {scenario.params.rho:g} m")
    add(f"agents             : n = {scenario.graph.n} ({scenario.graph.n_leaders} leaders), edges = {scenario.graph.m}")
    add(f"gains              : kp = {scenario.gains.kp:g}, ke = {scenario.gains.ke:g}, alpha = {scenario.gains.alpha:g}")
    add(f"integrator         : {scenario.integrator}, dt = {scenario.dt:g} s, t_end = {scenario.t_end:g} s, stride = {scenario.sample_stride}")
    add(f"samples            : {log.n_samples}")
    add(f"|z_e| initial/final: {ze[0]:.6e} -> {ze[-1]:.6e}")
    add(f"V initial/final    : {log.V[0]:.6e} -> {log.V[-1]:.6e}")
    dV = np.diff(log.V)
    add(f"V monotonicity     : max increase between samples = {dV.max() if dV.size else 0.0:.3e}")
    add(f"gate-true samples  : {int(np.count_nonzero(log.gate))} / {log.n_samples}")
    for eps in (1e-1, 1e-2):
        tc = analysis.convergence_time(log, eps)
        add(f"settling |z_e|<{eps:g} : " + (f"{tc:.3f} s" if tc is not None else "not reached"))
    targets = scenario.omega_global - scenario.v_star[None, :]
    est_err = np.linalg.norm(log.est_global[-1] - targets, axis=1)
    if est_err.size:
        add(f"estimate error     : max over followers |w_hat - (omega - v*)| = {est_err.max():.6e}")
    if report is not None:
        add(f"rigidity (desired) : rank {report.rank}/{report.required_rank} "
            f"({'rigid' if report.rigid else 'NOT rigid'}), lambda+ = {report.lambda_plus:.6g}")
    if consts is not None:
        add(f"certificate (desired configuration):")
        add(f"  lambda+ = {consts.lambda_plus:.6g}, |HM| = {consts.hm_norm:.6g}")
        add(f"  gate_coeff = {consts.gate_coeff:.6g}, decay_coeff = {consts.decay_coeff:.6g}")
    return "\n".join(lines)
