"""Scenario files: INI-style sections parsed into Scenario records.

Format (auto-generated files use 17-significant-digit floats)::

    [formation]
    dimension = 3            ; 2 or 3
    rho = 0.25               ; rod height (2D) or ball radius (3D), meters
    n = 4
    n_leaders = 2
    edges =                  ; one "i j" pair per line, 1-based vertex ids
        1 2
        1 3
    desired_distances = 1 1  ; meters, one per edge, edge order

    [gains]
    kp = 0.5
    ke = 0.1
    alpha = 0.5

    [initial]
    p1 = -0.5 0 0            ; global positions, meters
    p2 = 0.5 0 0
    frame2 = 1.57 0 0 1 0 0 0  ; optional: angle axis(3) translation(3)

    [disturbance]
    frame = global           ; or local
    w3 = 2 2 2               ; one triple per follower, m/s

    [leaders]
    v_star = 0 0 0           ; m/s

    [sim]
    dt = 0.001
    t_end = 30
    integrator = rk4         ; or euler
    sample_stride = 10

Parsing failures raise ParseError with the offending field; semantic
problems are collected and raised together as ValidationError.  Loading
also realizes the desired distances and verifies infinitesimal rigidity.
"""

import configparser
import io

import numpy as np

from . import analysis
from .controller import ControlGains
from .elevation import ElevationParams, Mode
from .engine import Scenario
from .errors import ParseError, ValidationError
from .frames import AgentFrame, rotation_from_axis_angle
from .graphs import FormationGraph

_REQUIRED = {
    "formation": ("dimension", "rho", "n", "n_leaders", "edges", "desired_distances"),
    "gains": ("kp", "ke", "alpha"),
}


def _parse_floats(text, field, count=None):
    parts = text.split()
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError(f"{field}: expected numbers, got {text!r}", field=field) from exc
    if count is not None and len(values) != count:
        raise ParseError(f"{field}: expected {count} numbers, got {len(values)}", field=field)
    return np.array(values)


def _parse_int(text, field):
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"{field}: expected an integer, got {text!r}", field=field) from exc


def _parse_float(text, field):
    try:
        return float(text)
    except ValueError as exc:
        raise ParseError(f"{field}: expected a number, got {text!r}", field=field) from exc


def _parse_edges(text, field):
    edges = []
    for line in text.strip().splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ParseError(f"{field}: each edge line needs two vertex ids, got {line!r}", field=field)
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParseError(f"{field}: vertex ids must be integers, got {line!r}", field=field) from exc
    if not edges:
        raise ParseError(f"{field}: no edges given", field=field)
    return edges


def _read_config(text):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"bad scenario syntax: {exc}") from None
    return cp


def loads_scenario(text, name="scenario", check_rigidity=True):
    """Parse scenario text; see :func:`load_scenario`."""
    cp = _read_config(text)
    for section, keys in _REQUIRED.items():
        if not cp.has_section(section):
            raise ParseError(f"missing [{section}] section", field=section)
        for key in keys:
            if not cp.has_option(section, key):
                raise ParseError(f"missing {key} in [{section}]", field=f"{section}.{key}")

    dimension = _parse_int(cp["formation"]["dimension"], "formation.dimension")
    rho = _parse_float(cp["formation"]["rho"], "formation.rho")
    n = _parse_int(cp["formation"]["n"], "formation.n")
    n_leaders = _parse_int(cp["formation"]["n_leaders"], "formation.n_leaders")
    edges = _parse_edges(cp["formation"]["edges"], "formation.edges")
    desired = _parse_floats(cp["formation"]["desired_distances"], "formation.desired_distances")

    kp = _parse_float(cp["gains"]["kp"], "gains.kp")
    ke = _parse_float(cp["gains"]["ke"], "gains.ke")
    alpha = _parse_float(cp["gains"]["alpha"], "gains.alpha")

    problems = []
    if dimension not in (2, 3):
        problems.append(f"dimension must be 2 or 3, got {dimension}")

    if not cp.has_section("initial"):
        raise ParseError("missing [initial] section", field="initial")
    positions = np.zeros((max(n, 0), 3))
    for i in range(1, n + 1):
        key = f"p{i}"
        if not cp.has_option("initial", key):
            problems.append(f"missing initial position {key}")
            continue
        positions[i - 1] = _parse_floats(cp["initial"][key], f"initial.{key}", 3)

    frames = []
    frame_specs = []
    for i in range(1, n + 1):
        key = f"frame{i}"
        if cp.has_option("initial", key):
            vals = _parse_floats(cp["initial"][key], f"initial.{key}", 7)
            frame_specs.append(tuple(vals))
            try:
                rot = rotation_from_axis_angle(vals[1:4], vals[0])
                frames.append(AgentFrame(rot, vals[4:7]))
            except Exception as exc:
                problems.append(f"initial.{key}: {exc}")
                frames.append(AgentFrame())
        else:
            frame_specs.append(None)
            frames.append(AgentFrame())

    omega_frame = "global"
    n_followers = n - n_leaders
    omega = np.zeros((max(n_followers, 0), 3))
    if cp.has_section("disturbance"):
        omega_frame = cp["disturbance"].get("frame", "global").strip().lower()
        if omega_frame not in ("global", "local"):
            problems.append(f"disturbance.frame must be global or local, got {omega_frame!r}")
            omega_frame = "global"
        for idx, i in enumerate(range(n_leaders + 1, n + 1)):
            key = f"w{i}"
            if cp.has_option("disturbance", key):
                omega[idx] = _parse_floats(cp["disturbance"][key], f"disturbance.{key}", 3)

    v_star = np.zeros(3)
    if cp.has_section("leaders") and cp.has_option("leaders", "v_star"):
        v_star = _parse_floats(cp["leaders"]["v_star"], "leaders.v_star", 3)

    sim = cp["sim"] if cp.has_section("sim") else {}
    dt = _parse_float(sim.get("dt", "1e-3"), "sim.dt")
    t_end = _parse_float(sim.get("t_end", "30"), "sim.t_end")
    integrator = sim.get("integrator", "rk4").strip().lower()
    stride = _parse_int(sim.get("sample_stride", "10"), "sim.sample_stride")

    # pre-check the scalar invariants so every problem surfaces in one pass
    # (Scenario would catch them too, but only after the earlier raises)
    if dt <= 0:
        problems.append(f"dt must be positive, got {dt}")
    if t_end <= 0:
        problems.append(f"t_end must be positive, got {t_end}")
    if stride < 1:
        problems.append(f"sample_stride must be >= 1, got {stride}")
    if integrator not in ("euler", "rk4"):
        problems.append(f"integrator must be one of ['euler', 'rk4'], got {integrator!r}")
    if desired.size != len(edges):
        problems.append(f"need one desired distance per edge ({len(edges)}), got {desired.size}")
    elif np.any(desired <= 0):
        problems.append("desired distances must be positive")

    # build subobjects, pooling their complaints so one pass reports all
    graph = params = gains = None
    try:
        graph = FormationGraph(n, n_leaders, edges)
    except ValidationError as exc:
        problems.extend(exc.violations)
    except Exception as exc:
        problems.append(str(exc))
    try:
        params = ElevationParams(Mode.PLANAR_2D if dimension == 2 else Mode.SPATIAL_3D, rho)
    except Exception as exc:
        problems.append(str(exc))
    try:
        gains = ControlGains(kp, ke, alpha)
    except ValueError as exc:
        problems.extend(str(exc).split("; "))

    if dimension == 2:
        if np.any(positions[:, 2] != 0.0):
            problems.append("planar scenario: initial positions must have zero z")
        if v_star[2] != 0.0:
            problems.append("planar scenario: v_star must have zero z")
        z_hat = np.array([0.0, 0.0, 1.0])
        for i, fr in enumerate(frames, start=1):
            if np.max(np.abs(fr.rotation @ z_hat - z_hat)) > 1e-12:
                problems.append(f"planar scenario: frame{i} must rotate about the z axis")

    if problems or graph is None or params is None or gains is None:
        raise ValidationError(problems or ["invalid scenario"])

    scenario = Scenario(
        graph=graph, params=params, gains=gains,
        p0=positions.reshape(-1), desired_lengths=desired,
        omega=omega, omega_frame=omega_frame, v_star=v_star,
        frames=tuple(frames), dt=dt, t_end=t_end,
        integrator=integrator, sample_stride=stride, name=name,
        frame_specs=tuple(frame_specs),
    )

    if check_rigidity:
        analysis.check_desired_rigidity(scenario)
    return scenario


def load_scenario(path, check_rigidity=True):
    """Load and validate a scenario file.

    Raises ParseError on malformed input, ValidationError listing every
    violated invariant, or RigidityCheckFailed when the desired formation
    fails the rank test.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    name = str(path).rsplit("/", 1)[-1]
    if name.endswith(".cfg"):
        name = name[:-4]
    return loads_scenario(text, name=name, check_rigidity=check_rigidity)


def _fmt(x):
    return format(float(x), ".17g")


def _fmt_vec(v):
    return " ".join(_fmt(x) for x in v)


def dumps_scenario(scenario):
    """Canonical text form of a scenario; parses back to an equal record."""
    out = io.StringIO()
    graph, params = scenario.graph, scenario.params
    print("[formation]", file=out)
    print(f"dimension = {params.mode.dimension}", file=out)
    print(f"rho = {_fmt(params.rho)}", file=out)
    print(f"n = {graph.n}", file=out)
    print(f"n_leaders = {graph.n_leaders}", file=out)
    print("edges =", file=out)
    for i, j in graph.edges:
        print(f"    {i} {j}", file=out)
    print(f"desired_distances = {_fmt_vec(scenario.desired_lengths)}", file=out)
    print("", file=out)
    print("[gains]", file=out)
    print(f"kp = {_fmt(scenario.gains.kp)}", file=out)
    print(f"ke = {_fmt(scenario.gains.ke)}", file=out)
    print(f"alpha = {_fmt(scenario.gains.alpha)}", file=out)
    print("", file=out)
    print("[initial]", file=out)
    P = scenario.p0.reshape(-1, 3)
    for i in range(graph.n):
        print(f"p{i + 1} = {_fmt_vec(P[i])}", file=out)
    specs = scenario.frame_specs or (None,) * graph.n
    for i, (fr, spec) in enumerate(zip(scenario.frames, specs), start=1):
        if spec is None and fr.is_identity:
            continue
        if spec is None:
            angle, axis = _axis_angle_of(fr.rotation)
            spec = (angle, *axis, *fr.translation)
        print(f"frame{i} = {_fmt_vec(spec)}", file=out)
    print("", file=out)
    print("[disturbance]", file=out)
    print(f"frame = {scenario.omega_frame}", file=out)
    for idx, i in enumerate(graph.followers):
        print(f"w{i} = {_fmt_vec(scenario.omega[idx])}", file=out)
    print("", file=out)
    print("[leaders]", file=out)
    print(f"v_star = {_fmt_vec(scenario.v_star)}", file=out)
    print("", file=out)
    print("[sim]", file=out)
    print(f"dt = {_fmt(scenario.dt)}", file=out)
    print(f"t_end = {_fmt(scenario.t_end)}", file=out)
    print(f"integrator = {scenario.integrator}", file=out)
    print(f"sample_stride = {scenario.sample_stride}", file=out)
    return out.getvalue()


def _axis_angle_of(R):
    """Inverse of rotation_from_axis_angle, stable enough for echoing."""
    cos_angle = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(cos_angle))
    if angle < 1e-12:
        return 0.0, np.array([0.0, 0.0, 1.0])
    if np.pi - angle < 1e-9:
        # near-pi rotations: axis from the symmetric part
        B = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(B), 0.0, None))
        # fix signs from the off-diagonal entries
        if B[0, 1] < 0:
            axis[1] = -axis[1]
        if B[0, 2] < 0:
            axis[2] = -axis[2]
        if axis[0] == 0.0 and B[1, 2] < 0:
            axis[2] = -abs(axis[2])
        norm = np.linalg.norm(axis)
        return angle, axis / norm
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return angle, axis / (2.0 * np.sin(angle))
