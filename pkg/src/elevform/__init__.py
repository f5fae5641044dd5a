"""Bearing-only elevation-angle formation control.

Simulation engine for leader-follower single-integrator formations driven
by a finite-time, disturbance-rejecting control law that senses nothing
but bearings in each follower's own frame, plus the rigidity theory and
trajectory analysis needed to audit a run.

The closed-loop integration runs on a compiled kernel when available and
on a numpy fallback otherwise; see ``elevform.backend_info()``.
"""

from ._backend import DEFAULT_BACKEND, HAVE_COMPILED
from .analysis import (
    FtissConstants,
    RigidityReport,
    convergence_time,
    formation_error,
    ftiss_constants,
    ftiss_gate_and_bound,
    lyapunov,
    realize_configuration,
    rigidity_report,
    smallest_positive_eigenvalue,
)
from .controller import ControlGains, LocalMeasurement, control_input, estimator_derivative, sig
from .elevation import (
    ElevationParams,
    Mode,
    RigidityResult,
    elevation_f_2d_from_bearings,
    elevation_f_2d_from_distance,
    elevation_f_3d_from_bearings,
    elevation_f_3d_from_distance,
    elevation_function,
    is_infinitesimally_rigid,
    rigidity_matrix,
    tangent_bearings_3d,
)
from .engine import (
    Scenario,
    SimState,
    TrajectoryLog,
    final_follower_velocities,
    follower_derivative,
    leader_derivative,
    run,
    step,
    total_disturbance_target,
)
from .errors import (
    BallsOverlapError,
    CoincidentAgentsError,
    DegenerateAngleError,
    DimensionMismatchError,
    DisconnectedGraphError,
    ElevformError,
    EmptyNeighborhoodError,
    GeometryError,
    GeometryFault,
    NoPositiveEigenvalueError,
    NonPositiveDistanceError,
    NotOrthogonalError,
    NotProperRotationError,
    ParseError,
    RigidityCheckFailed,
    UnknownVertexError,
    ValidationError,
)
from .frames import AgentFrame, bearing, from_local, rot_z, rotation_from_axis_angle, to_local, validate_rotation
from .graphs import FormationGraph, incidence_matrix, neighbors
from .output import emit_csv, emit_plot_data, emit_summary, read_csv_log
from .scenario_io import dumps_scenario, load_scenario, loads_scenario

__version__ = "0.1.0"


def backend_info():
    """Which integration backend import selected, and what is available."""
    return {"default": DEFAULT_BACKEND, "compiled_available": HAVE_COMPILED}
