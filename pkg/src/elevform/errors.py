"""Exception hierarchy for geometry, graph, and configuration failures."""


class ElevformError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(ElevformError):
    """Base class for errors caused by degenerate or invalid geometry."""


class NotOrthogonalError(GeometryError):
    """Matrix is not orthogonal within tolerance."""


class NotProperRotationError(GeometryError):
    """Matrix is orthogonal but has determinant -1 (a reflection)."""


class CoincidentAgentsError(GeometryError):
    """Two agents are closer than the coincidence threshold."""


class BallsOverlapError(GeometryError):
    """Agent separation does not exceed twice the ball radius."""


class DegenerateAngleError(GeometryError):
    """Bearing inner product too close to +/-1 for a stable angle."""


class NonPositiveDistanceError(GeometryError):
    """A distance or rod height that must be positive is not."""


class EmptyNeighborhoodError(ElevformError):
    """Control law evaluated for an agent with no neighbors."""


class UnknownVertexError(ElevformError):
    """Vertex id outside the graph's vertex set."""


class DisconnectedGraphError(ElevformError):
    """Sensing graph is not connected."""


class DimensionMismatchError(ElevformError):
    """Vectors that must have equal length do not."""


class NoPositiveEigenvalueError(ElevformError):
    """All eigenvalues below tolerance; formation is degenerate."""


class GeometryFault(ElevformError):
    """Geometric failure (coincidence/overlap) hit during integration.

    Carries the simulation time and the 1-based edge index at which the
    failure occurred.
    """

    def __init__(self, message, t=None, edge=None):
        super().__init__(message)
        self.t = t
        self.edge = edge


class ParseError(ElevformError):
    """Scenario file could not be parsed; carries field/line context."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ValidationError(ElevformError):
    """One or more scenario invariants violated.

    ``violations`` lists every failed check so a bad file is reported in
    one pass.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class RigidityCheckFailed(ValidationError):
    """Desired formation is not infinitesimally rigid (or not realizable)."""
