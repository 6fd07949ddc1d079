"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all beaconsim errors."""


class ConfigurationError(SimulationError):
    """A scenario or topology parameter is inconsistent or out of range."""


class TraceParseError(SimulationError):
    """A trace or RSU file row could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateStateError(TraceParseError):
    """Two rows describe the same (vehicle_id, time) pair."""


class BoundsError(TraceParseError):
    """A position lies outside the declared trace bounds."""


class DomainError(SimulationError):
    """An input value is outside the mathematical domain (e.g. non-finite)."""


class MissingDelayError(SimulationError):
    """A delay-file lookup failed under the strict policy."""


class RoutingError(SimulationError):
    """No path exists between two switches (graph corruption guard)."""
