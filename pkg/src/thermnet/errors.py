"""Exception hierarchy shared by all thermnet modules."""


class ThermalModelError(Exception):
    """Base class for all model and file errors raised by thermnet."""


class InvalidNetworkError(ThermalModelError):
    """The network violates a structural invariant (see validate())."""


class SingularSystemError(ThermalModelError):
    """The stiffness matrix has no inverse: no resistive path to ground."""


class DegenerateNetworkError(ThermalModelError):
    """A cluster of zero-capacity nodes has no resistive path out."""


class UnknownOutputNodeError(ThermalModelError):
    """The requested output node is not part of the network."""


class DimensionTooLargeError(ThermalModelError):
    """State dimension exceeds the guard for the characteristic-polynomial recursion."""


class PoleEvaluationError(ThermalModelError):
    """Rational function evaluated at (numerically) a pole."""


class PoleAtZeroError(ThermalModelError):
    """DC gain requested for a rational function with a pole at s = 0."""


class ZeroHvacPathError(ThermalModelError):
    """The selected HVAC channel has an identically zero transfer entry."""


class InsufficientOrderError(ThermalModelError):
    """Regularization order too low to make the rational function proper."""


class UnstableStepError(ThermalModelError):
    """Explicit integration refused: the time step exceeds the stability bound."""


class ScheduleError(ThermalModelError):
    """An input schedule is malformed or references unknown channels."""


class NetworkParseError(ThermalModelError):
    """Base class for network-file errors; carries the source line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class NetSyntaxError(NetworkParseError):
    """A directive does not match the network-file grammar."""


class UnknownNodeError(NetworkParseError):
    """A directive references a node that is never declared."""


class DuplicateNameError(NetworkParseError):
    """A node, branch, or source name is declared twice."""


class MissingOutputError(NetworkParseError):
    """The network file has no `output` directive."""

    def __init__(self, message: str = "missing `output` directive"):
        super().__init__(0, message)


class GroundWithoutSourceError(NetworkParseError):
    """A ground branch lacks the temperature source it needs."""
