"""
Exception hierarchy for curvedbody.

Every failure raised by the library derives from ``CurvedBodyError`` so the
command-line front end can map it to an exit code. Residual checks never
raise; they return numbers that reports compare against tolerances.
"""

from typing import List, Optional, Tuple


class CurvedBodyError(Exception):
    """Base class for all library errors."""


# geometry

class SingularPoint(CurvedBodyError):
    """Point lies on (or within the margin of) an excluded chart locus."""


class BadParams(CurvedBodyError, ValueError):
    """Invalid physical or chart parameters."""


class NumericalDifferentiationFailure(CurvedBodyError):
    """Finite-difference step underflowed or produced non-finite values."""


DifferentiationFailure = NumericalDifferentiationFailure


class DimensionMismatch(CurvedBodyError, ValueError):
    """Array shapes disagree with the chart or scenario dimension."""


class UnsupportedChart(CurvedBodyError):
    """Operation is not available for the requested chart."""


# frames

class SingularFrame(CurvedBodyError):
    """Frame legs are not invertible at the point."""


class SingularPhi(CurvedBodyError):
    """Internal configuration matrix is singular."""


# dynamics

class SingularMetric(CurvedBodyError):
    """Configuration metric is not invertible."""


class UnsupportedForce(CurvedBodyError):
    """Force model is not derived from a potential."""


class IncompatibleMode(CurvedBodyError):
    """Requested constraint modes cannot be combined."""


class StepIntoSingularity(CurvedBodyError):
    """
    Integration reached the singular-locus margin.

    Attributes:
        trajectory: The partial trajectory computed before the failing step.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


# action-angle

class NoClassicalRegion(CurvedBodyError):
    """Momentum integrand is non-positive on the whole search interval."""


class UnboundedMotion(CurvedBodyError):
    """Momentum integrand stays positive at an open end of the interval."""


class QuadratureFailure(CurvedBodyError):
    """Action quadrature did not converge."""


class OutOfRegime(CurvedBodyError):
    """Closed-form expression evaluated outside its region of validity."""


class BracketFailure(CurvedBodyError):
    """Root bracket for an energy or separation constant could not be found."""


# cli

class ConfigError(CurvedBodyError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """
    Configuration file is not well-formed.

    Attributes:
        line (Optional[int]): 1-based line of the problem, when known
        column (Optional[int]): 1-based column of the problem, when known
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class ValidationError(ConfigError):
    """
    Configuration is well-formed but violates the scenario rules.

    Attributes:
        problems (List[Tuple[str, str]]): every (field, reason) pair found
    """

    def __init__(self, problems: List[Tuple[str, str]]):
        self.problems = list(problems)
        text = "; ".join(f"{field}: {reason}" for field, reason in self.problems)
        super().__init__(f"invalid configuration: {text}")


class ToleranceBreach(CurvedBodyError):
    """A declared tolerance was exceeded."""


class IoError(CurvedBodyError):
    """Writing an artifact failed."""
