"""Errors raised by the toolkit.

Every class carries the process exit code used by the command line and a
short ``reason`` slug printed as ``error[<reason>]: <message>``.
"""


class RibbonScreenError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1
    reason = "error"


class ParseError(RibbonScreenError):
    exit_code = 1
    reason = "parse"


class GridParseError(ParseError):
    """Malformed grid text or a grid violating its invariants."""

    reason = "grid-parse"


class MatrixParseError(ParseError):
    reason = "matrix-parse"


class NotAKnotError(ParseError):
    """The grid presents a link with more than one component."""

    reason = "not-a-knot"


class CeilingExceededError(RibbonScreenError):
    exit_code = 2
    reason = "ceiling"


class ConsistencyError(RibbonScreenError):
    """Internal self-check failed: nonzero square of the differential,
    inexact deconvolution, asymmetric Euler characteristic."""

    exit_code = 3
    reason = "consistency"


class DilatationError(ConsistencyError):
    """Power iteration or the trace limit did not converge."""

    reason = "convergence"


class NonPrimitiveMatrixError(RibbonScreenError):
    exit_code = 4
    reason = "non-primitive"


class MissingTargetError(RibbonScreenError):
    exit_code = 5
    reason = "missing-target"


class DatabaseError(RibbonScreenError):
    exit_code = 6
    reason = "database"


class InconsistentRecordError(DatabaseError):
    reason = "inconsistent-record"


class BoundParameterError(RibbonScreenError):
    exit_code = 7
    reason = "bound-parameters"


class ConfigurationError(RibbonScreenError):
    exit_code = 8
    reason = "configuration"
