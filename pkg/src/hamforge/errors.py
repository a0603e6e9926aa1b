"""Shared exception types for the hamforge engine."""

from __future__ import annotations


class HamforgeError(Exception):
    """Base class for all engine errors."""


class UnsupportedExpression(HamforgeError):
    """Raised when an operation is asked to act outside its supported scope."""


class NonInvertibleMode(HamforgeError):
    """Raised when the formal inverse Laplacian is applied to a constant mode."""


class SingularKernelMatrix(HamforgeError):
    """Raised when elimination meets a structurally singular kernel matrix.

    Carries the discovered null-space basis so callers can report which
    combination of rows is degenerate.
    """

    def __init__(self, message, null_space=None):
        super().__init__(message)
        self.null_space = null_space or []


class NonUnitDeterminant(HamforgeError):
    """Raised when a kernel matrix has a nonzero determinant that is not
    invertible in the operator ring."""


class IncompleteGaugeError(HamforgeError):
    """Raised when gauge conditions leave the constraint matrix singular."""

    def __init__(self, message, null_space=None):
        super().__init__(message)
        self.null_space = null_space or []


class ParseError(HamforgeError):
    """Raised on invalid theory source; carries line and column."""

    def __init__(self, message, line=None, col=None):
        loc = "" if line is None else f" at line {line}, col {col}"
        super().__init__(message + loc)
        self.line = line
        self.col = col


class ConsistencyError(HamforgeError):
    """Raised when the constraint-consistency loop cannot terminate."""


class LatticeResidualError(HamforgeError):
    """Raised when a numerical certification exceeds its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
