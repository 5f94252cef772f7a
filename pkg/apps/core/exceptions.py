# apps/core/exceptions.py
"""Exception hierarchy shared by every headwave package.

Each family carries the CLI exit code it maps to.
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class ErrorResponse(BaseModel):
    """Error payload printed by the CLI and attached to logs."""
    success: bool = Field(False, description="Always false for error responses")
    error: str = Field(..., description="Error type")
    message: str = Field(..., description="Detailed error message")
    exit_code: int = Field(..., description="Process exit code for this error")
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error details")


class HeadwaveError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 4

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__
        self.details: Dict[str, Any] = details

    def to_response(self) -> ErrorResponse:
        return ErrorResponse(
            error=self.__class__.__name__,
            message=self.message,
            exit_code=self.exit_code,
            details=self.details or None,
        )

    def __str__(self) -> str:
        if not self.details:
            return self.message
        extras = ", ".join(f"{k}={v}" for k, v in self.details.items())
        return f"{self.message} ({extras})"


class VerificationFailed(HeadwaveError):
    exit_code = 1


class ConfigError(HeadwaveError):
    exit_code = 2


# Scene / assumption failures

class SceneError(HeadwaveError):
    exit_code = 3


class SceneIllFormed(SceneError):
    pass


class LatticeTooCoarse(SceneError):
    pass


class AssumptionViolation(SceneError):
    """Raised when a validated scene fails an assumption check."""

    def __init__(self, message: str = "", report: Any = None, **details: Any):
        super().__init__(message, **details)
        self.report = report


class OutsideTube(SceneError):
    pass


class NewtonDivergence(SceneError):
    pass


class LegExitsTube(SceneError):
    pass


# Numerical failures

class NumericalError(HeadwaveError):
    exit_code = 4


class QuadratureNonConvergence(NumericalError):
    pass


class InsufficientGrid(NumericalError):
    pass


class SingularCoefficient(NumericalError):
    pass


class NonMonotoneGamma1(NumericalError):
    """γ1 is not monotone; the raw (γ1, f̃) pairs are attached as `recon`."""

    def __init__(self, message: str = "", recon: Any = None, **details: Any):
        super().__init__(message, **details)
        self.recon = recon


class NoLimit(NumericalError):
    pass


class ZeroC(NumericalError):
    pass


class MissingLineIntegral(NumericalError):
    pass


class NodeEvaluationError(NumericalError):
    pass


class HashMismatch(HeadwaveError):
    exit_code = 5


class DegenerateDenominator(HeadwaveError):
    exit_code = 6


# Gauge construction / verification

class GaugeError(HeadwaveError):
    exit_code = 7


class BoundaryNonvanishing(GaugeError):
    pass


class NotNull(GaugeError):
    pass


class NotClosed(GaugeError):
    pass


class DivConditionViolated(GaugeError):
    pass


class SingularFrame(GaugeError):
    pass


class ExtensionNotStraight(GaugeError):
    pass


class HConditionViolated(GaugeError):
    pass


class ResidualExceeded(GaugeError):
    pass


# Expression language

class ExprError(HeadwaveError):
    exit_code = 2


class ExprSyntaxError(ExprError):
    def __init__(self, message: str = "", offset: int = 0, expected: Any = (), **details: Any):
        expected = tuple(sorted(set(expected)))
        super().__init__(message or "syntax error", offset=offset, expected=list(expected), **details)
        self.offset = offset
        self.expected = expected


class UnknownFunction(ExprError):
    def __init__(self, name: str, **details: Any):
        super().__init__(f"unknown function '{name}'", name=name, **details)
        self.name = name


class UnknownVariable(ExprError):
    def __init__(self, name: str, **details: Any):
        super().__init__(f"unknown variable '{name}'", name=name, **details)
        self.name = name


class NonDifferentiable(ExprError):
    def __init__(self, op: str, **details: Any):
        super().__init__(f"'{op}' is not differentiable", op=op, **details)
        self.op = op


class DomainError(NumericalError):
    def __init__(self, op: str, operand: Any = None, **details: Any):
        super().__init__(f"domain error in '{op}'", op=op, operand=operand, **details)
        self.op = op
        self.operand = operand
