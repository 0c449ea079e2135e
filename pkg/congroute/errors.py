# errors.py - Exception hierarchy and exit codes for congroute
from typing import Any, Optional

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_STOCHASTIC = 3
EXIT_MALFORMED = 4


class RoutingError(Exception):
    """Base class for every error raised by the routing pipeline"""

    exit_code = EXIT_VERIFICATION

    def __init__(self, message: str, stage: Optional[str] = None, **details: Any):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.details = details

    def with_stage(self, stage: str) -> "RoutingError":
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self) -> str:
        prefix = f"[{self.stage}] " if self.stage else ""
        return f"{prefix}{self.message}"


class MalformedInputError(RoutingError):
    exit_code = EXIT_MALFORMED


class PreconditionError(RoutingError):
    exit_code = EXIT_MALFORMED


class DegenerateCutError(PreconditionError):
    """A sparsity query where one side carries zero weight"""


class OracleTooLargeError(RoutingError):
    exit_code = EXIT_MALFORMED


class ContractViolationError(RoutingError):
    """The cut oracle returned something that is not a violating cut"""


class InvariantViolation(RoutingError):
    pass


class VerificationFailure(InvariantViolation):
    def __init__(self, message: str, stage: Optional[str] = "verify", edge_id: Optional[int] = None, **details: Any):
        super().__init__(message, stage, edge_id=edge_id, **details)
        self.edge_id = edge_id


class StochasticFailure(RoutingError):
    exit_code = EXIT_STOCHASTIC


class ParameterDegeneracyError(RoutingError):
    """Instance too small for the construction; the caller falls back to a single pair"""

    exit_code = EXIT_STOCHASTIC


class RouteEscalation(RoutingError):
    """A routing primitive inside a good set failed; carries the separating cut"""

    exit_code = EXIT_STOCHASTIC

    def __init__(self, message: str, stage: Optional[str] = None, cluster: Optional[frozenset] = None,
                 cut: Optional[frozenset] = None, **details: Any):
        super().__init__(message, stage, **details)
        self.cluster = cluster
        self.cut = cut


__all__ = [
    "EXIT_OK",
    "EXIT_VERIFICATION",
    "EXIT_STOCHASTIC",
    "EXIT_MALFORMED",
    "RoutingError",
    "MalformedInputError",
    "PreconditionError",
    "DegenerateCutError",
    "OracleTooLargeError",
    "ContractViolationError",
    "InvariantViolation",
    "VerificationFailure",
    "StochasticFailure",
    "ParameterDegeneracyError",
    "RouteEscalation",
]
