from __future__ import annotations

from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_HYPOTHESIS = 2
EXIT_USAGE = 3


class PhBlochError(Exception):
    """
    Root of every error raised by the toolkit.

    `code` is a stable snake_case identifier; `context` is embedded verbatim
    in CLI reports so failures keep their provenance.
    """

    code: str = "ph_bloch_error"
    exit_code: int = EXIT_USAGE

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = dict(context)

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "context": self.context}


# --- usage / input errors (exit 3) ---


class UsageError(PhBlochError):
    code = "usage_error"


class SpecParseError(UsageError):
    code = "spec_parse_error"


class SpecValidationError(UsageError):
    code = "spec_validation_error"


class DimensionMismatch(UsageError):
    code = "dimension_mismatch"


class DegreeCapExceeded(UsageError):
    code = "degree_cap_exceeded"


class PreconditionViolated(UsageError):
    code = "precondition_violated"


class DomainError(UsageError):
    code = "domain_error"


class NonFiniteInput(UsageError):
    code = "non_finite_input"


# --- numerical / internal errors (exit 3) ---


class NumericalError(PhBlochError):
    code = "numerical_error"


class IntegrandNonFinite(NumericalError):
    code = "integrand_non_finite"


class InternalConsistencyError(NumericalError):
    code = "internal_consistency"


# --- hypothesis failures (exit 2) ---


class HypothesisViolated(PhBlochError):
    code = "hypothesis_violated"
    exit_code = EXIT_HYPOTHESIS

    def __init__(
        self,
        message: str,
        *,
        stage: Optional[str] = None,
        witness: Optional[Any] = None,
        **context: Any,
    ) -> None:
        super().__init__(message, **context)
        self.stage = stage
        self.witness = witness

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["stage"] = self.stage
        data["witness"] = self.witness
        return data


class Singular(HypothesisViolated):
    code = "singular"


class DhSingular(Singular):
    code = "dh_singular"


class NotApplicable(HypothesisViolated):
    code = "not_applicable"


class NotACollision(HypothesisViolated):
    code = "not_a_collision"


class Case1Unsupported(HypothesisViolated):
    code = "case1_unsupported"


class DegenerateDenominator(HypothesisViolated):
    code = "degenerate_denominator"


class GraphDisconnected(HypothesisViolated):
    code = "graph_disconnected"
