"""
Error types for the maxbandit toolkit.

Every failure the CLI or the MCP tools can surface derives from MaxBanditError,
which carries a short machine-readable code, a human-readable description and the
process exit code the CLI should use.
"""

from typing import Optional


EXIT_OK = 0
EXIT_FAILED_VERDICT = 1
EXIT_USAGE = 2


class MaxBanditError(Exception):
    """Base exception for maxbandit errors."""

    def __init__(self, error_code: str, description: str, exit_code: int = EXIT_USAGE):
        self.error_code = error_code
        self.description = description
        self.exit_code = exit_code
        super().__init__(f"{error_code}: {description}")


class ParameterError(MaxBanditError, ValueError):
    """Invalid tail constants, accuracy/confidence pair or call argument."""

    def __init__(self, description: str, field: Optional[str] = None):
        if field:
            description = f"Invalid {field}: {description}"
        super().__init__("invalid_parameter", description, EXIT_USAGE)


class InstanceFileError(MaxBanditError):
    """Malformed or unreadable instance description."""

    def __init__(self, description: str, path: Optional[str] = None):
        if path:
            description = f"{path}: {description}"
        super().__init__("invalid_instance", description, EXIT_USAGE)


class AssumptionViolationError(MaxBanditError):
    """An arm does not satisfy the tail assumption for the instance's constants."""

    def __init__(self, arm_index: int, eps: float, tail_mass: float, required: float):
        self.arm_index = arm_index
        self.eps = eps
        self.tail_mass = tail_mass
        self.required = required
        super().__init__(
            "assumption_violated",
            f"arm {arm_index + 1} has tail mass {tail_mass:.6g} < {required:.6g} at eps={eps:.6g}",
            EXIT_USAGE,
        )


class UnsupportedVariantError(MaxBanditError):
    """The distribution variant cannot be used for the requested operation."""

    def __init__(self, description: str):
        super().__init__("unsupported_variant", description, EXIT_USAGE)


class PreconditionError(MaxBanditError):
    """A lower-bound construction was requested outside its validity region."""

    def __init__(self, description: str):
        super().__init__("precondition_failed", description, EXIT_USAGE)


class SampleBudgetError(MaxBanditError):
    """A run needs more samples than the configured budget (or a 64-bit counter) allows."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            "sample_budget_exceeded",
            f"run requires exactly {required} samples, budget is {budget}",
            EXIT_USAGE,
        )


class PhaseLimitError(MaxBanditError):
    """Maximal Eliminator ran past its phase cap."""

    def __init__(self, max_phases: int, radius: float, eps: float):
        super().__init__(
            "phase_limit",
            f"no stop after {max_phases} phases (confidence radius {radius:.6g} >= eps {eps:.6g})",
            EXIT_FAILED_VERDICT,
        )


class TrialExecutionError(MaxBanditError):
    """A Monte-Carlo trial failed; completed trials were written to partial_path."""

    def __init__(self, trial: int, cause: str, partial_path: Optional[str] = None):
        self.trial = trial
        self.partial_path = partial_path
        description = f"trial {trial} failed: {cause}"
        if partial_path:
            description += f" (partial results in {partial_path})"
        super().__init__("trial_failed", description, EXIT_FAILED_VERDICT)


class ResultsWriteError(MaxBanditError):
    """Writing a report failed."""

    def __init__(self, path: str, cause: str):
        self.path = path
        super().__init__("write_failed", f"cannot write '{path}': {cause}", EXIT_FAILED_VERDICT)
