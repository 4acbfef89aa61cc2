import traceback
from collections.abc import Sequence
from pathlib import Path


class BecprobeError(Exception):
    """Base exception for becprobe errors."""

    def __init__(self, message: str, *, hints: Sequence[str] | None = None):
        super().__init__(message)
        self.hints = list(hints or [])

    def _format_hints(self) -> str:
        if not self.hints:
            return ""
        lines = ["", "Hints:"]
        lines.extend([f"  - {hint}" for hint in self.hints])
        return "\n".join(lines)

    def __str__(self) -> str:
        return super().__str__() + self._format_hints()


class ConfigValidationError(BecprobeError):
    """Raised when a configuration fails schema or physics validation."""

    def __init__(
        self,
        message: str,
        *,
        issues: Sequence[tuple[str, str]] = (),
        hints: Sequence[str] | None = None,
    ):
        super().__init__(message, hints=hints)
        self.issues = list(issues)

    def __str__(self) -> str:
        msg = Exception.__str__(self)
        for field, problem in self.issues:
            msg += f"\n  {field}: {problem}"
        return msg + self._format_hints()


class ScheduleError(ConfigValidationError):
    """Raised for inconsistent probe schedules (e.g. overlapping pulses)."""


class NumericalError(BecprobeError):
    """Base class for failures of the numerical pipeline."""


class ConvergenceError(NumericalError):
    """Raised when an iterative solver stops before reaching its tolerance."""

    def __init__(
        self,
        message: str,
        *,
        residual: float,
        iterations: int,
        hints: Sequence[str] | None = None,
    ):
        super().__init__(message, hints=hints)
        self.residual = residual
        self.iterations = iterations

    def __str__(self) -> str:
        msg = Exception.__str__(self)
        msg += f"\n  final residual: {self.residual:.3e} after {self.iterations} iterations"
        return msg + self._format_hints()


class GridResolutionError(NumericalError):
    """Raised when the spatial grid cannot represent the requested solution."""

    def __init__(
        self,
        message: str,
        *,
        max_safe_modes: int | None = None,
        hints: Sequence[str] | None = None,
    ):
        super().__init__(message, hints=hints)
        self.max_safe_modes = max_safe_modes


class FiniteDifferenceError(NumericalError):
    """Raised when a finite-difference derivative is not stable under step halving."""


class PhysicalityError(NumericalError):
    """Raised when a covariance matrix violates the uncertainty principle."""

    def __init__(
        self,
        message: str,
        *,
        time: float | None = None,
        min_symplectic_eigenvalue: float | None = None,
        hints: Sequence[str] | None = None,
    ):
        super().__init__(message, hints=hints)
        self.time = time
        self.min_symplectic_eigenvalue = min_symplectic_eigenvalue


class ConditioningError(NumericalError):
    """Raised when a pseudoinverse is numerically rank-unstable."""


class AliasingError(NumericalError):
    """Raised when a Fourier transform is not resolved by the grid."""


class StepSizeError(NumericalError):
    """Raised when an integrator step is far beyond its accuracy bound."""


class ExperimentError(BecprobeError):
    """Raised when an experiment run fails."""

    def __init__(
        self,
        message: str,
        run_dir: Path,
        original_error: Exception | None = None,
        *,
        recorded_traceback: str | None = None,
        hints: Sequence[str] | None = None,
    ):
        super().__init__(message, hints=hints)
        self.run_dir = run_dir
        self.original_error = original_error
        self.recorded_traceback = recorded_traceback

    def __str__(self) -> str:
        msg = Exception.__str__(self)
        msg += f"\n\nRun dir: {self.run_dir}"

        if self.original_error:
            msg += f"\n\nOriginal error: {self.original_error}"
            if self.recorded_traceback:
                msg += f"\n\nRecorded traceback:\n{self.recorded_traceback}"
            elif self.original_error.__traceback__ is not None:
                tb = "".join(
                    traceback.format_exception(
                        type(self.original_error),
                        self.original_error,
                        self.original_error.__traceback__,
                    )
                )
                msg += f"\n\nTraceback:\n{tb}"
        return msg + self._format_hints()

    @property
    def exit_code(self) -> int:
        return exit_code_for(self.original_error) if self.original_error else 1


def exit_code_for(error: BaseException) -> int:
    """CLI exit code for an error: 2 for validation, 3 for numerical failures."""
    if isinstance(error, ExperimentError):
        return error.exit_code
    if isinstance(error, ConfigValidationError):
        return 2
    if isinstance(error, NumericalError):
        return 3
    return 1
