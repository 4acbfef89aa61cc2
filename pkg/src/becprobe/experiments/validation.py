"""Schema and physics sanity checks of an experiment config, without running it."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..dynamics.covariance import STEP_FAIL, STEP_WARN
from ..errors import BecprobeError
from ..probe.couplings import COVERAGE_THRESHOLD
from ..probe.schedule import ScheduleSpec
from ..serialization import ConfigSerializer
from .base import Experiment, RunSpec, SystemConfig


class ValidationIssue(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    severity: Literal["error", "warning"]
    field: str
    message: str


class ValidationReport(BaseModel):
    """Findings for one config; `ok` when there are no errors (warnings allowed)."""

    model_config = ConfigDict(extra="forbid", strict=True)

    experiment: str
    config_hash: str
    issues: list[ValidationIssue] = []

    @property
    def errors(self) -> list[ValidationIssue]:
        return [issue for issue in self.issues if issue.severity == "error"]

    @property
    def warnings(self) -> list[ValidationIssue]:
        return [issue for issue in self.issues if issue.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def add(self, severity: Literal["error", "warning"], field: str, message: str) -> None:
        self.issues.append(ValidationIssue(severity=severity, field=field, message=message))


def _probe_strength(experiment: Experiment) -> float:
    spec = getattr(experiment, "schedule", None)
    if isinstance(spec, ScheduleSpec):
        return spec.strength
    return 1.0


def _physics_checks(
    report: ValidationReport,
    system: SystemConfig,
    timing: RunSpec | None,
    strength: float,
) -> None:
    try:
        basis, couplings = system.build()
    except BecprobeError as e:
        report.add("error", "system", str(e).splitlines()[0])
        return

    if timing is not None:
        rate = max(
            float(np.max(basis.frequencies, initial=0.0)),
            strength * float(np.max(np.diag(couplings.K2), initial=0.0)),
        )
        product = timing.dt * rate
        if product > STEP_FAIL:
            report.add(
                "error",
                "timing.dt",
                f"dt * max(omega_J, K2_max) = {product:.3g} exceeds {STEP_FAIL}; "
                f"use dt <= {STEP_WARN / rate:.3g}",
            )
        elif product > STEP_WARN:
            report.add(
                "warning",
                "timing.dt",
                f"dt * max(omega_J, K2_max) = {product:.3g} is above the accuracy bound "
                f"{STEP_WARN}; use dt <= {STEP_WARN / rate:.3g}",
            )

    for label, covered in zip(couplings.labels, couplings.coverage):
        if covered < COVERAGE_THRESHOLD:
            report.add(
                "warning",
                "system.probe.detector_half_width",
                f"detector pixels cover {covered:.1%} of the coupling profile of mode {label}",
            )


def validate_experiment(experiment: Experiment, *, physics: bool = True) -> ValidationReport:
    """
    Config issues are errors. With `physics`, the basis is built and the step size
    and detector coverage are checked as well (this solves the mean field and BdG
    problem, but integrates nothing).
    """
    report = ValidationReport(
        experiment=ConfigSerializer.get_classname(experiment),
        config_hash=experiment.config_hash,
    )
    for field, message in experiment.validate_config():
        report.add("error", field, message)
    if not report.ok or not physics:
        return report

    system = getattr(experiment, "system", None)
    timing = getattr(experiment, "timing", None)
    if isinstance(system, SystemConfig):
        _physics_checks(
            report,
            system,
            timing if isinstance(timing, RunSpec) else None,
            _probe_strength(experiment),
        )
    return report
