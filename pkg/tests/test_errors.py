import json

import pytest

from becprobe.errors import (
    ConfigValidationError,
    ConvergenceError,
    ExperimentError,
    PhysicalityError,
    ScheduleError,
    StepSizeError,
    exit_code_for,
)
from becprobe.experiments import Experiment, RunContext
from becprobe.storage import ManifestManager


class Exploding(Experiment):
    value: int = 1

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.value < 0:
            issues.append(("value", f"must be non-negative, got {self.value}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        ctx.write_json("partial.json", {"value": self.value})
        raise RuntimeError("boom")


class Diverging(Experiment):
    def _run(self, ctx: RunContext) -> None:
        raise PhysicalityError("covariance violates the uncertainty principle", time=0.25)


def test_failed_run_raises_experiment_error_and_records_manifest(becprobe_tmp_root) -> None:
    obj = Exploding()
    with pytest.raises(ExperimentError) as exc:
        obj.run()

    directory = obj.run_dir()
    assert exc.value.run_dir == directory.resolve()
    assert isinstance(exc.value.original_error, RuntimeError)
    assert exc.value.recorded_traceback is not None
    assert "RuntimeError: boom" in exc.value.recorded_traceback
    assert exit_code_for(exc.value) == 1

    manifest = ManifestManager.read_manifest(directory)
    assert manifest.status == "failed"
    assert manifest.error == "RuntimeError: boom"
    assert manifest.outputs == ["partial.json"]

    log_text = (directory / "becprobe.log").read_text()
    assert "[ERROR]" in log_text
    assert "run failed" in log_text
    assert "RuntimeError: boom" in log_text


def test_failed_run_is_retried(becprobe_tmp_root) -> None:
    obj = Exploding()
    with pytest.raises(ExperimentError):
        obj.run()
    with pytest.raises(ExperimentError):
        obj.run()
    raw = json.loads(ManifestManager.get_manifest_path(obj.run_dir()).read_text())
    assert raw["status"] == "failed"


def test_numerical_failure_maps_to_exit_code_three(becprobe_tmp_root) -> None:
    with pytest.raises(ExperimentError) as exc:
        Diverging().run()
    assert isinstance(exc.value.original_error, PhysicalityError)
    assert exc.value.original_error.time == 0.25
    assert exit_code_for(exc.value) == 3


def test_invalid_config_is_rejected_before_running(becprobe_tmp_root) -> None:
    obj = Exploding(value=-1)
    with pytest.raises(ConfigValidationError, match="invalid Exploding configuration") as exc:
        obj.run()
    assert exc.value.issues == [("value", "must be non-negative, got -1")]
    assert not obj.run_dir().exists()


def test_exit_codes() -> None:
    assert exit_code_for(ConfigValidationError("bad")) == 2
    assert exit_code_for(ScheduleError("overlap")) == 2
    assert exit_code_for(StepSizeError("dt")) == 3
    assert exit_code_for(ConvergenceError("stuck", residual=1.0, iterations=3)) == 3
    assert exit_code_for(RuntimeError("other")) == 1


def test_config_validation_error_lists_fields_and_hints() -> None:
    error = ConfigValidationError(
        "invalid config",
        issues=[("timing.dt", "must be positive, got -1"), ("basis.modes", "too many")],
        hints=["Run `becprobe validate`."],
    )
    text = str(error)
    assert "timing.dt: must be positive, got -1" in text
    assert "basis.modes: too many" in text
    assert "Hints:" in text
    assert "Run `becprobe validate`." in text


def test_convergence_error_reports_residual() -> None:
    error = ConvergenceError("imaginary-time relaxation stalled", residual=3.5e-4, iterations=200)
    assert "final residual: 3.500e-04 after 200 iterations" in str(error)
