import json

import numpy as np
import pytest

from becprobe.condensate import BasisConfig, GridConfig, TrapConfig
from becprobe.errors import ConfigValidationError
from becprobe.experiments import (
    CouplingsExperiment,
    CovarianceExperiment,
    OracleExperiment,
    RunSpec,
    SystemConfig,
    resolve_config,
    validate_experiment,
)
from becprobe.probe import ProbeConfig
from becprobe.storage import ManifestManager
from becprobe.storage.tables import read_csv


def _system(modes: int = 3, number_conserving: bool = False) -> SystemConfig:
    return SystemConfig(
        trap=TrapConfig(grid=GridConfig(n_points=256, half_width=10.0)),
        basis=BasisConfig(modes=modes, number_conserving=number_conserving),
        probe=ProbeConfig(calibrate_mode=1, calibrate_value=1.0),
    )


def _covariance(**changes) -> CovarianceExperiment:
    return CovarianceExperiment(
        system=changes.pop("system", _system()),
        timing=changes.pop("timing", RunSpec(t_end=0.5, dt=1e-3, n_samples=11)),
        **changes,
    )


def test_covariance_run_writes_tables_and_manifest(becprobe_tmp_root) -> None:
    experiment = _covariance()
    directory = experiment.run()

    assert directory.is_relative_to(becprobe_tmp_root / "runs")
    manifest = ManifestManager.read_manifest(directory)
    assert manifest.status == "success"
    assert manifest.experiment == "becprobe.experiments.covariance.CovarianceExperiment"
    for name in (
        "spectrum.csv",
        "kappa2_bar.csv",
        "K2.csv",
        "schedule.json",
        "covariance.csv",
        "ellipse.csv",
        "snapshots.csv",
        "summary.json",
    ):
        assert name in manifest.outputs
        assert (directory / name).is_file()

    summary = json.loads((directory / "summary.json").read_text())
    assert summary["kappa2_bar"] == pytest.approx(1.0)
    assert summary["min_symplectic"] >= 0.5 - 1e-9
    assert summary["final"]["var_x"] < 0.5

    ellipse = read_csv(directory / "ellipse.csv")
    assert ellipse["t"].size == 4
    assert np.isinf(ellipse["t"][-1])


def test_unknown_report_modes_are_skipped_with_a_warning(becprobe_tmp_root) -> None:
    experiment = _covariance(
        system=_system(number_conserving=True), report_modes=(0, 1)
    )
    manifest = ManifestManager.read_manifest(experiment.run())
    assert any("modes [0]" in warning for warning in manifest.warnings)


def test_run_directory_resolves_back_to_the_experiment(becprobe_tmp_root) -> None:
    experiment = _covariance()
    directory = experiment.run()

    rebuilt, preset = resolve_config(str(directory))
    assert preset is None
    assert rebuilt == experiment
    assert rebuilt.config_hash == experiment.config_hash

    changed, _ = resolve_config(str(directory), ["timing.seed=5", "ellipse_mode=2"])
    assert changed.seed == 5
    assert changed.ellipse_mode == 2
    assert changed.config_hash != experiment.config_hash


def test_overrides_are_checked() -> None:
    with pytest.raises(ConfigValidationError, match="invalid overrides") as info:
        resolve_config("oracle", ["taus.first=1", "no-equals-sign"])
    assert [field for field, _ in info.value.issues] == ["taus.first=1", "no-equals-sign"]


def test_validation_reports_schema_errors() -> None:
    report = validate_experiment(_covariance(ellipse_mode=0, report_modes=()), physics=False)
    assert not report.ok
    assert {issue.field for issue in report.errors} == {"ellipse_mode", "report_modes"}

    bad_timing = _covariance(timing=RunSpec(t_end=0.5, dt=1.0, n_samples=1))
    fields = {issue.field for issue in validate_experiment(bad_timing, physics=False).errors}
    assert fields == {"timing.dt", "timing.n_samples"}


def test_validation_flags_unresolvable_bases() -> None:
    report = validate_experiment(_covariance(system=_system(modes=60)), physics=False)
    assert [issue.field for issue in report.errors] == ["system.basis.modes"]
    assert "not resolvable" in report.errors[0].message


def test_validation_warns_about_coarse_steps() -> None:
    fine = validate_experiment(_covariance(timing=RunSpec(t_end=0.5, dt=5e-4, n_samples=11)))
    assert fine.ok
    assert not fine.issues

    coarse = validate_experiment(_covariance(timing=RunSpec(t_end=0.5, dt=0.05, n_samples=11)))
    assert coarse.ok
    assert [issue.field for issue in coarse.warnings] == ["timing.dt"]

    unstable = validate_experiment(_covariance(timing=RunSpec(t_end=5.0, dt=0.5, n_samples=11)))
    assert not unstable.ok
    assert "exceeds" in unstable.errors[0].message


def test_invalid_experiment_is_not_run(becprobe_tmp_root) -> None:
    with pytest.raises(ConfigValidationError):
        _covariance(ellipse_mode=0).run()
    assert not (becprobe_tmp_root / "runs").exists()


def test_oracle_experiment_reports_first_order_convergence(becprobe_tmp_root) -> None:
    experiment = OracleExperiment(
        system=_system(modes=2, number_conserving=True),
        timing=RunSpec(t_end=1.0, dt=1e-3, n_samples=11),
        taus=(0.1, 0.01),
    )
    directory = experiment.run()

    result = json.loads((directory / "convergence.json").read_text())
    assert result["max_errors"][1] < result["max_errors"][0]
    assert result["observed_order"] > 0.7
    assert (directory / "oracle_tau=0.01.csv").is_file()
    assert (directory / "riccati.csv").is_file()


def test_oracle_taus_must_divide_the_run() -> None:
    experiment = OracleExperiment(
        system=_system(modes=2, number_conserving=True),
        timing=RunSpec(t_end=1.0, dt=1e-3, n_samples=11),
        taus=(0.3, 0.01),
    )
    issues = dict(experiment.validate_config())
    assert "does not divide" in issues["taus"]


def test_deterministic_experiments_ignore_seeds() -> None:
    experiment = CouplingsExperiment(system=_system())
    assert experiment.seed is None
    assert experiment.with_seed(4) is experiment
    assert _covariance().with_seed(4).seed == 4
