import math

import numpy as np
import pytest

from becprobe.dynamics import (
    GaussianState,
    build_step_plan,
    check_step_size,
    evolve_covariance,
    evolve_unconditional,
    export_snapshots,
    export_time_series,
    steady_state_prediction,
    symplectic_eigenvalues,
)
from becprobe.errors import PhysicalityError, StepSizeError
from becprobe.probe import make_schedule
from becprobe.storage.tables import read_csv


@pytest.mark.parametrize("kappa_tilde", [0.1, 1.0, 10.0])
def test_continuous_probing_reaches_the_closed_form_steady_state(single_mode, kappa_tilde) -> None:
    gen = single_mode(kappa_tilde)
    t_end = 40.0
    schedule = make_schedule("continuous", t_end=t_end)
    series = evolve_covariance(
        GaussianState.vacuum((1,)), gen, schedule, t_end, dt=1e-3, sample_times=[0.0, t_end]
    )
    np.testing.assert_allclose(series.final.A, steady_state_prediction(kappa_tilde), rtol=1e-2)
    # a continuously measured mode stays pure
    assert series.min_symplectic[-1] == pytest.approx(0.5, abs=1e-6)


def test_steady_state_limits() -> None:
    np.testing.assert_allclose(steady_state_prediction(0.0), 0.5 * np.eye(2))
    strong = steady_state_prediction(100.0)
    assert strong[0, 0] < 0.1
    assert strong[1, 1] > 5.0
    assert float(symplectic_eigenvalues(strong)[0]) == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(ValueError):
        steady_state_prediction(-1.0)


def test_free_evolution_rotates_the_covariance(single_mode) -> None:
    gen = single_mode(1.0)
    off = make_schedule("continuous", t_end=math.pi, strength=0.0)
    squeezed = GaussianState(R=np.array([1.0, 0.0]), A=np.diag([0.25, 1.0]), labels=(1,))
    series = evolve_covariance(squeezed, gen, off, 0.5 * math.pi, dt=1e-2, sample_times=[0.5 * math.pi])

    np.testing.assert_allclose(series.final.A, np.diag([1.0, 0.25]), atol=1e-12)
    np.testing.assert_allclose(series.final.R, [0.0, -1.0], atol=1e-12)


def test_unconditional_covariance_heats_linearly(single_mode) -> None:
    gen = single_mode(0.5)
    schedule = make_schedule("continuous", t_end=3.0)
    series = evolve_unconditional(GaussianState.vacuum((1,)), gen, schedule, 3.0, dt=1e-3)

    trace = np.trace(series.A, axis1=1, axis2=2)
    np.testing.assert_allclose(trace, 1.0 + 0.5 * series.times, rtol=1e-10)


def test_stroboscopic_pulses_squeeze_the_position(single_mode) -> None:
    gen = single_mode(50.0)
    t_end = 10.0 * math.pi
    schedule = make_schedule("squeezing", t_end=t_end, frequencies=[1.0])
    series = evolve_covariance(GaussianState.vacuum((1,)), gen, schedule, t_end, dt=1e-3)

    var_x = series.variance(1, "x")
    assert var_x[-1] < 0.25
    assert series.variance(1, "p")[-1] > 1.0
    assert np.all(series.min_symplectic >= 0.5 - 1e-6)


def test_step_plan_hits_samples_and_breakpoints() -> None:
    schedule = make_schedule("ramp", t_end=4.0, ramp_start=1.0, ramp_end=3.0)
    plan = build_step_plan(schedule, 0.0, 4.0, 0.3, sample_times=[0.0, 2.0, 4.0])

    starts = [step.t0 for step in plan]
    assert 1.0 in starts
    assert 3.0 in starts
    assert all(step.h <= 0.3 + 1e-12 for step in plan if not step.exact)
    assert [step.sample for step in plan if step.sample is not None] == [0, 1, 2]
    # after the ramp the probe is off and the step is propagated exactly
    assert plan.steps[-1].exact


def test_step_plan_resolves_short_pulses() -> None:
    schedule = make_schedule("squeezing", t_end=math.pi, frequencies=[1.0])
    plan = build_step_plan(schedule, 0.0, math.pi, 0.1)
    probed = [step for step in plan if not step.exact]
    assert sum(step.h for step in probed) == pytest.approx(schedule.pulse_width)
    assert len(probed) >= 20


@pytest.mark.parametrize(
    "sample_times",
    [[0.0, 2.0, 1.0], [0.0, 5.0], []],
)
def test_invalid_sample_times(single_mode, sample_times) -> None:
    schedule = make_schedule("continuous", t_end=2.0)
    with pytest.raises(ValueError, match="sample_times"):
        evolve_covariance(
            GaussianState.vacuum((1,)), single_mode(1.0), schedule, 2.0, 1e-2, sample_times
        )


def test_step_size_bounds(single_mode) -> None:
    schedule = make_schedule("continuous", t_end=1.0)
    assert check_step_size(single_mode(1.0), schedule, 1e-3) == pytest.approx(4e-3)
    with pytest.raises(StepSizeError, match="far beyond"):
        check_step_size(single_mode(1.0), schedule, 0.5)
    with pytest.raises(StepSizeError):
        evolve_covariance(GaussianState.vacuum((1,)), single_mode(1.0), schedule, 1.0, dt=2.0)


def test_unphysical_states_are_rejected(single_mode) -> None:
    state = GaussianState(R=np.zeros(2), A=0.1 * np.eye(2), labels=(1,))
    with pytest.raises(PhysicalityError, match="uncertainty principle") as exc:
        state.check_physical()
    assert exc.value.min_symplectic_eigenvalue == pytest.approx(0.1)

    schedule = make_schedule("continuous", t_end=1.0)
    with pytest.raises(PhysicalityError):
        evolve_covariance(state, single_mode(1.0), schedule, 1.0, 1e-3)
    with pytest.raises(PhysicalityError, match="NaN"):
        GaussianState(R=np.array([np.nan, 0.0]), A=0.5 * np.eye(2)).check_physical()


def test_state_reduction_and_label_checks(single_mode) -> None:
    A = 0.5 * np.eye(4)
    A[0, 2] = A[2, 0] = 0.1
    state = GaussianState(R=np.arange(4.0), A=A, labels=(1, 3))
    reduced = state.reduced([3])
    np.testing.assert_array_equal(reduced.R, [2.0, 3.0])
    assert reduced.labels == (3,)
    with pytest.raises(IndexError):
        state.row(2)

    schedule = make_schedule("continuous", t_end=1.0)
    with pytest.raises(ValueError, match="do not match"):
        evolve_covariance(GaussianState.vacuum((2,)), single_mode(1.0), schedule, 1.0, 1e-3)


def test_time_series_and_snapshot_exports(single_mode, tmp_path) -> None:
    schedule = make_schedule("continuous", t_end=1.0)
    series = evolve_covariance(
        GaussianState.vacuum((1,)), single_mode(1.0), schedule, 1.0, 1e-3, sample_times=[0.0, 0.5, 1.0]
    )
    table = read_csv(export_time_series(series, tmp_path))
    np.testing.assert_allclose(table["t"], [0.0, 0.5, 1.0])
    np.testing.assert_allclose(table["var_x_1"], series.variance(1, "x"))
    assert "min_symplectic" in table

    snapshots = read_csv(export_snapshots(series, tmp_path, [1.0]))
    np.testing.assert_allclose(snapshots["value"], series.final.A.ravel())
    assert "# index: x1 p1" in (tmp_path / "snapshots.csv").read_text()
