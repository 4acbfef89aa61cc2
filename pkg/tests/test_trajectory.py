import numpy as np
import pytest

from becprobe.dynamics import (
    GaussianState,
    evolve_covariance,
    evolve_trajectory,
    export_record,
)
from becprobe.probe import make_schedule
from becprobe.storage.tables import read_csv


def _run(gen, seed, *, t_end=2.0, schedule=None, record=True):
    schedule = schedule or make_schedule("continuous", t_end=t_end)
    return evolve_trajectory(
        GaussianState.vacuum((1,)),
        gen,
        schedule,
        t_end,
        dt=1e-3,
        seed=seed,
        sample_times=np.linspace(0.0, t_end, 21),
        record=record,
    )


def test_trajectory_covariance_is_the_deterministic_one(single_mode) -> None:
    gen = single_mode(1.0)
    result = _run(gen, seed=3)
    reference = evolve_covariance(
        GaussianState.vacuum((1,)),
        gen,
        make_schedule("continuous", t_end=2.0),
        2.0,
        1e-3,
        sample_times=np.linspace(0.0, 2.0, 21),
    )
    np.testing.assert_array_equal(result.covariance.A, reference.A)


def test_same_seed_same_trajectory(single_mode) -> None:
    gen = single_mode(1.0)
    a, b, c = _run(gen, 11), _run(gen, 11), _run(gen, 12)

    np.testing.assert_array_equal(a.R, b.R)
    np.testing.assert_array_equal(a.record.increments, b.record.increments)
    assert not np.array_equal(a.R, c.R)
    assert a.seed == 11


def test_measurement_drives_the_mean_away_from_zero(single_mode) -> None:
    result = _run(single_mode(1.0), seed=5)
    assert np.all(result.R[0] == 0.0)
    assert np.any(np.abs(result.R[-1]) > 0)
    assert result.state(0).t == 0.0
    assert result.times[-1] == pytest.approx(2.0)


def test_unprobed_trajectory_is_deterministic(single_mode) -> None:
    gen = single_mode(1.0)
    off = make_schedule("continuous", t_end=1.0, strength=0.0)
    start = GaussianState(R=np.array([1.0, 0.0]), A=0.5 * np.eye(2), labels=(1,))
    result = evolve_trajectory(start, gen, off, 1.0, dt=1e-2, seed=None, sample_times=[1.0])

    np.testing.assert_allclose(result.R[-1], [np.cos(1.0), -np.sin(1.0)], atol=1e-12)
    assert result.record.increments.shape == (0, 1)


def test_record_has_one_row_per_probed_step(single_mode, tmp_path) -> None:
    schedule = make_schedule("ramp", t_end=2.0, ramp_start=0.5, ramp_end=1.0)
    result = _run(single_mode(1.0), seed=1, schedule=schedule)

    record = result.record
    assert record.n_channels == 1
    assert record.t[-1] < 1.0
    assert record.dt.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(record.integrated()[-1], record.increments.sum(axis=0))

    table = read_csv(export_record(record, tmp_path))
    assert table["t"].size == record.increments.size
    np.testing.assert_array_equal(np.unique(table["pixel"]), [0.0])


def test_record_can_be_skipped(single_mode) -> None:
    assert _run(single_mode(1.0), seed=1, record=False).record is None
