import math

import numpy as np
import pytest

from becprobe.dynamics import (
    GaussianState,
    JointGaussian,
    couple_probe,
    discrete_measurement_update,
    evolve_covariance,
    oracle_step,
    run_oracle,
)
from becprobe.errors import ConditioningError
from becprobe.probe import make_schedule


def test_single_qnd_measurement_of_the_vacuum() -> None:
    joint = couple_probe(GaussianState.vacuum((1,)), np.array([[1.0]]))
    assert joint.check_physical() == pytest.approx(0.5)

    state = discrete_measurement_update(joint, joint.Q[1::2])
    # v - g x with g = 1 halves var[x] and doubles var[p]; the state stays pure
    np.testing.assert_allclose(state.A, np.diag([0.25, 1.0]), atol=1e-12)
    assert state.check_physical() == pytest.approx(0.5)


def test_measurement_outcome_shifts_the_mean() -> None:
    joint = couple_probe(GaussianState.vacuum((1,)), np.array([[1.0]]))
    state = discrete_measurement_update(joint, [1.0])
    # E[x | v' = 1] = cov(x, v') / var(v') = -1/2 / 1
    assert state.R[0] == pytest.approx(-0.5)
    with pytest.raises(ValueError, match="expected 1 outcomes"):
        discrete_measurement_update(joint, [1.0, 2.0])


def test_near_singular_probe_covariance_is_rejected() -> None:
    joint = JointGaussian(
        A=0.5 * np.eye(2),
        B=np.diag([0.5, 1.0, 0.5, 1e-10]),
        C=np.zeros((2, 4)),
        R=np.zeros(2),
        Q=np.zeros(4),
    )
    with pytest.raises(ConditioningError, match="ill-conditioned"):
        discrete_measurement_update(joint, [0.0, 0.0])


def _oracle_errors(gen, taus, t_end=1.0):
    schedule = make_schedule("continuous", t_end=t_end)
    times = np.linspace(0.0, t_end, 11)
    reference = evolve_covariance(GaussianState.vacuum((1,)), gen, schedule, t_end, 1e-3, times)
    errors = []
    for tau in taus:
        series = run_oracle(GaussianState.vacuum((1,)), gen, schedule, t_end, tau, sample_times=times)
        np.testing.assert_allclose(series.times, times, atol=1e-12)
        errors.append(float(np.max(np.abs(series.A - reference.A))))
    return errors


def test_discrete_pipeline_converges_at_first_order(single_mode) -> None:
    taus = (2e-2, 2e-3)
    errors = _oracle_errors(single_mode(1.0), taus)

    assert errors[1] < 1e-2
    order = math.log(errors[0] / errors[1]) / math.log(taus[0] / taus[1])
    assert order >= 0.8


def test_stochastic_outcomes_leave_the_covariance_unchanged(single_mode) -> None:
    gen = single_mode(1.0)
    schedule = make_schedule("continuous", t_end=0.5)
    mean = run_oracle(GaussianState.vacuum((1,)), gen, schedule, 0.5, 1e-2)
    sampled = run_oracle(GaussianState.vacuum((1,)), gen, schedule, 0.5, 1e-2, seed=3)

    np.testing.assert_allclose(sampled.A, mean.A, atol=1e-14)
    np.testing.assert_array_equal(mean.R, np.zeros_like(mean.R))
    assert np.any(sampled.R != 0)


def test_unprobed_step_is_free_rotation(single_mode) -> None:
    gen = single_mode(1.0)
    state = GaussianState(R=np.array([1.0, 0.0]), A=np.diag([0.25, 1.0]), labels=(1,))
    after = oracle_step(state, gen, 0.5 * math.pi, 0.0)
    np.testing.assert_allclose(after.A, np.diag([1.0, 0.25]), atol=1e-12)
    np.testing.assert_allclose(after.R, [0.0, -1.0], atol=1e-12)
    assert after.t == pytest.approx(0.5 * math.pi)


def test_tau_must_divide_the_interval(single_mode) -> None:
    schedule = make_schedule("continuous", t_end=1.0)
    with pytest.raises(ValueError, match="does not divide"):
        run_oracle(GaussianState.vacuum((1,)), single_mode(1.0), schedule, 1.0, 0.3)
