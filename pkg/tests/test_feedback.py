import numpy as np
import pytest

from becprobe.condensate import BasisConfig, build_basis
from becprobe.dynamics import (
    ensemble_steady_state,
    feedback_crossover,
    feedback_energy,
    optimal_feedback_gain,
    steady_state_prediction,
    strong_feedback_gain,
    weak_feedback_gain,
)
from becprobe.errors import ConfigValidationError
from becprobe.probe import FeedbackSpec, ProbeConfig, assemble_generators, build_couplings


def test_crossover_is_where_the_branch_energies_meet() -> None:
    k = feedback_crossover()
    assert 3.0 < k < 3.3
    assert feedback_energy(k, weak_feedback_gain()) == pytest.approx(
        feedback_energy(k, strong_feedback_gain(k)), rel=1e-9
    )
    # energy ~ 2 S / eps + 4 x^2 eps takes equal values at eps and S / (2 x^2 eps)
    a = np.sqrt(1.0 + 4.0 * k * k)
    assert strong_feedback_gain(k) == pytest.approx(0.5 + k * k / (a + 1.0), rel=1e-9)


@pytest.mark.parametrize("kappa_tilde", [1.0, 2.0, 3.0])
def test_critical_damping_wins_below_the_crossover(kappa_tilde) -> None:
    assert feedback_energy(kappa_tilde, 1.0) < feedback_energy(
        kappa_tilde, strong_feedback_gain(kappa_tilde)
    )


@pytest.mark.parametrize("kappa_tilde", [4.0, 25.0])
def test_overdamping_wins_above_the_crossover(kappa_tilde) -> None:
    assert feedback_energy(kappa_tilde, strong_feedback_gain(kappa_tilde)) < feedback_energy(
        kappa_tilde, 1.0
    )


@pytest.mark.parametrize(
    ("kappa_tilde", "expected"),
    [(0.0, 1.0), (0.5, 1.0), (0.75, 1.0), (2.0, 1.0), (5.0, np.sqrt(21.0) / 2.0), (25.0, np.sqrt(101.0) / 2.0)],
)
def test_optimal_gain_branches(kappa_tilde, expected) -> None:
    assert optimal_feedback_gain(kappa_tilde) == pytest.approx(expected)


def test_ensemble_steady_state_limits() -> None:
    # weak probing, critical damping: kappa_tilde [[5/4, -1/2], [-1/2, 1/4]]
    k = 1e-4
    np.testing.assert_allclose(
        ensemble_steady_state(k, 1.0) / k, [[1.25, -0.5], [-0.5, 0.25]], rtol=1e-3, atol=1e-6
    )
    # strong probing, overdamped: var<x> / var<p> -> 9 and energy -> 5 kappa2_bar / (4 sqrt(kappa_tilde))
    k = 1e6
    X = ensemble_steady_state(k, strong_feedback_gain(k))
    assert X[0, 0] / X[1, 1] == pytest.approx(9.0, rel=1e-2)
    assert feedback_energy(k, strong_feedback_gain(k)) / k == pytest.approx(
        1.25 / np.sqrt(k), rel=1e-2
    )


def test_ensemble_steady_state_balances_diffusion_and_damping() -> None:
    kappa_tilde, epsilon = 2.0, 1.5
    X = ensemble_steady_state(kappa_tilde, epsilon)
    drift = np.array([[0.0, -1.0], [1.0, 2.0 * epsilon]])

    a_ss = steady_state_prediction(kappa_tilde)
    source = a_ss @ np.diag([4.0 * kappa_tilde, 0.0]) @ a_ss
    np.testing.assert_allclose(drift @ X + X @ drift.T, source, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(X) > 0)
    assert feedback_energy(kappa_tilde, epsilon, omega=2.0) == pytest.approx(X[0, 0] + X[1, 1])


def test_gain_arguments_are_checked() -> None:
    with pytest.raises(ValueError):
        optimal_feedback_gain(-1.0)
    with pytest.raises(ValueError, match="epsilon must be positive"):
        ensemble_steady_state(1.0, 0.0)


def test_feedback_spec() -> None:
    assert FeedbackSpec(epsilon="auto").gain(2.0) == 1.0
    assert FeedbackSpec(epsilon="auto").gain(5.0) == pytest.approx(np.sqrt(21.0) / 2.0)
    assert FeedbackSpec(epsilon=0.4).gain(2.0) == 0.4
    issues = dict(FeedbackSpec(targets=(0, 1), epsilon=-1.0).validate())
    assert set(issues) == {"targets", "epsilon"}


def test_assembled_feedback_damps_only_the_target_momentum(small_trap) -> None:
    basis = build_basis(small_trap, BasisConfig(modes=3, number_conserving=True))
    couplings = build_couplings(basis, ProbeConfig(calibrate_mode=2, calibrate_value=4.0))
    gen = assemble_generators(basis, couplings, FeedbackSpec(targets=(2,), epsilon="auto"))

    omega2 = basis.frequencies[basis.index(2)]
    gain = gen.gains[2]
    assert gain == pytest.approx(optimal_feedback_gain(4.0 / omega2))
    row = 2 * basis.index(2) + 1
    assert gen.D[row, row] == pytest.approx(2.0 * gain * omega2)
    np.testing.assert_array_equal(gen.D0, assemble_generators(basis, couplings).D)
    changed = np.argwhere(gen.D != gen.D0)
    assert changed.tolist() == [[row, row]]


def test_zero_mode_cannot_be_damped(small_trap) -> None:
    basis = build_basis(small_trap, BasisConfig(modes=2))
    couplings = build_couplings(basis, ProbeConfig())
    with pytest.raises(ConfigValidationError, match="zero mode"):
        assemble_generators(basis, couplings, FeedbackSpec(targets=(0,)))
    with pytest.raises(ConfigValidationError, match="zero mode"):
        assemble_generators(basis, couplings).with_feedback({0: 1.0})
