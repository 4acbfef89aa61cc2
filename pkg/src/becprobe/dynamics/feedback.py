"""
Single-mode steady states under continuous probing and mode-matched feedback.

All quantities are per mode in units of that mode's frequency, with
kappa_tilde = kappa2_bar_jj / omega_j and an ideal detector (K2 = 4 kappa2_bar).
"""

import functools
import math

import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy import optimize

CROSSOVER_SCAN_MAX = 100.0
CROSSOVER_SCAN_POINTS = 400


def steady_state_prediction(kappa_tilde: float) -> NDArray[np.float64]:
    """
    Closed-form conditional steady state of one continuously probed mode:

        A_ss = 1/(4 k) [[sqrt(2(a-1)), a-1], [a-1, a sqrt(2(a-1))]],  a = sqrt(1 + 4 k^2)

    Evaluated through a - 1 = 4 k^2 / (a + 1) so the limit k -> 0 gives the vacuum.
    """
    if kappa_tilde < 0:
        raise ValueError(f"kappa_tilde must be non-negative, got {kappa_tilde}")
    k = float(kappa_tilde)
    a = math.sqrt(1.0 + 4.0 * k * k)
    root = math.sqrt(8.0 / (a + 1.0)) / 4.0
    cov = k / (a + 1.0)
    return np.array([[root, cov], [cov, a * root]])


def weak_feedback_gain() -> float:
    """Critical damping."""
    return 1.0


def strong_feedback_gain(kappa_tilde: float) -> float:
    return math.sqrt(1.0 + 4.0 * kappa_tilde) / 2.0


def _branch_energy_gap(kappa_tilde: float) -> float:
    """Energy of the critical branch minus energy of the overdamped branch."""
    return feedback_energy(kappa_tilde, weak_feedback_gain()) - feedback_energy(
        kappa_tilde, strong_feedback_gain(kappa_tilde)
    )


@functools.cache
def feedback_crossover() -> float:
    """
    Probing strength above which the overdamped branch stores less ensemble energy
    than critical damping.

    The two gains coincide at kappa_tilde = 3/4, where the energies agree trivially;
    the crossover is the first sign change of the energy gap beyond that point.
    """
    equal_gains = 0.75
    grid = np.geomspace(equal_gains * (1.0 + 1e-3), CROSSOVER_SCAN_MAX, CROSSOVER_SCAN_POINTS)
    gaps = np.array([_branch_energy_gap(k) for k in grid])
    above = np.flatnonzero(gaps > 0.0)
    if above.size == 0 or above[0] == 0:
        raise ValueError(
            f"no energy crossover of the feedback branches in ({grid[0]:.3g}, {grid[-1]:.3g}]"
        )
    i = int(above[0])
    return float(optimize.brentq(_branch_energy_gap, grid[i - 1], grid[i], xtol=1e-12))


def optimal_feedback_gain(kappa_tilde: float) -> float:
    if kappa_tilde < 0:
        raise ValueError(f"kappa_tilde must be non-negative, got {kappa_tilde}")
    if kappa_tilde <= feedback_crossover():
        return weak_feedback_gain()
    return strong_feedback_gain(kappa_tilde)


def ensemble_steady_state(kappa_tilde: float, epsilon: float) -> NDArray[np.float64]:
    """
    Covariance of the trajectory first moments once measurement and feedback balance.

    Solves D_f X + X D_f^T = A_ss M M^T A_ss with D_f = [[0, -1], [1, 2 epsilon]] and
    M M^T = diag(4 kappa_tilde, 0).
    """
    if epsilon <= 0:
        raise ValueError("an undamped ensemble has no steady state; epsilon must be positive")
    drift = np.array([[0.0, -1.0], [1.0, 2.0 * epsilon]])
    a_ss = steady_state_prediction(kappa_tilde)
    mmt = np.diag([4.0 * kappa_tilde, 0.0])
    source = a_ss @ mmt @ a_ss
    solution = scipy.linalg.solve_continuous_lyapunov(drift, source)
    return 0.5 * (solution + solution.T)


def feedback_energy(kappa_tilde: float, epsilon: float, omega: float = 1.0) -> float:
    """Mean energy omega (<x>^2 + <p>^2) / 2 stored in the trajectory excursions."""
    ens = ensemble_steady_state(kappa_tilde, epsilon)
    return 0.5 * omega * float(ens[0, 0] + ens[1, 1])
