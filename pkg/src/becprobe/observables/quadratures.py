"""Quadrature variances and squeezing axes of single modes."""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..dynamics.feedback import steady_state_prediction
from ..dynamics.state import GaussianState

ISOTROPY_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureStats:
    """Second moments of mode j and its cross moments with mode k."""

    j: int
    k: int
    var_x: float
    var_p: float
    cov_xp: float
    cov_xx_jk: float
    cov_pp_jk: float
    cov_xp_jk: float
    cov_px_jk: float


@dataclass(frozen=True)
class SqueezingAxis:
    """
    Minimum-variance quadrature q = x cos(theta) - p sin(theta).

    `isotropic` blocks have no preferred axis and report theta = nan.
    """

    theta: float
    min_variance: float
    max_variance: float
    isotropic: bool
    kappa_tilde: float | None = None

    @property
    def strong_asymptote(self) -> float | None:
        if self.kappa_tilde is None or self.kappa_tilde <= 0:
            return None
        return 1.0 / math.sqrt(4.0 * self.kappa_tilde)

    @property
    def weak_asymptote(self) -> float | None:
        if self.kappa_tilde is None:
            return None
        return math.pi / 4.0 - self.kappa_tilde / 2.0

    @property
    def squeezing_db(self) -> float:
        return -10.0 * math.log10(2.0 * self.min_variance)


def quadrature_stats(state: GaussianState, j: int, k: int | None = None) -> QuadratureStats:
    k = j if k is None else k
    rj, rk = state.row(j), state.row(k)
    A = state.A
    xj, pj, xk, pk = 2 * rj, 2 * rj + 1, 2 * rk, 2 * rk + 1
    return QuadratureStats(
        j=j,
        k=k,
        var_x=float(A[xj, xj]),
        var_p=float(A[pj, pj]),
        cov_xp=float(A[xj, pj]),
        cov_xx_jk=float(A[xj, xk]),
        cov_pp_jk=float(A[pj, pk]),
        cov_xp_jk=float(A[xj, pk]),
        cov_px_jk=float(A[pj, xk]),
    )


def _axis(block: NDArray[np.float64], kappa_tilde: float | None) -> SqueezingAxis:
    alpha, beta, c = float(block[0, 0]), float(block[1, 1]), float(block[0, 1])
    mean = 0.5 * (alpha + beta)
    radius = math.hypot(0.5 * (beta - alpha), c)
    if radius <= ISOTROPY_TOL * max(mean, 1.0):
        return SqueezingAxis(math.nan, mean, mean, True, kappa_tilde)
    theta = 0.5 * math.atan2(2.0 * c, beta - alpha)
    return SqueezingAxis(theta, mean - radius, mean + radius, False, kappa_tilde)


def optimal_quadrature(
    source: GaussianState | float,
    j: int | None = None,
    *,
    kappa_tilde: float | None = None,
) -> SqueezingAxis:
    """
    Squeezing axis of mode j of a state, or of the continuous-probing steady state when
    `source` is a kappa_tilde value. The asymptotic angles 1/sqrt(4 kappa_tilde) (strong)
    and pi/4 - kappa_tilde/2 (weak) are attached for comparison when kappa_tilde is known.
    """
    if isinstance(source, GaussianState):
        if j is None:
            raise ValueError("a mode label is required for a GaussianState")
        if j == 0 and 0 in source.labels:
            raise ValueError("the zero mode is not a harmonic oscillator")
        row = source.row(j)
        block = source.A[2 * row : 2 * row + 2, 2 * row : 2 * row + 2]
        return _axis(block, kappa_tilde)
    value = float(source)
    return _axis(steady_state_prediction(value), value)
