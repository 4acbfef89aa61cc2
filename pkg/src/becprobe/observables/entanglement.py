"""Purity and two-mode entanglement of Gaussian states."""

import math
from collections.abc import Sequence

import numpy as np

from ..dynamics.state import GaussianState, symplectic_eigenvalues
from ..errors import PhysicalityError
from ..probe.couplings import CouplingSet


def purity(state: GaussianState, modes: Sequence[int]) -> float:
    """Tr(rho_m^2) = 1 / (2^m sqrt(det A_m)) of the reduced state of `modes`."""
    if not modes:
        raise ValueError("purity needs at least one mode")
    reduced = state.reduced(modes)
    sign, logdet = np.linalg.slogdet(reduced.A)
    if sign <= 0:
        raise PhysicalityError(
            f"reduced covariance of modes {list(modes)} is not positive definite",
            time=state.t,
        )
    return math.exp(-len(modes) * math.log(2.0) - 0.5 * logdet)


def log_negativity(state: GaussianState, pair: tuple[int, int]) -> float:
    """
    sum max(0, -log2(2 nu)) over the symplectic eigenvalues nu of the partially
    transposed two-mode covariance (momentum of the second mode flipped).
    """
    j, k = pair
    if j == k:
        raise ValueError("log negativity needs two distinct modes")
    reduced = state.reduced([j, k])
    reduced.check_physical()
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = flip @ reduced.A @ flip
    nu = symplectic_eigenvalues(transposed)
    return float(sum(max(0.0, -math.log2(2.0 * value)) for value in nu))


def distinguishability(couplings: CouplingSet, j: int, k: int) -> float:
    """beta_jk = |kappa2_bar_jk| / sqrt(kappa2_bar_jj kappa2_bar_kk), in [0, 1]."""
    jj, kk = couplings.coupling(j, j), couplings.coupling(k, k)
    if jj <= 0 or kk <= 0:
        raise ValueError(f"modes {j} and {k} must both couple to the probe (diagonals {jj}, {kk})")
    beta = abs(couplings.coupling(j, k)) / math.sqrt(jj * kk)
    return min(beta, 1.0)


def qnd_entanglement_limit(beta: float) -> float:
    """Asymptotic log negativity of two stroboscopically probed modes, log4((1+b)/(1-b))."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if beta == 1.0:
        return math.inf
    return 0.5 * math.log2((1.0 + beta) / (1.0 - beta))
