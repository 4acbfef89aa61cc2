"""
Discrete measurement pipeline with explicit probe modes.

Each step of length tau couples the system to fresh vacuum probe modes (u_d, v_d) through
the linearized QND interaction

    v_d -> v_d - sum_j G_jd x_j,    p_j -> p_j - sum_d G_jd u_d,    G = sqrt(tau s / 2) nu_bar,

measures every v_d by ideal homodyne detection, adds the environment noise the detector
does not account for, tau s (kappa2_bar - K2 / 4) on the momenta, and evolves freely.
As tau -> 0 this converges to the Riccati equation at first order.
"""

import math
from collections.abc import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from ..errors import ConditioningError
from ..probe.generators import Generators
from ..probe.schedule import ProbeSchedule
from ..runtime import get_logger
from .covariance import CovarianceSeries
from .state import GaussianState, JointGaussian

PINV_RTOL = 1e-10
ILL_CONDITIONED_BAND = (1e-12, 1e-8)


def couple_probe(state: GaussianState, coupling: NDArray[np.float64]) -> JointGaussian:
    """Entangle `state` with vacuum probe modes; `coupling` has shape (n_modes, n_probe)."""
    n = state.n_modes
    if coupling.shape[0] != n:
        raise ValueError(f"coupling has {coupling.shape[0]} rows for {n} system modes")
    c = coupling.shape[1]
    dim = 2 * n + 2 * c
    S = np.eye(dim)
    S[2 * n + 1 :: 2, 0 : 2 * n : 2] = -coupling.T
    S[1 : 2 * n : 2, 2 * n :: 2] = -coupling
    full = scipy.linalg.block_diag(state.A, 0.5 * np.eye(2 * c))
    full = S @ full @ S.T
    full = 0.5 * (full + full.T)
    moments = S @ np.concatenate([state.R, np.zeros(2 * c)])
    k = 2 * n
    return JointGaussian(
        A=full[:k, :k],
        B=full[k:, k:],
        C=full[:k, k:],
        R=moments[:k],
        Q=moments[k:],
        t=state.t,
        labels=state.labels,
    )


def _checked_pinv(matrix: NDArray[np.float64]) -> NDArray[np.float64]:
    singular = np.linalg.svd(matrix, compute_uv=False)
    largest = float(singular.max(initial=0.0))
    if largest == 0.0:
        return np.zeros_like(matrix.T)
    relative = singular / largest
    low, high = ILL_CONDITIONED_BAND
    unstable = relative[(relative >= low) & (relative <= high)]
    if unstable.size:
        raise ConditioningError(
            f"measured probe covariance is ill-conditioned "
            f"(relative singular value {float(unstable.min()):.2e})",
            hints=["Check for probe channels that carry no signal or duplicate each other."],
        )
    return scipy.linalg.pinv(matrix, atol=0.0, rtol=PINV_RTOL)


def discrete_measurement_update(
    joint: JointGaussian, outcomes: Sequence[float] | NDArray[np.float64]
) -> GaussianState:
    """
    Homodyne measurement of the probe momenta:

        A -> A - C [L B L]^+ C^T,   R -> R - C [L B L]^+ (Q - outcomes)

    with L selecting the momentum quadratures of the probe modes.
    """
    measured = np.asarray(outcomes, dtype=float)
    n_probe = joint.B.shape[0] // 2
    if measured.shape != (n_probe,):
        raise ValueError(f"expected {n_probe} outcomes, got shape {measured.shape}")
    B_vv = joint.B[1::2, 1::2]
    C_v = joint.C[:, 1::2]
    gain = C_v @ _checked_pinv(B_vv)
    A = joint.A - gain @ C_v.T
    R = joint.R - gain @ (joint.Q[1::2] - measured)
    return GaussianState(R=R, A=0.5 * (A + A.T), t=joint.t, labels=joint.labels)


def sample_outcomes(joint: JointGaussian, rng: np.random.Generator) -> NDArray[np.float64]:
    return rng.multivariate_normal(joint.Q[1::2], joint.B[1::2, 1::2], method="eigh")


def _residual_noise(gen: Generators) -> NDArray[np.float64]:
    nu_bar = gen.M[0::2, 1::2]
    noise = gen.E.copy()
    noise[1::2, 1::2] -= 0.25 * (nu_bar @ nu_bar.T)
    return 0.5 * (noise + noise.T)


def oracle_step(
    state: GaussianState,
    gen: Generators,
    tau: float,
    strength: float,
    rng: np.random.Generator | None = None,
    *,
    bare: NDArray[np.float64] | None = None,
    damped: NDArray[np.float64] | None = None,
) -> GaussianState:
    """
    One measure, add-noise, evolve cycle. Without `rng` the outcomes are set to their
    means, which leaves A unaffected.
    """
    if strength > 0 and gen.n_channels > 0:
        coupling = math.sqrt(0.5 * tau * strength) * gen.M[0::2, 1::2]
        joint = couple_probe(state, coupling)
        outcomes = joint.Q[1::2] if rng is None else sample_outcomes(joint, rng)
        state = discrete_measurement_update(joint, outcomes)
        A = state.A + tau * strength * _residual_noise(gen)
    else:
        A = state.A + tau * strength * gen.E
    bare = scipy.linalg.expm(-gen.D0 * tau) if bare is None else bare
    damped = scipy.linalg.expm(-gen.D * tau) if damped is None else damped
    A = bare @ A @ bare.T
    return GaussianState(
        R=damped @ state.R, A=0.5 * (A + A.T), t=state.t + tau, labels=state.labels
    )


def run_oracle(
    state: GaussianState,
    gen: Generators,
    schedule: ProbeSchedule,
    t_end: float,
    tau: float,
    seed: int | None = None,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
) -> CovarianceSeries:
    """Iterate `oracle_step` from `state.t` to `t_end`; the strength is taken at step midpoints."""
    if state.labels != gen.labels:
        raise ValueError(f"state modes {state.labels} do not match generator modes {gen.labels}")
    span = t_end - state.t
    n_steps = int(round(span / tau))
    if n_steps < 1 or abs(n_steps * tau - span) > 1e-9 * max(1.0, span):
        raise ValueError(f"tau = {tau} does not divide the interval [{state.t}, {t_end}]")
    state.check_physical()

    if sample_times is None:
        indices = np.unique(np.linspace(0, n_steps, min(201, n_steps + 1)).round().astype(int))
    else:
        indices = np.unique(np.rint((np.asarray(sample_times) - state.t) / tau).astype(int))
        if indices.min() < 0 or indices.max() > n_steps:
            raise ValueError(f"sample_times must lie in [{state.t}, {t_end}]")
    wanted = {int(k): i for i, k in enumerate(indices)}

    rng = np.random.default_rng(seed) if seed is not None else None
    bare = scipy.linalg.expm(-gen.D0 * tau)
    damped = scipy.linalg.expm(-gen.D * tau)
    out_A = np.empty((indices.size, gen.dim, gen.dim))
    out_R = np.empty((indices.size, gen.dim))
    out_min = np.empty(indices.size)
    t0 = state.t

    for k in range(n_steps + 1):
        if k in wanted:
            i = wanted[k]
            out_A[i] = state.A
            out_R[i] = state.R
            out_min[i] = state.check_physical()
        if k == n_steps:
            break
        midpoint = t0 + (k + 0.5) * tau
        segment = schedule.segment_at(midpoint)
        strength = segment.value(midpoint) if segment is not None else 0.0
        state = oracle_step(state, gen, tau, strength, rng, bare=bare, damped=damped)
        state = GaussianState(R=state.R, A=state.A, t=t0 + (k + 1) * tau, labels=state.labels)

    get_logger().debug("oracle pipeline ran %d steps of tau=%.3g", n_steps, tau)
    return CovarianceSeries(
        labels=gen.labels,
        frequencies=gen.frequencies,
        times=t0 + indices * tau,
        A=out_A,
        R=out_R,
        min_symplectic=out_min,
    )
