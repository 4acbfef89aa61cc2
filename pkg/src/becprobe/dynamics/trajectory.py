"""Stochastic first moments of a single conditional trajectory."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..probe.generators import Generators
from ..probe.schedule import ProbeSchedule
from .covariance import (
    CovarianceSeries,
    PlannedStep,
    StepPlan,
    advance_covariance,
    build_step_plan,
    check_step_size,
)
from .state import GaussianState


@dataclass(frozen=True)
class MeasurementRecord:
    """Homodyne increments dY_d = sqrt(s) (M_p^T R)_d dt + dW_d, one row per active step."""

    t: NDArray[np.float64]
    dt: NDArray[np.float64]
    increments: NDArray[np.float64]

    @property
    def n_channels(self) -> int:
        return self.increments.shape[1]

    def integrated(self) -> NDArray[np.float64]:
        return np.cumsum(self.increments, axis=0)


@dataclass(frozen=True)
class TrajectoryResult:
    covariance: CovarianceSeries
    R: NDArray[np.float64]
    record: MeasurementRecord | None
    seed: int | None

    @property
    def times(self) -> NDArray[np.float64]:
        return self.covariance.times

    def state(self, i: int) -> GaussianState:
        return GaussianState(
            R=self.R[i],
            A=self.covariance.A[i],
            t=float(self.times[i]),
            labels=self.covariance.labels,
        )


def measured_columns(gen: Generators) -> NDArray[np.float64]:
    """M restricted to its measurement channels, shape (dim, n_channels)."""
    return gen.M[:, gen.channels]


def advance_trajectory_mean(
    R: NDArray[np.float64],
    A_start: NDArray[np.float64],
    step: PlannedStep,
    gen: Generators,
    plan: StepPlan,
    m_p: NDArray[np.float64],
    dW: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Euler-Maruyama step of R with the drift taken exactly, expm(-D h) R.

    Returns the new R and the record increment.
    """
    drifted = plan.damped_propagator(gen, step.h) @ R
    if step.exact:
        return drifted, np.zeros(m_p.shape[1])
    root_s = np.sqrt(step.s0)
    increment = root_s * (m_p.T @ R) * step.h + dW
    R_new = drifted + root_s * (A_start @ (m_p @ dW))
    return R_new, increment


def evolve_trajectory(
    state: GaussianState,
    gen: Generators,
    schedule: ProbeSchedule,
    t_end: float,
    dt: float,
    seed: int | np.random.SeedSequence | None,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
    record: bool = True,
) -> TrajectoryResult:
    """
    dR = -D R dt + sqrt(s) A M dW with independent Wiener increments per detector channel.

    A is co-integrated on the shared step plan and never consumes random numbers.
    """
    if state.labels != gen.labels:
        raise ValueError(f"state modes {state.labels} do not match generator modes {gen.labels}")
    m_p = measured_columns(gen)
    if m_p.shape[0] != gen.dim:
        raise ValueError(f"M has {m_p.shape[0]} rows but the state has dimension {gen.dim}")
    state.check_physical()
    check_step_size(gen, schedule, dt)
    rng = np.random.default_rng(seed)
    plan = build_step_plan(schedule, state.t, t_end, dt, sample_times)
    mmt = gen.MMT
    n_samples = plan.sample_times.size
    out_A = np.empty((n_samples, gen.dim, gen.dim))
    out_R = np.empty((n_samples, gen.dim))
    out_min = np.empty(n_samples)
    record_t: list[float] = []
    record_dt: list[float] = []
    record_dy: list[NDArray[np.float64]] = []

    A = state.A.copy()
    R = state.R.copy()
    for step in plan:
        if step.h > 0:
            dW = (
                np.zeros(m_p.shape[1])
                if step.exact
                else rng.normal(scale=np.sqrt(step.h), size=m_p.shape[1])
            )
            R, dy = advance_trajectory_mean(R, A, step, gen, plan, m_p, dW)
            if record and not step.exact:
                record_t.append(step.t0)
                record_dt.append(step.h)
                record_dy.append(dy)
        A = advance_covariance(A, step, gen, plan, mmt)
        if step.sample is not None:
            t = float(plan.sample_times[step.sample])
            out_A[step.sample] = A
            out_R[step.sample] = R
            out_min[step.sample] = GaussianState(R=R, A=A, t=t, labels=gen.labels).check_physical()

    measurement = None
    if record:
        measurement = MeasurementRecord(
            t=np.asarray(record_t),
            dt=np.asarray(record_dt),
            increments=np.asarray(record_dy).reshape(len(record_dy), m_p.shape[1]),
        )
    covariance = CovarianceSeries(
        labels=gen.labels,
        frequencies=gen.frequencies,
        times=plan.sample_times,
        A=out_A,
        R=out_R,
        min_symplectic=out_min,
    )
    return TrajectoryResult(
        covariance=covariance,
        R=out_R,
        record=measurement,
        seed=seed if isinstance(seed, int) else None,
    )
