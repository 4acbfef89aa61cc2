"""
Deterministic evolution of the conditional covariance.

The Riccati equation

    dA/dt = s(t) E - D0 A - A D0^T - s(t) A M M^T A

is integrated with fixed-step RK4 wherever the probe is on; intervals with zero
strength are propagated exactly with expm(-D0 dt). Trajectories and ensembles walk the
same `StepPlan`, so their A(t) agrees bit-for-bit with `evolve_covariance`.
"""

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from ..errors import PhysicalityError, StepSizeError
from ..probe.generators import Generators
from ..probe.schedule import ProbeSchedule
from ..runtime import get_logger, record_warning
from .state import GaussianState

STEP_WARN = 0.01
STEP_FAIL = 1.0
MIN_PULSE_STEPS = 20
DEFAULT_SAMPLES = 201


@dataclass(frozen=True)
class PlannedStep:
    """One integrator step from `t0` of length `h`; `exact` steps have zero strength."""

    t0: float
    h: float
    s0: float
    s_mid: float
    s1: float
    exact: bool
    sample: int | None = None


@dataclass
class StepPlan:
    steps: list[PlannedStep]
    sample_times: NDArray[np.float64]
    # expm propagators keyed by step length.
    _bare: dict[float, NDArray[np.float64]] = field(default_factory=dict)
    _damped: dict[float, NDArray[np.float64]] = field(default_factory=dict)

    def __iter__(self) -> Iterator[PlannedStep]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def bare_propagator(self, gen: Generators, h: float) -> NDArray[np.float64]:
        if h not in self._bare:
            self._bare[h] = scipy.linalg.expm(-gen.D0 * h)
        return self._bare[h]

    def damped_propagator(self, gen: Generators, h: float) -> NDArray[np.float64]:
        if h not in self._damped:
            self._damped[h] = scipy.linalg.expm(-gen.D * h)
        return self._damped[h]


def _resolve_sample_times(
    t_start: float, t_end: float, sample_times: Sequence[float] | NDArray[np.float64] | None
) -> NDArray[np.float64]:
    if sample_times is None:
        return np.linspace(t_start, t_end, DEFAULT_SAMPLES)
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("sample_times must be a non-empty 1-D sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample_times must be strictly increasing")
    if times[0] < t_start - 1e-12 or times[-1] > t_end + 1e-12:
        raise ValueError(f"sample_times must lie in [{t_start}, {t_end}]")
    return times


def check_step_size(gen: Generators, schedule: ProbeSchedule, dt: float) -> float:
    """dt * max(omega_max, K2_max * s_max); warns above 0.01, raises above 1."""
    s_max = max((max(seg.m_start, seg.m_end) for seg in schedule.segments), default=0.0)
    k2 = np.diag(gen.MMT)[0::2]
    rate = max(
        float(np.max(np.abs(gen.frequencies), initial=0.0)),
        float(np.max(k2, initial=0.0)) * s_max,
        float(np.max(np.diag(gen.D), initial=0.0)),
    )
    bound = dt * rate
    if bound > STEP_FAIL:
        raise StepSizeError(
            f"dt = {dt:.3g} is far beyond the stable step (dt * rate = {bound:.3g})",
            hints=[f"Use dt <= {STEP_WARN / rate:.3g} for the requested modes and probe strength."],
        )
    if bound > STEP_WARN:
        record_warning(
            f"dt * max(omega, K2) = {bound:.3g} exceeds {STEP_WARN}; results may be inaccurate"
        )
    return bound


def build_step_plan(
    schedule: ProbeSchedule,
    t_start: float,
    t_end: float,
    dt: float,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
) -> StepPlan:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end <= t_start:
        raise ValueError(f"t_end ({t_end}) must be after the initial time ({t_start})")
    times = _resolve_sample_times(t_start, t_end, sample_times)
    edges = {t_start, t_end, *(float(t) for t in times)}
    edges.update(t for t in schedule.breakpoints(t_end) if t_start < t < t_end)
    edges_sorted = sorted(edges)
    sample_of = {float(t): i for i, t in enumerate(times)}

    steps: list[PlannedStep] = []
    first_sample = sample_of.get(t_start)
    if first_sample is not None:
        steps.append(PlannedStep(t_start, 0.0, 0.0, 0.0, 0.0, True, first_sample))
    for t0, t1 in zip(edges_sorted[:-1], edges_sorted[1:]):
        width = t1 - t0
        if width <= 0:
            continue
        segment = schedule.segment_at(0.5 * (t0 + t1))
        sample = sample_of.get(t1)
        if segment is None or segment.is_zero or schedule.is_off(t0, t1):
            steps.append(PlannedStep(t0, width, 0.0, 0.0, 0.0, True, sample))
            continue
        n = math.ceil(width / dt - 1e-9)
        if schedule.pulse_width is not None:
            n = max(n, math.ceil(MIN_PULSE_STEPS * width / schedule.pulse_width - 1e-9))
        h = width / n
        for i in range(n):
            a = t0 + i * h
            b = t1 if i == n - 1 else a + h
            steps.append(
                PlannedStep(
                    a,
                    b - a,
                    segment.value(a),
                    segment.value(0.5 * (a + b)),
                    segment.value(b),
                    False,
                    sample if i == n - 1 else None,
                )
            )
    return StepPlan(steps=steps, sample_times=times)


def riccati_rhs(
    A: NDArray[np.float64], strength: float, gen: Generators, mmt: NDArray[np.float64]
) -> NDArray[np.float64]:
    drift = gen.D0 @ A
    return strength * gen.E - drift - drift.T - strength * (A @ mmt @ A)


def advance_covariance(
    A: NDArray[np.float64],
    step: PlannedStep,
    gen: Generators,
    plan: StepPlan,
    mmt: NDArray[np.float64],
) -> NDArray[np.float64]:
    if step.h == 0:
        return A
    if step.exact:
        phi = plan.bare_propagator(gen, step.h)
        out = phi @ A @ phi.T
    else:
        h = step.h
        k1 = riccati_rhs(A, step.s0, gen, mmt)
        k2 = riccati_rhs(A + 0.5 * h * k1, step.s_mid, gen, mmt)
        k3 = riccati_rhs(A + 0.5 * h * k2, step.s_mid, gen, mmt)
        k4 = riccati_rhs(A + h * k3, step.s1, gen, mmt)
        out = A + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = 0.5 * (out + out.T)
    if not np.all(np.isfinite(out)):
        raise PhysicalityError(
            f"covariance became non-finite at t={step.t0 + step.h:.6g}",
            time=step.t0 + step.h,
            hints=["Reduce dt."],
        )
    return out


@dataclass(frozen=True)
class CovarianceSeries:
    """Sampled covariance and first moments; R is the unconditional mean unless stochastic."""

    labels: tuple[int, ...]
    frequencies: NDArray[np.float64]
    times: NDArray[np.float64]
    A: NDArray[np.float64]
    R: NDArray[np.float64]
    min_symplectic: NDArray[np.float64]

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> GaussianState:
        return GaussianState(R=self.R[i], A=self.A[i], t=float(self.times[i]), labels=self.labels)

    @property
    def final(self) -> GaussianState:
        return self.state(len(self) - 1)

    def nearest(self, t: float) -> GaussianState:
        return self.state(int(np.argmin(np.abs(self.times - t))))

    def variance(self, label: int, quadrature: str = "x") -> NDArray[np.float64]:
        row = self.labels.index(label)
        idx = 2 * row + (0 if quadrature == "x" else 1)
        return self.A[:, idx, idx]

    def covariance(self, label: int) -> NDArray[np.float64]:
        row = self.labels.index(label)
        return self.A[:, 2 * row, 2 * row + 1]


def _check_initial(state: GaussianState, gen: Generators) -> None:
    if state.labels != gen.labels:
        raise ValueError(f"state modes {state.labels} do not match generator modes {gen.labels}")
    state.check_physical()


def evolve_covariance(
    state: GaussianState,
    gen: Generators,
    schedule: ProbeSchedule,
    t_end: float,
    dt: float,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
) -> CovarianceSeries:
    """Integrate A (and the unconditional mean of R) from `state.t` to `t_end`."""
    _check_initial(state, gen)
    check_step_size(gen, schedule, dt)
    plan = build_step_plan(schedule, state.t, t_end, dt, sample_times)
    mmt = gen.MMT
    n_samples = plan.sample_times.size
    out_A = np.empty((n_samples, gen.dim, gen.dim))
    out_R = np.empty((n_samples, gen.dim))
    out_min = np.empty(n_samples)

    A = state.A.copy()
    R = state.R.copy()
    for step in plan:
        if step.h > 0:
            R = _advance_mean(R, step, gen, plan)
        A = advance_covariance(A, step, gen, plan, mmt)
        if step.sample is not None:
            t = float(plan.sample_times[step.sample])
            out_A[step.sample] = A
            out_R[step.sample] = R
            out_min[step.sample] = GaussianState(R=R, A=A, t=t, labels=gen.labels).check_physical()

    get_logger().debug(
        "evolved covariance over %d steps to t=%.4g (min symplectic eigenvalue %.6f)",
        len(plan),
        t_end,
        float(out_min.min()),
    )
    return CovarianceSeries(
        labels=gen.labels,
        frequencies=gen.frequencies,
        times=plan.sample_times,
        A=out_A,
        R=out_R,
        min_symplectic=out_min,
    )


def _advance_mean(
    R: NDArray[np.float64], step: PlannedStep, gen: Generators, plan: StepPlan
) -> NDArray[np.float64]:
    return plan.damped_propagator(gen, step.h) @ R


def evolve_unconditional(
    state: GaussianState,
    gen: Generators,
    schedule: ProbeSchedule,
    t_end: float,
    dt: float,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
) -> CovarianceSeries:
    """Covariance with back-action noise but no information gain (records discarded)."""
    return evolve_covariance(state, gen.without_measurement(), schedule, t_end, dt, sample_times)
