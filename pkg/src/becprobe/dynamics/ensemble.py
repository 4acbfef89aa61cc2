"""
Monte Carlo ensembles of conditional trajectories.

Every trajectory owns a generator spawned from the master `SeedSequence` and draws its
Wiener increments in fixed-size chunks, so its noise does not depend on which batch it
lands in. Batch partial sums are reduced in batch order, making the summary independent
of the number of worker threads.
"""

import contextvars
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from ..config import BECPROBE_CONFIG
from ..errors import ConfigValidationError
from ..probe.generators import Generators
from ..probe.schedule import ProbeSchedule
from ..runtime import get_logger
from .covariance import (
    CovarianceSeries,
    StepPlan,
    advance_covariance,
    build_step_plan,
    check_step_size,
)
from .state import GaussianState
from .trajectory import measured_columns

NOISE_CHUNK = 512
MAX_GAIN_BYTES = 2 * 1024**3


@dataclass(frozen=True)
class EnsembleSetup:
    state: GaussianState
    gen: Generators
    schedule: ProbeSchedule
    t_end: float
    dt: float
    sample_times: Sequence[float] | NDArray[np.float64] | None = None
    n_examples: int = 4


@dataclass(frozen=True)
class EnsembleSummary:
    """
    Statistics of trajectory first moments at the sample times.

    `A_ens` is the unbiased covariance of R over trajectories; `covariance` is the
    (shared) conditional covariance of each trajectory.
    """

    n_traj: int
    seed: int | None
    labels: tuple[int, ...]
    frequencies: NDArray[np.float64]
    times: NDArray[np.float64]
    mean_R: NDArray[np.float64]
    A_ens: NDArray[np.float64]
    mean_energy: NDArray[np.float64]
    covariance: CovarianceSeries
    examples: NDArray[np.float64]

    @property
    def sigma2_x(self) -> NDArray[np.float64]:
        return np.diagonal(self.A_ens, axis1=1, axis2=2)[:, 0::2]

    @property
    def sigma2_p(self) -> NDArray[np.float64]:
        return np.diagonal(self.A_ens, axis1=1, axis2=2)[:, 1::2]

    def standard_error(self, variance: NDArray[np.float64]) -> NDArray[np.float64]:
        """Standard error of a sample variance of Gaussian data."""
        return variance * math.sqrt(2.0 / (self.n_traj - 1))

    @property
    def sigma2_x_se(self) -> NDArray[np.float64]:
        return self.standard_error(self.sigma2_x)

    @property
    def A_unconditional(self) -> NDArray[np.float64]:
        return self.covariance.A + self.A_ens

    def column(self, label: int) -> int:
        return self.labels.index(label)


@dataclass
class _GainTable:
    """Per-step propagators and noise gains shared by every trajectory."""

    propagators: list[NDArray[np.float64]]
    gains: list[NDArray[np.float64] | None]
    root_h: NDArray[np.float64]
    samples: list[int | None]
    n_channels: int


def _precompute(setup: EnsembleSetup) -> tuple[_GainTable, CovarianceSeries]:
    gen = setup.gen
    plan: StepPlan = build_step_plan(
        setup.schedule, setup.state.t, setup.t_end, setup.dt, setup.sample_times
    )
    m_p = measured_columns(gen)
    active = sum(1 for step in plan if not step.exact and step.h > 0)
    gain_bytes = active * gen.dim * m_p.shape[1] * 8
    if gain_bytes > MAX_GAIN_BYTES:
        raise ConfigValidationError(
            f"ensemble gain table would need {gain_bytes / 1024**3:.1f} GiB",
            issues=[("basis.modes", f"{len(gen.labels)} modes over {active} probed steps")],
            hints=["Use fewer modes (a number-conserving basis around the targets) or a larger dt."],
        )
    mmt = gen.MMT
    n_samples = plan.sample_times.size
    out_A = np.empty((n_samples, gen.dim, gen.dim))
    out_min = np.empty(n_samples)
    propagators: list[NDArray[np.float64]] = []
    gains: list[NDArray[np.float64] | None] = []
    root_h: list[float] = []
    samples: list[int | None] = []
    A = setup.state.A.copy()
    identity = np.eye(gen.dim)
    for step in plan:
        if step.h > 0:
            propagators.append(plan.damped_propagator(gen, step.h))
            gains.append(None if step.exact else math.sqrt(step.s0) * (A @ m_p))
        else:
            propagators.append(identity)
            gains.append(None)
        root_h.append(math.sqrt(step.h))
        samples.append(step.sample)
        A = advance_covariance(A, step, gen, plan, mmt)
        if step.sample is not None:
            t = float(plan.sample_times[step.sample])
            out_A[step.sample] = A
            out_min[step.sample] = GaussianState(
                R=np.zeros(gen.dim), A=A, t=t, labels=gen.labels
            ).check_physical()
    covariance = CovarianceSeries(
        labels=gen.labels,
        frequencies=gen.frequencies,
        times=plan.sample_times,
        A=out_A,
        R=np.zeros((n_samples, gen.dim)),
        min_symplectic=out_min,
    )
    table = _GainTable(propagators, gains, np.asarray(root_h), samples, m_p.shape[1])
    return table, covariance


@dataclass
class _BatchResult:
    sum_R: NDArray[np.float64]
    sum_RR: NDArray[np.float64]
    examples: NDArray[np.float64]


def _run_batch(
    table: _GainTable,
    R0: NDArray[np.float64],
    seeds: list[np.random.SeedSequence],
    n_samples: int,
    n_examples: int,
) -> _BatchResult:
    rngs = [np.random.default_rng(seed) for seed in seeds]
    size = len(seeds)
    n_examples = min(n_examples, size)
    dim = R0.size
    R = np.tile(R0, (size, 1))
    noise = np.empty((size, NOISE_CHUNK, table.n_channels))
    cursor = NOISE_CHUNK
    sum_R = np.zeros((n_samples, dim))
    sum_RR = np.zeros((n_samples, dim, dim))
    examples = np.zeros((n_examples, n_samples, dim))

    for phi, gain, root_h, sample in zip(
        table.propagators, table.gains, table.root_h, table.samples
    ):
        R = R @ phi.T
        if gain is not None:
            if cursor == NOISE_CHUNK:
                for i, rng in enumerate(rngs):
                    noise[i] = rng.standard_normal((NOISE_CHUNK, table.n_channels))
                cursor = 0
            R += (root_h * noise[:, cursor, :]) @ gain.T
            cursor += 1
        if sample is not None:
            sum_R[sample] = R.sum(axis=0)
            sum_RR[sample] = R.T @ R
            examples[:, sample, :] = R[:n_examples]
    return _BatchResult(sum_R, sum_RR, examples)


def run_ensemble(
    n_traj: int,
    setup: EnsembleSetup,
    seed: int | None,
    threads: int | None = None,
    batch_size: int | None = None,
) -> EnsembleSummary:
    if n_traj < 2:
        raise ConfigValidationError(
            "an ensemble needs at least two trajectories",
            issues=[("n_traj", f"got {n_traj}")],
        )
    if setup.state.labels != setup.gen.labels:
        raise ValueError(
            f"state modes {setup.state.labels} do not match generator modes {setup.gen.labels}"
        )
    setup.state.check_physical()
    check_step_size(setup.gen, setup.schedule, setup.dt)
    threads = threads or BECPROBE_CONFIG.threads
    batch_size = batch_size or BECPROBE_CONFIG.ensemble_batch

    table, covariance = _precompute(setup)
    n_samples = covariance.times.size
    dim = setup.gen.dim
    n_examples = min(setup.n_examples, n_traj)
    children = np.random.SeedSequence(seed).spawn(n_traj)
    batches = [children[i : i + batch_size] for i in range(0, n_traj, batch_size)]
    get_logger().info(
        "running %d trajectories in %d batches on %d threads (%d steps)",
        n_traj,
        len(batches),
        threads,
        len(table.propagators),
    )

    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [
            executor.submit(
                contextvars.copy_context().run,
                _run_batch,
                table,
                setup.state.R,
                batch,
                n_samples,
                n_examples if index == 0 else 0,
            )
            for index, batch in enumerate(batches)
        ]
        results = [future.result() for future in futures]

    sum_R = np.zeros((n_samples, dim))
    sum_RR = np.zeros((n_samples, dim, dim))
    for result in results:
        sum_R += result.sum_R
        sum_RR += result.sum_RR

    mean_R = sum_R / n_traj
    second = sum_RR / n_traj
    A_ens = (sum_RR - n_traj * np.einsum("ti,tj->tij", mean_R, mean_R)) / (n_traj - 1)
    A_ens = 0.5 * (A_ens + np.transpose(A_ens, (0, 2, 1)))
    diag = np.diagonal(second, axis1=1, axis2=2)
    mean_energy = 0.5 * setup.gen.frequencies[None, :] * (diag[:, 0::2] + diag[:, 1::2])

    return EnsembleSummary(
        n_traj=n_traj,
        seed=seed,
        labels=setup.gen.labels,
        frequencies=setup.gen.frequencies,
        times=covariance.times,
        mean_R=mean_R,
        A_ens=A_ens,
        mean_energy=mean_energy,
        covariance=replace(covariance, R=mean_R),
        examples=results[0].examples,
    )
