"""Shared wiring from a system config to generators, schedules and covariance runs."""

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..condensate.bogoliubov import BogoliubovBasis, export_spectrum
from ..dynamics.covariance import CovarianceSeries, evolve_covariance
from ..dynamics.state import GaussianState
from ..errors import ConfigValidationError
from ..observables.correlations import CorrelationField
from ..probe.couplings import CouplingSet, export_couplings
from ..probe.generators import FeedbackSpec, Generators, assemble_generators
from ..probe.schedule import ProbeSchedule, ScheduleSpec, export_schedule
from .base import RunContext, RunSpec, SystemConfig


@dataclass(frozen=True)
class PreparedSystem:
    system: SystemConfig
    basis: BogoliubovBasis
    couplings: CouplingSet
    generators: Generators
    schedule: ProbeSchedule

    def vacuum(self) -> GaussianState:
        return GaussianState.vacuum(self.basis.labels)

    def frequency(self, label: int) -> float:
        return float(self.basis.frequencies[self.basis.index(label)])

    def kappa_tilde(self, label: int) -> float:
        return self.couplings.coupling(label, label) / self.frequency(label)


def prepare(
    system: SystemConfig,
    schedule: ScheduleSpec,
    t_end: float,
    feedback: FeedbackSpec | None = None,
) -> PreparedSystem:
    basis, couplings = system.build()
    missing = [j for j in schedule.target_modes if j not in basis.labels]
    if missing:
        raise ConfigValidationError(
            f"schedule targets modes {missing} outside the basis",
            issues=[("schedule.target_modes", f"retained modes are {basis.labels[0]}..{basis.labels[-1]}")],
        )
    frequencies = [float(basis.frequencies[basis.index(j)]) for j in schedule.target_modes]
    return PreparedSystem(
        system=system,
        basis=basis,
        couplings=couplings,
        generators=assemble_generators(basis, couplings, feedback),
        schedule=schedule.build(frequencies, t_end),
    )


def evolve(
    prepared: PreparedSystem,
    timing: RunSpec,
    sample_times: Sequence[float] | NDArray[np.float64] | None = None,
) -> CovarianceSeries:
    times = timing.sample_times() if sample_times is None else sample_times
    return evolve_covariance(
        prepared.vacuum(), prepared.generators, prepared.schedule, timing.t_end, timing.dt, times
    )


def export_system(ctx: RunContext, prepared: PreparedSystem, subdir: str = "") -> Path:
    """Spectrum, coupling matrices and the schedule of one run, under `subdir`."""
    directory = ctx.out_dir / subdir if subdir else ctx.out_dir
    ctx.track(
        export_spectrum(prepared.basis, directory),
        export_couplings(prepared.couplings, prepared.system.probe, directory),
        export_schedule(prepared.schedule, directory),
    )
    return directory


def write_density_map(
    ctx: RunContext,
    name: str,
    field: CorrelationField,
    *,
    half_width: float,
    points: int,
    metadata: dict[str, object] | None = None,
) -> Path:
    """Total density correlation on `points` grid points spread over |x| <= half_width."""
    inside = np.flatnonzero(np.abs(field.x) <= half_width)
    take = inside[np.unique(np.linspace(0, inside.size - 1, min(points, inside.size)).round().astype(int))]
    values = field.total()[np.ix_(take, take)]
    return ctx.write_matrix(
        name,
        values,
        labels=[f"{x:.6g}" for x in field.x[take]],
        metadata={"poisson": field.includes_poisson, **(metadata or {})},
    )
