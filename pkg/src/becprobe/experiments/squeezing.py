"""Stroboscopic single-mode squeezing and the correlation maps at its extremes."""

import math

import chz
import numpy as np
from numpy.typing import NDArray

from ..condensate.bogoliubov import BasisConfig
from ..dynamics.exports import export_snapshots, export_time_series
from ..observables.correlations import (
    density_correlation,
    export_momentum_field,
    momentum_correlation,
)
from ..observables.quadratures import optimal_quadrature
from ..probe.config import ProbeConfig
from ..probe.schedule import ProbeSchedule, ScheduleSpec
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import evolve, export_system, prepare, write_density_map


def _squeezing_system() -> SystemConfig:
    return SystemConfig(
        basis=BasisConfig(modes=30),
        probe=ProbeConfig(kappa2=100.0 / (2.0 * math.pi), rayleigh_length=0.2977, pixel_width=0.1),
    )


def _window_times(
    schedule: ProbeSchedule, omega: float, t_end: float, periods: float, samples: int
) -> NDArray[np.float64]:
    """Dense samples over the last `periods` oscillation periods, plus every pulse end and quarter period."""
    start = max(0.0, t_end - periods * 2.0 * math.pi / omega)
    half_width = 0.5 * (schedule.pulse_width or 0.0)
    quarter = 0.5 * math.pi / omega
    extra = [
        t
        for center in schedule.pulse_centers
        for t in (center + half_width, center + quarter)
        if start <= t <= t_end
    ]
    return np.union1d(np.linspace(start, t_end, samples), extra)


class SqueezingExperiment(Experiment):
    """
    Squeezes the schedule's target mode with a pulse train at twice its frequency
    and reports var[x_j] over time, its extremes, the density correlation maps at
    the extremes and (optionally) the momentum correlation map at the minimum.
    """

    system: SystemConfig = chz.field(default_factory=_squeezing_system)
    schedule: ScheduleSpec = chz.field(
        default_factory=lambda: ScheduleSpec(mode="squeezing", target_modes=(1,))
    )
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(t_end=200.0 * math.pi, n_samples=2001))
    window_periods: float = 2.0
    window_samples: int = 401
    map_half_width: float = 6.0
    map_points: int = 241
    momentum_map: bool = True

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.schedule.mode != "squeezing":
            issues.append(("schedule.mode", "squeezing runs use a squeezing schedule"))
        if self.window_periods < 0:
            issues.append(("window_periods", f"must be non-negative, got {self.window_periods}"))
        if self.window_samples < 2:
            issues.append(("window_samples", f"need at least 2 samples, got {self.window_samples}"))
        if self.map_half_width <= 0:
            issues.append(("map_half_width", f"must be positive, got {self.map_half_width}"))
        if self.map_points < 2:
            issues.append(("map_points", f"need at least 2 points, got {self.map_points}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        (j,) = self.schedule.target_modes
        prepared = prepare(self.system, self.schedule, self.timing.t_end)
        export_system(ctx, prepared)
        omega = prepared.frequency(j)
        samples = np.union1d(
            self.timing.sample_times(),
            _window_times(
                prepared.schedule, omega, self.timing.t_end, self.window_periods, self.window_samples
            ),
        )
        series = evolve(prepared, self.timing, samples)
        ctx.track(export_time_series(series, ctx.out_dir, modes=[j], name="squeezing.csv"))

        var_x = series.variance(j, "x")
        i_min, i_max = int(np.argmin(var_x)), int(np.argmax(var_x))
        basis = prepared.basis
        extremes = {"min": i_min, "max": i_max}
        for name, i in extremes.items():
            field = density_correlation(basis, series.state(i))
            write_density_map(
                ctx,
                f"density_{name}.csv",
                field,
                half_width=self.map_half_width,
                points=self.map_points,
                metadata={"t": float(series.times[i]), "var_x": float(var_x[i]), "mode": j},
            )
        ctx.track(export_snapshots(series, ctx.out_dir, [series.times[i_min], series.times[i_max]]))
        if self.momentum_map:
            ctx.track(export_momentum_field(momentum_correlation(basis, series.state(i_min)), ctx.out_dir))

        axis = optimal_quadrature(series.state(i_min), j)
        ctx.write_json(
            "extremes.json",
            {
                "mode": j,
                "omega": omega,
                "kappa2_bar": prepared.couplings.coupling(j, j),
                "pulses": len(prepared.schedule.pulse_centers),
                "pulse_width": prepared.schedule.pulse_width,
                "t_min": float(series.times[i_min]),
                "min_var_x": float(var_x[i_min]),
                "t_max": float(series.times[i_max]),
                "max_var_x": float(var_x[i_max]),
                "squeezing_db": axis.squeezing_db,
                "min_symplectic": float(series.min_symplectic.min()),
            },
        )
