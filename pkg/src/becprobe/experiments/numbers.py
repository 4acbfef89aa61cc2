"""Atom-number fluctuations in three adjacent regions under a Gaussian probe beam."""

import math

import chz
import numpy as np

from ..condensate.bogoliubov import build_basis
from ..dynamics.exports import export_time_series
from ..dynamics.state import GaussianState
from ..observables.correlations import RegionSpec, density_correlation, region_number_statistics
from ..probe.config import GaussianBeam, ProbeConfig
from ..probe.schedule import ScheduleSpec
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import evolve, export_system, prepare


def _gated_system() -> SystemConfig:
    return SystemConfig(
        probe=ProbeConfig(
            rayleigh_length=0.2977,
            pixel_width=0.05,
            profile=GaussianBeam(width=0.2977),
            calibrate_mode=0,
            calibrate_value=1.5,
        )
    )


class NumberStatisticsExperiment(Experiment):
    """
    The central region R2 has the width l_G of the probe beam, l_G = factor * l_R.
    Reports var[N2] / N2^0 and cov[N1, N3] / N0 after probing and for the unprobed
    condensate, time traces for `trace_factors`, and an unprobed scan of R2 widths
    up to the whole grid.
    """

    system: SystemConfig = chz.field(default_factory=_gated_system)
    schedule: ScheduleSpec = chz.field(default_factory=ScheduleSpec)
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(t_end=1.5 * math.pi))
    gate_factors: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
    trace_factors: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    unprobed_points: int = 60

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.system.probe.resolved_rayleigh_length() <= 0:
            issues.append(("system.probe.rayleigh_length", "gate widths are multiples of l_R > 0"))
        if not self.gate_factors or min(self.gate_factors) <= 0:
            issues.append(("gate_factors", "need at least one positive gate factor"))
        if any(f <= 0 for f in self.trace_factors):
            issues.append(("trace_factors", "trace factors must be positive"))
        if self.unprobed_points < 2:
            issues.append(("unprobed_points", f"need at least 2 points, got {self.unprobed_points}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        l_R = self.system.probe.resolved_rayleigh_length()
        factors = sorted({*self.gate_factors, *self.trace_factors})
        final: dict[str, list[float]] = {
            name: []
            for name in (
                "factor",
                "l_G",
                "var_N2",
                "covar_N1_N3",
                "unprobed_var_N2",
                "unprobed_covar_N1_N3",
            )
        }
        trace: dict[str, list[np.ndarray]] = {"factor": [], "t": [], "var_N2": [], "covar_N1_N3": []}

        for factor in factors:
            l_G = factor * l_R
            system = self.system.with_probe(profile=GaussianBeam(width=l_G))
            prepared = prepare(system, self.schedule, self.timing.t_end)
            basis = prepared.basis
            mf = basis.mean_field
            regions = RegionSpec.centered(l_G, basis.grid)
            vacuum = region_number_statistics(density_correlation(basis, prepared.vacuum()), mf, regions)

            track_trace = factor in self.trace_factors
            series = evolve(prepared, self.timing)
            subdir = f"l_G={l_G:.6g}"
            export_system(ctx, prepared, subdir)
            ctx.track(export_time_series(series, ctx.out_dir / subdir))
            indices = range(len(series)) if track_trace else [len(series) - 1]
            stats = [
                region_number_statistics(density_correlation(basis, series.state(i)), mf, regions)
                for i in indices
            ]
            if factor in self.gate_factors:
                final["factor"].append(factor)
                final["l_G"].append(l_G)
                final["var_N2"].append(stats[-1].var_N2_normalized)
                final["covar_N1_N3"].append(stats[-1].covar_N1_N3_normalized)
                final["unprobed_var_N2"].append(vacuum.var_N2_normalized)
                final["unprobed_covar_N1_N3"].append(vacuum.covar_N1_N3_normalized)
            if track_trace:
                trace["factor"].append(np.full(len(series), factor))
                trace["t"].append(series.times)
                trace["var_N2"].append(np.array([s.var_N2_normalized for s in stats]))
                trace["covar_N1_N3"].append(np.array([s.covar_N1_N3_normalized for s in stats]))

        metadata = {"l_R": l_R, "t_end": self.timing.t_end}
        ctx.write_csv("numbers.csv", final, metadata=metadata)
        if trace["t"]:
            ctx.write_csv(
                "numbers_trace.csv",
                {name: np.concatenate(parts) for name, parts in trace.items()},
                metadata=metadata,
            )
        self._unprobed_scan(ctx)

    def _unprobed_scan(self, ctx: RunContext) -> None:
        basis = build_basis(self.system.trap, self.system.basis)
        grid, mf = basis.grid, basis.mean_field
        field = density_correlation(basis, GaussianState.vacuum(basis.labels))
        widths = np.linspace(
            0.5 * self.system.probe.resolved_rayleigh_length(),
            2.0 * grid.half_width - grid.spacing,
            self.unprobed_points,
        )
        stats = [region_number_statistics(field, mf, RegionSpec.centered(w, grid)) for w in widths]
        ctx.write_csv(
            "unprobed_scan.csv",
            {
                "width": widths,
                "var_N2": [s.var_N2_normalized for s in stats],
                "covar_N1_N3": [s.covar_N1_N3_normalized for s in stats],
            },
            metadata={"zero_mode": basis.includes_zero_mode},
        )

