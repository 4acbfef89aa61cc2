"""Continuous probing: quadrature covariances, squeezing axes and subsystem purity."""

import math

import chz
import numpy as np

from ..dynamics.exports import export_snapshots, export_time_series
from ..dynamics.feedback import steady_state_prediction
from ..observables.entanglement import purity
from ..observables.quadratures import optimal_quadrature, quadrature_stats
from ..probe.config import ProbeConfig
from ..probe.schedule import ScheduleSpec
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import evolve, export_system, prepare


def _caption_system() -> SystemConfig:
    return SystemConfig(probe=ProbeConfig(calibrate_mode=1, calibrate_value=1.0))


class CovarianceExperiment(Experiment):
    """
    Second moments of the lowest modes under a probe schedule, plus the squeezing
    ellipse of `ellipse_mode` at the start, at its transient minimum and at the end.
    """

    system: SystemConfig = chz.field(default_factory=_caption_system)
    schedule: ScheduleSpec = chz.field(default_factory=ScheduleSpec)
    timing: RunSpec = chz.field(default_factory=RunSpec)
    report_modes: tuple[int, ...] = (0, 1, 2)
    ellipse_mode: int = 1

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if not self.report_modes:
            issues.append(("report_modes", "name at least one mode"))
        if self.ellipse_mode < 1:
            issues.append(("ellipse_mode", "the squeezing ellipse needs an oscillator mode (j >= 1)"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        prepared = prepare(self.system, self.schedule, self.timing.t_end)
        export_system(ctx, prepared)
        series = evolve(prepared, self.timing)
        labels = prepared.basis.labels
        modes = [j for j in self.report_modes if j in labels]
        skipped = sorted(set(self.report_modes) - set(modes))
        if skipped:
            ctx.warn(f"modes {skipped} are not in the basis and are not reported")
        ctx.track(export_time_series(series, ctx.out_dir, modes=modes))

        j = self.ellipse_mode
        var_x = series.variance(j, "x")
        i_min = int(np.argmin(var_x))
        kappa_tilde = prepared.kappa_tilde(j)
        steady = steady_state_prediction(kappa_tilde)
        indices = [0, i_min, len(series) - 1]
        axes = [optimal_quadrature(series.state(i), j, kappa_tilde=kappa_tilde) for i in indices]
        predicted = optimal_quadrature(kappa_tilde)
        ctx.write_csv(
            "ellipse.csv",
            {
                "t": [series.times[i] for i in indices] + [math.inf],
                "theta": [a.theta for a in axes] + [predicted.theta],
                "min_variance": [a.min_variance for a in axes] + [predicted.min_variance],
                "max_variance": [a.max_variance for a in axes] + [predicted.max_variance],
            },
            metadata={"mode": j, "kappa_tilde": kappa_tilde, "last_row": "steady-state prediction"},
        )
        ctx.track(export_snapshots(series, ctx.out_dir, [series.times[i] for i in indices]))

        final = quadrature_stats(series.final, j)
        ctx.write_json(
            "summary.json",
            {
                "mode": j,
                "omega": prepared.frequency(j),
                "kappa2_bar": prepared.couplings.coupling(j, j),
                "kappa_tilde": kappa_tilde,
                "t_min": float(series.times[i_min]),
                "min_var_x": float(var_x[i_min]),
                "final": {"var_x": final.var_x, "var_p": final.var_p, "cov_xp": final.cov_xp},
                "steady_state_prediction": steady,
                "min_symplectic": float(series.min_symplectic.min()),
            },
        )


class PurityExperiment(Experiment):
    """Purity of the lowest m+1 modes at the end of the run against pixel width l_D."""

    system: SystemConfig = chz.field(default_factory=_caption_system)
    schedule: ScheduleSpec = chz.field(default_factory=ScheduleSpec)
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(t_end=math.pi))
    pixel_widths: tuple[float, ...] = (0.0, 0.1, 0.3, 1.0, 3.0)
    subset_sizes: tuple[int, ...] = (1, 3, 5)

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if not self.pixel_widths or min(self.pixel_widths) < 0:
            issues.append(("pixel_widths", "need at least one non-negative pixel width"))
        if not self.subset_sizes or min(self.subset_sizes) < 1:
            issues.append(("subset_sizes", "subset sizes m must be at least 1"))
        elif max(self.subset_sizes) + 1 > self.system.basis.modes + int(
            not self.system.basis.number_conserving
        ):
            issues.append(("subset_sizes", "largest subset exceeds the number of retained modes"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        l_D_col, m_col, purity_col, t_col = [], [], [], []
        for l_D in self.pixel_widths:
            system = self.system.with_probe(pixel_width=l_D)
            prepared = prepare(system, self.schedule, self.timing.t_end)
            series = evolve(prepared, self.timing)
            export_system(ctx, prepared, f"l_D={l_D:g}")
            ctx.track(export_time_series(series, ctx.out_dir / f"l_D={l_D:g}"))
            final = series.final
            for m in self.subset_sizes:
                modes = list(prepared.basis.labels[: m + 1])
                l_D_col.append(l_D)
                m_col.append(m)
                purity_col.append(purity(final, modes))
                t_col.append(final.t)
        ctx.write_csv(
            "purity.csv",
            {"l_D": l_D_col, "m": m_col, "purity": purity_col, "t": t_col},
        )
