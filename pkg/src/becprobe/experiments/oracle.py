"""Convergence of the discrete measure-and-evolve pipeline to the Riccati equation."""

import chz
import numpy as np

from ..condensate.bogoliubov import BasisConfig
from ..dynamics.exports import export_time_series
from ..dynamics.oracle import run_oracle
from ..probe.config import ProbeConfig
from ..probe.schedule import ScheduleSpec
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import evolve, export_system, prepare


def _two_mode_system() -> SystemConfig:
    return SystemConfig(
        basis=BasisConfig(modes=2, number_conserving=True),
        probe=ProbeConfig(calibrate_mode=1, calibrate_value=1.0),
    )


class OracleExperiment(Experiment):
    """
    Runs the discrete pipeline for each tau, measures the largest covariance deviation
    from the RK4 Riccati solution at the sample times and fits the observed order.
    With `stochastic`, outcomes are sampled from `timing.seed`; otherwise they are
    set to their means (the covariance does not depend on them).
    """

    system: SystemConfig = chz.field(default_factory=_two_mode_system)
    schedule: ScheduleSpec = chz.field(default_factory=ScheduleSpec)
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(t_end=1.0, dt=1e-3, n_samples=11))
    taus: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    stochastic: bool = False

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if len(self.taus) < 2 or min(self.taus) <= 0:
            issues.append(("taus", "need at least two positive step lengths"))
        for tau in self.taus:
            steps = self.timing.t_end / tau if tau > 0 else 0.0
            if tau > 0 and abs(steps - round(steps)) > 1e-6:
                issues.append(("taus", f"tau = {tau} does not divide t_end = {self.timing.t_end}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        prepared = prepare(self.system, self.schedule, self.timing.t_end)
        export_system(ctx, prepared)
        times = self.timing.sample_times()
        reference = evolve(prepared, self.timing, times)
        ctx.track(export_time_series(reference, ctx.out_dir, name="riccati.csv"))

        seed = self.timing.seed if self.stochastic else None
        errors = []
        for tau in self.taus:
            series = run_oracle(
                prepared.vacuum(),
                prepared.generators,
                prepared.schedule,
                self.timing.t_end,
                tau,
                seed=seed,
                sample_times=times,
            )
            ctx.track(export_time_series(series, ctx.out_dir, name=f"oracle_tau={tau:g}.csv"))
            errors.append(float(np.max(np.abs(series.A - reference.A))))

        slope = float(np.polyfit(np.log(self.taus), np.log(errors), 1)[0])
        ctx.write_csv("convergence.csv", {"tau": self.taus, "max_error": errors})
        ctx.write_json(
            "convergence.json",
            {"observed_order": slope, "taus": list(self.taus), "max_errors": errors},
        )
