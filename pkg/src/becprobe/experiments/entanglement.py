"""Stroboscopic two-mode entanglement against pixel width and probing time."""

import math

import chz
import numpy as np

from ..dynamics.exports import export_time_series
from ..observables.entanglement import distinguishability, log_negativity, qnd_entanglement_limit
from ..probe.config import ProbeConfig
from ..probe.schedule import ScheduleSpec
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import evolve, export_system, prepare


def _entangling_system() -> SystemConfig:
    return SystemConfig(probe=ProbeConfig(kappa2=30.0 / (2.0 * math.pi), rayleigh_length=0.2977))


def _k2_distinguishability(K2: np.ndarray, a: int, b: int) -> float:
    if K2[a, a] <= 0 or K2[b, b] <= 0:
        return 0.0
    return min(abs(K2[a, b]) / math.sqrt(K2[a, a] * K2[b, b]), 1.0)


class EntanglementExperiment(Experiment):
    """
    Log negativity of the schedule's target pair, sampled over time for each pixel
    width. With `periods` set the run lasts that many periods of the pulse train
    and `timing.t_end` is ignored.
    """

    system: SystemConfig = chz.field(default_factory=_entangling_system)
    schedule: ScheduleSpec = chz.field(
        default_factory=lambda: ScheduleSpec(mode="entangling", target_modes=(1, 3))
    )
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(n_samples=401))
    periods: float | None = 40.0
    pixel_widths: tuple[float, ...] = tuple(0.25 * i for i in range(13))

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.schedule.mode != "entangling":
            issues.append(("schedule.mode", "entanglement runs use an entangling schedule"))
        if self.periods is not None and self.periods <= 0:
            issues.append(("periods", f"must be positive, got {self.periods}"))
        if not self.pixel_widths or min(self.pixel_widths) < 0:
            issues.append(("pixel_widths", "need at least one non-negative pixel width"))
        return issues

    def _timing(self, varpi: float) -> RunSpec:
        if self.periods is None:
            return self.timing
        return chz.replace(self.timing, t_end=self.periods * 2.0 * math.pi / varpi)

    def _run(self, ctx: RunContext) -> None:
        j, k = self.schedule.target_modes
        l_D_col, t_col, e_col = [], [], []
        final_rows: dict[str, list[float]] = {
            name: []
            for name in ("l_D", "E_final", "E_max", "beta", "E_qnd", "beta_K2", "E_qnd_K2")
        }
        for l_D in self.pixel_widths:
            system = self.system.with_probe(pixel_width=l_D)
            basis, _ = system.build()
            varpi = float(basis.frequencies[basis.index(j)] + basis.frequencies[basis.index(k)])
            timing = self._timing(varpi)
            prepared = prepare(system, self.schedule, timing.t_end)
            series = evolve(prepared, timing)
            subdir = f"l_D={l_D:g}"
            export_system(ctx, prepared, subdir)
            ctx.track(export_time_series(series, ctx.out_dir / subdir, modes=[j, k]))

            negativity = np.array([log_negativity(series.state(i), (j, k)) for i in range(len(series))])
            l_D_col.append(np.full(len(series), l_D))
            t_col.append(series.times)
            e_col.append(negativity)

            couplings = prepared.couplings
            beta = distinguishability(couplings, j, k)
            beta_K2 = _k2_distinguishability(couplings.K2, couplings.index(j), couplings.index(k))
            final_rows["l_D"].append(l_D)
            final_rows["E_final"].append(float(negativity[-1]))
            final_rows["E_max"].append(float(negativity.max()))
            final_rows["beta"].append(beta)
            final_rows["E_qnd"].append(qnd_entanglement_limit(beta))
            final_rows["beta_K2"].append(beta_K2)
            final_rows["E_qnd_K2"].append(qnd_entanglement_limit(beta_K2))

        metadata = {"modes": f"{j} {k}", "periods": self.periods}
        ctx.write_csv(
            "entanglement.csv",
            {"l_D": np.concatenate(l_D_col), "t": np.concatenate(t_col), "E": np.concatenate(e_col)},
            metadata=metadata,
        )
        ctx.write_csv("entanglement_final.csv", final_rows, metadata=metadata)
