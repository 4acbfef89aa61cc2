"""Environment couplings against optical resolution."""

import chz
import numpy as np

from ..condensate.bogoliubov import export_modes, export_spectrum
from ..probe.couplings import export_couplings, hermite_couplings
from .base import Experiment, RunContext, SystemConfig


class CouplingsExperiment(Experiment):
    """
    kappa2_bar_jj and kappa2_bar_{j, j+offset} against j for each Rayleigh length.
    Deterministic: no time evolution and no seed.
    """

    system: SystemConfig = chz.field(default_factory=SystemConfig)
    rayleigh_lengths: tuple[float, ...] = (0.0, 0.2977, 0.6306, 1.0658)
    offset: int = 2
    write_modes: bool = False

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if not self.rayleigh_lengths or min(self.rayleigh_lengths) < 0:
            issues.append(("rayleigh_lengths", "need at least one non-negative Rayleigh length"))
        if self.offset < 0:
            issues.append(("offset", f"must be non-negative, got {self.offset}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        columns: dict[str, np.ndarray] = {}
        for l_R in self.rayleigh_lengths:
            system = self.system.with_probe(rayleigh_length=l_R, wavelength_nm=None)
            basis, couplings = system.build()
            ctx.track(export_couplings(couplings, system.probe, ctx.out_dir / f"l_R={l_R:g}"))
            labels = np.asarray(basis.labels)
            pairs = [(j, j + self.offset) for j in labels if j + self.offset in basis.labels]
            if not columns:
                columns["j"] = labels.astype(float)
                ctx.track(export_spectrum(basis, ctx.out_dir))
                if self.write_modes:
                    ctx.track(export_modes(basis, ctx.out_dir))
            columns[f"diag_l_R={l_R:g}"] = np.diagonal(couplings.kappa2_bar)
            off = {j: couplings.coupling(j, k) for j, k in pairs}
            columns[f"offdiag_l_R={l_R:g}"] = np.array([off.get(j, np.nan) for j in labels])

        metadata: dict[str, object] = {"offset": self.offset, "kappa2": self.system.probe.kappa2}
        if self.system.trap.interaction == 0 and self.system.probe.calibrate_mode is None:
            J = int(max(columns["j"]))
            reference = hermite_couplings(self.system.probe.kappa2, J)
            rows = columns["j"].astype(int)
            metadata["hermite"] = "noninteracting closed form, comparable to l_R = 0"
            columns["diag_hermite"] = reference[rows, rows]
            columns["offdiag_hermite"] = np.array(
                [reference[j, j + self.offset] if j + self.offset <= J else np.nan for j in rows]
            )
        ctx.write_csv("couplings.csv", columns, metadata=metadata)
