"""Trajectory ensembles: measurement-induced diffusion, feedback damping and its steady state."""

from typing import Literal

import chz
import numpy as np

from ..condensate.bogoliubov import BasisConfig, build_basis
from ..dynamics.ensemble import EnsembleSetup, EnsembleSummary, run_ensemble
from ..dynamics.exports import export_ensemble
from ..dynamics.feedback import ensemble_steady_state, feedback_energy
from ..probe.config import ProbeConfig
from ..probe.generators import FeedbackSpec
from ..probe.schedule import ScheduleSpec, sample_strength
from .base import Experiment, RunContext, RunSpec, SystemConfig
from .pipeline import PreparedSystem, export_system, prepare


def _diffusion_system() -> SystemConfig:
    return SystemConfig(
        basis=BasisConfig(modes=4, number_conserving=True),
        probe=ProbeConfig(calibrate_mode=1, calibrate_value=1.0),
    )


def _single_mode_system() -> SystemConfig:
    return SystemConfig(basis=BasisConfig(modes=1, number_conserving=True))


def _run(prepared: PreparedSystem, timing: RunSpec, n_traj: int, threads: int) -> EnsembleSummary:
    setup = EnsembleSetup(
        state=prepared.vacuum(),
        gen=prepared.generators,
        schedule=prepared.schedule,
        t_end=timing.t_end,
        dt=timing.dt,
        sample_times=timing.sample_times(),
    )
    return run_ensemble(n_traj, setup, timing.seed, threads=threads)


class EnsembleExperiment(Experiment):
    """
    Undamped and feedback-damped ensembles driven by the same noise realizations.
    Besides the ensemble statistics, the run writes example trajectories of
    `example_mode` and the diffusion reference integral kappa2_bar_jj(t') dt' / 2.
    """

    system: SystemConfig = chz.field(default_factory=_diffusion_system)
    schedule: ScheduleSpec = chz.field(default_factory=lambda: ScheduleSpec(mode="ramp"))
    timing: RunSpec = chz.field(default_factory=RunSpec)
    feedback: FeedbackSpec = chz.field(
        default_factory=lambda: FeedbackSpec(targets=(1, 2, 3), epsilon=1.0)
    )
    n_traj: int = 10_000
    example_mode: int = 3

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.n_traj < 2:
            issues.append(("n_traj", f"need at least 2 trajectories, got {self.n_traj}"))
        if self.example_mode < 1:
            issues.append(("example_mode", "examples follow an oscillator mode (j >= 1)"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        t_end = self.timing.t_end
        undamped = prepare(self.system, self.schedule, t_end)
        damped = prepare(self.system, self.schedule, t_end, self.feedback)
        export_system(ctx, undamped)
        ctx.write_json("feedback.json", {"gains": {str(k): v for k, v in damped.generators.gains.items()}})

        summaries = {
            "undamped": _run(undamped, self.timing, self.n_traj, ctx.threads),
            "damped": _run(damped, self.timing, self.n_traj, ctx.threads),
        }
        for name, summary in summaries.items():
            ctx.track(export_ensemble(summary, ctx.out_dir, name=f"ensemble_{name}.csv"))

        times = summaries["undamped"].times
        strength = sample_strength(undamped.schedule, times)
        integrated = np.array([undamped.schedule.integrated_strength(float(t)) for t in times])
        reference: dict[str, np.ndarray] = {"t": times, "strength": strength}
        for label in undamped.basis.labels:
            kappa2 = undamped.couplings.coupling(label, label)
            reference[f"kappa2_bar_{label}"] = kappa2 * strength
            reference[f"sigma2_reference_{label}"] = 0.5 * kappa2 * integrated
        ctx.write_csv("diffusion_reference.csv", reference)

        if self.example_mode in undamped.basis.labels:
            x = 2 * undamped.basis.index(self.example_mode)
            examples: dict[str, np.ndarray] = {"t": times}
            for name, summary in summaries.items():
                for i, trajectory in enumerate(summary.examples):
                    examples[f"{name}_{i}"] = trajectory[:, x]
            ctx.write_csv("examples.csv", examples, metadata={"mode": self.example_mode, "quadrature": "x"})
        else:
            ctx.warn(f"example mode {self.example_mode} is not in the basis; no examples written")


class FeedbackExperiment(Experiment):
    """
    Single-mode continuous probing with feedback at several kappa_tilde. The ensemble
    steady state (averaged over the second half of the run) is compared with the
    Lyapunov prediction for the same gain.
    """

    system: SystemConfig = chz.field(default_factory=_single_mode_system)
    schedule: ScheduleSpec = chz.field(default_factory=ScheduleSpec)
    timing: RunSpec = chz.field(default_factory=lambda: RunSpec(t_end=10.0, dt=1e-4))
    kappa_tildes: tuple[float, ...] = (0.05, 25.0)
    epsilon: float | Literal["auto"] = "auto"
    mode: int = 1
    n_traj: int = 2000

    def _issues(self) -> list[tuple[str, str]]:
        issues = super()._issues()
        if self.schedule.mode != "continuous":
            issues.append(("schedule.mode", "steady states need continuous probing"))
        if not self.kappa_tildes or min(self.kappa_tildes) <= 0:
            issues.append(("kappa_tildes", "need at least one positive kappa_tilde"))
        if self.mode < 1:
            issues.append(("mode", "feedback needs an oscillator mode (j >= 1)"))
        if self.epsilon != "auto" and float(self.epsilon) <= 0:
            issues.append(("epsilon", f"must be positive or 'auto', got {self.epsilon!r}"))
        if self.n_traj < 2:
            issues.append(("n_traj", f"need at least 2 trajectories, got {self.n_traj}"))
        return issues

    def _run(self, ctx: RunContext) -> None:
        basis = build_basis(self.system.trap, self.system.basis)
        omega = float(basis.frequencies[basis.index(self.mode)])
        epsilon = self.epsilon if self.epsilon == "auto" else float(self.epsilon)
        feedback = FeedbackSpec(targets=(self.mode,), epsilon=epsilon)
        rows: dict[str, list[float]] = {
            name: []
            for name in (
                "kappa_tilde",
                "epsilon",
                "sigma2_x",
                "sigma2_p",
                "energy",
                "sigma2_x_se",
                "predicted_sigma2_x",
                "predicted_sigma2_p",
                "predicted_energy",
            )
        }
        for kappa_tilde in self.kappa_tildes:
            system = self.system.with_probe(calibrate_mode=self.mode, calibrate_value=kappa_tilde * omega)
            prepared = prepare(system, self.schedule, self.timing.t_end, feedback)
            summary = _run(prepared, self.timing, self.n_traj, ctx.threads)
            ctx.track(export_ensemble(summary, ctx.out_dir, name=f"ensemble_kappa={kappa_tilde:g}.csv"))

            gain = prepared.generators.gains[self.mode]
            col = summary.column(self.mode)
            late = summary.times >= 0.5 * self.timing.t_end
            predicted = ensemble_steady_state(kappa_tilde, gain)
            sigma2_x = float(summary.sigma2_x[late, col].mean())
            rows["kappa_tilde"].append(kappa_tilde)
            rows["epsilon"].append(gain)
            rows["sigma2_x"].append(sigma2_x)
            rows["sigma2_p"].append(float(summary.sigma2_p[late, col].mean()))
            rows["energy"].append(float(summary.mean_energy[late, col].mean()))
            rows["sigma2_x_se"].append(float(summary.standard_error(np.asarray(sigma2_x))))
            rows["predicted_sigma2_x"].append(float(predicted[0, 0]))
            rows["predicted_sigma2_p"].append(float(predicted[1, 1]))
            rows["predicted_energy"].append(feedback_energy(kappa_tilde, gain, omega))
        ctx.write_csv("feedback.csv", rows, metadata={"mode": self.mode, "omega": omega})
