import datetime
import inspect
import math
import time
import traceback
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Self

import chz
import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..condensate.bogoliubov import BasisConfig, BogoliubovBasis, build_basis
from ..condensate.meanfield import TrapConfig
from ..config import BECPROBE_CONFIG
from ..errors import ConfigValidationError, ExperimentError
from ..probe.config import ProbeConfig
from ..probe.couplings import CouplingSet, build_couplings
from ..runtime import enter_run, format_traceback, get_logger, record_warning
from ..serialization import ConfigSerializer, JsonValue
from ..storage import ManifestManager, write_csv, write_json, write_matrix


def prefixed(prefix: str, issues: Sequence[tuple[str, str]]) -> list[tuple[str, str]]:
    return [(f"{prefix}.{name}", problem) for name, problem in issues]


@chz.chz
class SystemConfig:
    """Condensate, mode basis and probe shared by every experiment."""

    trap: TrapConfig = chz.field(default_factory=TrapConfig)
    basis: BasisConfig = chz.field(default_factory=BasisConfig)
    probe: ProbeConfig = chz.field(default_factory=ProbeConfig)

    def validate(self) -> list[tuple[str, str]]:
        return [
            *prefixed("trap", self.trap.validate()),
            *prefixed("basis", self.basis.validate(self.trap)),
            *prefixed("probe", self.probe.validate()),
        ]

    def with_probe(self, **changes: Any) -> "SystemConfig":
        return chz.replace(self, probe=chz.replace(self.probe, **changes))

    def build(self) -> tuple[BogoliubovBasis, CouplingSet]:
        basis = build_basis(self.trap, self.basis)
        return basis, build_couplings(basis, self.probe)


@chz.chz
class RunSpec:
    """Time span, integrator step, output sampling and master seed."""

    t_end: float = 2.0 * math.pi
    dt: float = 1e-3
    n_samples: int = 201
    seed: int = 0

    def sample_times(self) -> NDArray[np.float64]:
        return np.linspace(0.0, self.t_end, self.n_samples)

    def validate(self) -> list[tuple[str, str]]:
        issues: list[tuple[str, str]] = []
        if self.t_end <= 0:
            issues.append(("t_end", f"must be positive, got {self.t_end}"))
        if self.dt <= 0:
            issues.append(("dt", f"must be positive, got {self.dt}"))
        elif self.t_end > 0 and self.dt > self.t_end:
            issues.append(("dt", f"step {self.dt} is longer than the run ({self.t_end})"))
        if self.n_samples < 2:
            issues.append(("n_samples", f"need at least 2 output samples, got {self.n_samples}"))
        if self.seed < 0:
            issues.append(("seed", f"must be non-negative, got {self.seed}"))
        return issues


@dataclass
class RunContext:
    """What an experiment body sees while it runs: its directory, threads and seed."""

    out_dir: Path
    threads: int
    seed: int | None
    outputs: list[Path] = field(default_factory=list)

    @property
    def rng_seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def track(self, *paths: Path | Sequence[Path]) -> None:
        for item in paths:
            for path in [item] if isinstance(item, Path) else item:
                if path not in self.outputs:
                    self.outputs.append(path)

    def write_csv(
        self,
        name: str,
        columns: Mapping[str, ArrayLike],
        *,
        metadata: Mapping[str, object] | None = None,
    ) -> Path:
        path = write_csv(self.path(name), columns, metadata=metadata)
        self.track(path)
        return path

    def write_matrix(
        self,
        name: str,
        matrix: ArrayLike,
        *,
        labels: list[str] | None = None,
        metadata: Mapping[str, object] | None = None,
    ) -> Path:
        path = write_matrix(self.path(name), matrix, labels=labels, metadata=metadata)
        self.track(path)
        return path

    def write_json(self, name: str, data: Mapping[str, Any]) -> Path:
        path = write_json(self.path(name), data)
        self.track(path)
        return path

    def warn(self, message: str) -> None:
        record_warning(message)

    def relative_outputs(self) -> list[str]:
        return sorted(
            str(p.relative_to(self.out_dir)) if p.is_relative_to(self.out_dir) else str(p)
            for p in self.outputs
        )


class Experiment(ABC):
    """
    Base class for runnable experiment configurations.

    Subclasses are chz classes (applied automatically) and implement `_run(ctx)`,
    writing their tables through the run context. `run()` resolves the run
    directory from the config hash, routes logs there and records a manifest.
    """

    def __init_subclass__(cls, **kwargs: object) -> None:
        super().__init_subclass__(**kwargs)
        annotations = inspect.get_annotations(cls)
        if annotations:
            type.__setattr__(cls, "__annotations__", dict(annotations))
        chz.chz(cls)

    @classmethod
    def _namespace(cls) -> Path:
        module = getattr(cls, "__module__", None)
        qualname = getattr(cls, "__qualname__", cls.__name__)
        if not module or module == "__main__":
            raise ValueError(
                "Cannot derive an experiment namespace from __main__; "
                "define the class in an importable module."
            )
        if "<locals>" in qualname:
            raise ValueError(
                "Cannot derive an experiment namespace for a local class; define it at module scope."
            )
        return Path(*module.split("."), *qualname.split("."))

    @abstractmethod
    def _run(self, ctx: RunContext) -> None:
        """Compute and write the experiment outputs."""
        raise NotImplementedError

    def _issues(self) -> list[tuple[str, str]]:
        """Schema issues of the config; subclasses add their own checks."""
        issues: list[tuple[str, str]] = []
        for name in chz.chz_fields(self):
            value = getattr(self, name)
            validate = getattr(value, "validate", None)
            if callable(validate) and chz.is_chz(value) and name != "system":
                issues.extend(prefixed(name, validate()))
        system = getattr(self, "system", None)
        if isinstance(system, SystemConfig):
            issues.extend(prefixed("system", system.validate()))
        return issues

    def validate_config(self) -> list[tuple[str, str]]:
        return self._issues()

    @property
    def config_hash(self) -> str:
        return ConfigSerializer.compute_hash(self)

    @property
    def seed(self) -> int | None:
        spec = getattr(self, "timing", None)
        return spec.seed if isinstance(spec, RunSpec) else None

    def with_seed(self, seed: int) -> Self:
        spec = getattr(self, "timing", None)
        if not isinstance(spec, RunSpec):
            get_logger().warning(
                "%s is deterministic; ignoring seed %d", self.__class__.__name__, seed
            )
            return self
        return chz.replace(self, timing=chz.replace(spec, seed=seed))

    def run_dir(self, preset: str | None = None) -> Path:
        base = Path(preset) if preset else self._namespace()
        return BECPROBE_CONFIG.get_root() / base / self.config_hash

    def to_dict(self) -> JsonValue:
        return ConfigSerializer.to_dict(self)

    def to_python(self, multiline: bool = True) -> str:
        return ConfigSerializer.to_python(self, multiline=multiline)

    def _is_complete(self, directory: Path) -> bool:
        path = ManifestManager.get_manifest_path(directory)
        if not path.is_file():
            return False
        try:
            return ManifestManager.read_manifest(path).status == "success"
        except ValueError:
            return False

    def run(
        self,
        *,
        preset: str | None = None,
        threads: int | None = None,
        out: Path | None = None,
        force: bool = False,
    ) -> Path:
        """Run (or reuse) the experiment and return its run directory."""
        issues = self.validate_config()
        if issues:
            raise ConfigValidationError(
                f"invalid {self.__class__.__name__} configuration",
                issues=issues,
                hints=["Run `becprobe validate` on the config for the full report."],
            )
        directory = (out if out is not None else self.run_dir(preset)).resolve()
        logger = get_logger()
        if not force and self._is_complete(directory):
            logger.info(
                "run: %s %s already complete in %s", self.__class__.__name__, self.config_hash, directory
            )
            return directory

        n_threads = threads if threads is not None else BECPROBE_CONFIG.threads
        ctx = RunContext(out_dir=directory, threads=n_threads, seed=self.seed)
        started_at = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        start = time.perf_counter()
        directory.mkdir(parents=True, exist_ok=True)

        with enter_run(directory) as warnings:
            logger.debug(
                "run: begin %s %s %s", self.__class__.__name__, self.config_hash, directory
            )
            try:
                self._run(ctx)
            except Exception as e:
                logger.error(
                    "run failed %s %s %s",
                    self.__class__.__name__,
                    self.config_hash,
                    directory,
                    extra={"becprobe_file_only": True},
                )
                logger.error("%s", format_traceback(e), extra={"becprobe_file_only": True})
                manifest = ManifestManager.create_manifest(
                    self,
                    preset=preset,
                    seed=self.seed,
                    threads=n_threads,
                    started_at=started_at,
                    runtime_seconds=time.perf_counter() - start,
                    status="failed",
                    warnings=warnings,
                    outputs=ctx.relative_outputs(),
                    error=f"{type(e).__name__}: {e}",
                )
                ManifestManager.write_manifest(manifest, directory)
                raise ExperimentError(
                    f"{self.__class__.__name__} failed",
                    directory,
                    e,
                    recorded_traceback="".join(traceback.format_exception(e)),
                ) from e

            runtime = time.perf_counter() - start
            manifest = ManifestManager.create_manifest(
                self,
                preset=preset,
                seed=self.seed,
                threads=n_threads,
                started_at=started_at,
                runtime_seconds=runtime,
                status="success",
                warnings=warnings,
                outputs=ctx.relative_outputs(),
            )
            ManifestManager.write_manifest(manifest, directory)
            logger.info(
                "run ok %s %s (%.1f s, %d outputs)",
                self.__class__.__name__,
                self.config_hash,
                runtime,
                len(ctx.outputs),
                extra={"becprobe_console_only": True},
            )
        return directory
