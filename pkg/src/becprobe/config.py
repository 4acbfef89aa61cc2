import os
from pathlib import Path
from typing import Literal, cast


RecordGitMode = Literal["ignore", "cached", "uncached"]


class BecprobeConfig:
    """Central configuration for becprobe runs."""

    DEFAULT_ROOT_DIR = Path("becprobe-data")

    def __init__(self):
        def _get_base_root() -> Path:
            env = os.getenv("BECPROBE_PATH")
            if env:
                return Path(env).expanduser().resolve()
            project_root = self._find_project_root(fallback_to_cwd=True)
            return (project_root / self.DEFAULT_ROOT_DIR).resolve()

        self.base_root = _get_base_root()
        self.threads = self._parse_positive_int(
            "BECPROBE_THREADS", os.getenv("BECPROBE_THREADS"), min(8, os.cpu_count() or 1)
        )
        self.ensemble_batch = self._parse_positive_int(
            "BECPROBE_ENSEMBLE_BATCH", os.getenv("BECPROBE_ENSEMBLE_BATCH"), 256
        )
        self.gpe_max_iter = self._parse_positive_int(
            "BECPROBE_GPE_MAX_ITER", os.getenv("BECPROBE_GPE_MAX_ITER"), 20_000
        )
        self.record_git = self._parse_record_git(
            os.getenv("BECPROBE_RECORD_GIT", "cached")
        )
        self.allow_no_git_origin = self._parse_bool(
            os.getenv("BECPROBE_ALLOW_NO_GIT_ORIGIN", "0")
        )
        if self.allow_no_git_origin and self.record_git == "ignore":
            raise ValueError(
                "BECPROBE_ALLOW_NO_GIT_ORIGIN cannot be enabled when BECPROBE_RECORD_GIT=ignore"
            )

    @staticmethod
    def _parse_bool(value: str) -> bool:
        return value.strip().lower() in {"1", "true", "yes"}

    @staticmethod
    def _parse_positive_int(name: str, value: str | None, default: int) -> int:
        if value is None or not value.strip():
            return default
        try:
            parsed = int(value)
        except ValueError as e:
            raise ValueError(f"{name} must be a positive integer, got {value!r}") from e
        if parsed < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
        return parsed

    @classmethod
    def _parse_record_git(cls, value: str) -> RecordGitMode:
        normalized = value.strip().lower()
        allowed = {"ignore", "cached", "uncached"}
        if normalized not in allowed:
            raise ValueError(
                "BECPROBE_RECORD_GIT must be one of 'ignore', 'cached', or 'uncached'"
            )
        return cast(RecordGitMode, normalized)

    @property
    def cache_git_info(self) -> bool:
        """Collect git provenance once per process instead of once per run."""
        return self.record_git == "cached"

    def get_root(self) -> Path:
        """Directory under which run bundles are written."""
        return self.base_root / "runs"

    @staticmethod
    def _find_project_root(
        start: Path | None = None, *, fallback_to_cwd: bool = False
    ) -> Path:
        base = (start or Path.cwd()).resolve()
        git_root: Path | None = None
        for path in (base, *base.parents):
            if (path / "pyproject.toml").is_file():
                return path
            if git_root is None and (path / ".git").exists():
                git_root = path
        if git_root is not None:
            return git_root
        if fallback_to_cwd:
            return base
        raise ValueError(
            "Cannot locate pyproject.toml or .git to determine the project root. "
            "Set BECPROBE_PATH to override."
        )


BECPROBE_CONFIG = BecprobeConfig()


def get_becprobe_root() -> Path:
    return BECPROBE_CONFIG.get_root()


def set_becprobe_root(path: Path) -> None:
    BECPROBE_CONFIG.base_root = path.resolve()
