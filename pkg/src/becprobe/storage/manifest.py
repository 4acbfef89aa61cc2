import datetime
import getpass
import json
import os
import platform
import socket
import subprocess
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict

from ..config import BECPROBE_CONFIG
from ..serialization import ConfigSerializer, JsonValue

_MAX_DIFF_BYTES = 50_000

# Process-wide; only filled when BECPROBE_RECORD_GIT=cached.
_git_info_cache: "GitInfo | None" = None


def clear_manifest_cache() -> None:
    global _git_info_cache
    _git_info_cache = None


def package_version(name: str) -> str:
    try:
        return version(name)
    except PackageNotFoundError:
        return "unknown"


class GitInfo(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)

    commit: str
    branch: str
    remote: str | None
    dirty: bool
    diff: str

    @classmethod
    def ignored(cls) -> "GitInfo":
        return cls(commit="<ignored>", branch="<ignored>", remote=None, dirty=False, diff="")


class EnvironmentInfo(BaseModel):
    """Runtime environment information."""

    model_config = ConfigDict(extra="forbid", strict=True)

    timestamp: str
    command: str
    python_version: str
    executable: str
    platform: str
    hostname: str
    user: str
    pid: int


class RunManifest(BaseModel):
    """Everything needed to identify and reproduce one run."""

    model_config = ConfigDict(extra="forbid", strict=True)

    experiment: str
    preset: str | None
    config: dict[str, JsonValue]
    config_hash: str
    python_def: str
    seed: int | None
    threads: int

    becprobe_version: str
    numpy_version: str
    scipy_version: str

    started_at: str
    runtime_seconds: float
    status: Literal["success", "failed"]
    warnings: list[str]
    outputs: list[str]
    error: str | None

    git: GitInfo
    environment: EnvironmentInfo


class ManifestManager:
    """Collects provenance and reads/writes `manifest.json`."""

    MANIFEST_FILE = "manifest.json"

    @classmethod
    def get_manifest_path(cls, directory: Path) -> Path:
        return directory / cls.MANIFEST_FILE

    @staticmethod
    def run_git_command(args: list[str]) -> str:
        proc = subprocess.run(["git", *args], text=True, capture_output=True, timeout=10)
        # `git diff` exits 1 when there are differences
        if proc.returncode not in (0, 1):
            proc.check_returncode()
        return proc.stdout.strip()

    @classmethod
    def collect_git_info(cls) -> GitInfo:
        """Commit, branch, origin and working-tree diff of the checkout running becprobe."""
        global _git_info_cache

        if BECPROBE_CONFIG.record_git == "ignore":
            return GitInfo.ignored()
        if BECPROBE_CONFIG.cache_git_info and _git_info_cache is not None:
            return _git_info_cache

        try:
            commit = cls.run_git_command(["rev-parse", "HEAD"])
            branch = cls.run_git_command(["rev-parse", "--abbrev-ref", "HEAD"])
        except (subprocess.CalledProcessError, FileNotFoundError) as e:
            raise RuntimeError(
                "Cannot read the git commit for run provenance; "
                "set BECPROBE_RECORD_GIT=ignore outside a git checkout."
            ) from e

        remote: str | None
        try:
            remote = cls.run_git_command(["remote", "get-url", "origin"]) or None
        except (subprocess.CalledProcessError, FileNotFoundError) as e:
            if not BECPROBE_CONFIG.allow_no_git_origin:
                raise RuntimeError(
                    "No git remote 'origin' to record; set BECPROBE_ALLOW_NO_GIT_ORIGIN=1 "
                    "or BECPROBE_RECORD_GIT=ignore."
                ) from e
            remote = None

        diff = cls.run_git_command(["diff", "HEAD"])
        if len(diff) > _MAX_DIFF_BYTES:
            raise ValueError(
                f"Uncommitted changes are too large to record ({len(diff):,} bytes); "
                "commit them or set BECPROBE_RECORD_GIT=ignore."
            )

        info = GitInfo(commit=commit, branch=branch, remote=remote, dirty=bool(diff), diff=diff)
        if BECPROBE_CONFIG.cache_git_info:
            _git_info_cache = info
        return info

    @staticmethod
    def collect_environment_info() -> EnvironmentInfo:
        """Collect environment information."""
        return EnvironmentInfo(
            timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(
                timespec="microseconds"
            ),
            command=" ".join(sys.argv) if sys.argv else "<unknown>",
            python_version=sys.version,
            executable=sys.executable,
            platform=platform.platform(),
            hostname=socket.gethostname(),
            user=getpass.getuser(),
            pid=os.getpid(),
        )

    @classmethod
    def create_manifest(
        cls,
        experiment: object,
        *,
        preset: str | None,
        seed: int | None,
        threads: int,
        started_at: str,
        runtime_seconds: float,
        status: Literal["success", "failed"],
        warnings: list[str],
        outputs: list[str],
        error: str | None = None,
    ) -> RunManifest:
        serialized = ConfigSerializer.to_dict(experiment)
        if not isinstance(serialized, dict):
            raise TypeError(
                f"Expected ConfigSerializer.to_dict to return dict, got {type(serialized)}"
            )
        return RunManifest(
            experiment=ConfigSerializer.get_classname(experiment),
            preset=preset,
            config=serialized,
            config_hash=ConfigSerializer.compute_hash(experiment),
            python_def=ConfigSerializer.to_python(experiment, multiline=False),
            seed=seed,
            threads=threads,
            becprobe_version=package_version("becprobe"),
            numpy_version=package_version("numpy"),
            scipy_version=package_version("scipy"),
            started_at=started_at,
            runtime_seconds=float(runtime_seconds),
            status=status,
            warnings=list(warnings),
            outputs=list(outputs),
            error=error,
            git=cls.collect_git_info(),
            environment=cls.collect_environment_info(),
        )

    @classmethod
    def write_manifest(cls, manifest: RunManifest, directory: Path) -> Path:
        path = cls.get_manifest_path(directory)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest.model_dump(mode="json"), indent=2) + "\n")
        return path

    @classmethod
    def read_manifest(cls, path: Path) -> RunManifest:
        """Read a manifest from a run directory or a manifest file path."""
        manifest_path = path if path.is_file() else cls.get_manifest_path(path)
        if not manifest_path.is_file():
            raise FileNotFoundError(f"Manifest not found: {manifest_path}")
        return RunManifest.model_validate(json.loads(manifest_path.read_text()))

    @classmethod
    def load_config(cls, path: Path) -> JsonValue:
        """Rebuild the experiment config recorded in a manifest."""
        return ConfigSerializer.from_dict(cls.read_manifest(path).config)
