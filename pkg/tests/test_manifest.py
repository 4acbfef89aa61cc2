import chz
import pytest

import becprobe
from becprobe.experiments import Experiment, RunContext, RunSpec
from becprobe.storage import ManifestManager
from becprobe.storage.manifest import GitInfo, clear_manifest_cache


class Seeded(Experiment):
    timing: RunSpec = chz.field(default_factory=RunSpec)
    value: float = 1.5

    def _run(self, ctx: RunContext) -> None:
        draw = ctx.rng_seed_sequence.generate_state(1)[0]
        ctx.write_csv("draws.csv", {"seed": [ctx.seed], "draw": [int(draw)]})


def test_manifest_records_config_and_provenance(becprobe_tmp_root) -> None:
    obj = Seeded(value=2.5)
    directory = obj.run(preset="demo", threads=3)

    assert directory == becprobe_tmp_root / "runs" / "demo" / obj.config_hash
    manifest = ManifestManager.read_manifest(directory)
    assert manifest.experiment == "test_manifest.Seeded"
    assert manifest.preset == "demo"
    assert manifest.config_hash == obj.config_hash
    assert manifest.config["value"] == 2.5
    assert manifest.seed == 0
    assert manifest.threads == 3
    assert manifest.status == "success"
    assert manifest.error is None
    assert manifest.outputs == ["draws.csv"]
    assert manifest.git == GitInfo.ignored()
    assert manifest.runtime_seconds >= 0
    assert "Seeded(" in manifest.python_def


def test_manifest_roundtrip_rebuilds_the_experiment(becprobe_tmp_root) -> None:
    obj = Seeded(value=4.0).with_seed(11)
    directory = obj.run()

    rebuilt = ManifestManager.load_config(directory / "manifest.json")
    assert rebuilt == obj
    assert rebuilt.seed == 11
    assert rebuilt.config_hash == obj.config_hash


def test_same_seed_writes_identical_tables(becprobe_tmp_root, tmp_path) -> None:
    a = Seeded().with_seed(5).run(out=tmp_path / "a")
    b = Seeded().with_seed(5).run(out=tmp_path / "b")
    c = Seeded().with_seed(6).run(out=tmp_path / "c")
    assert (a / "draws.csv").read_text() == (b / "draws.csv").read_text()
    assert (a / "draws.csv").read_text() != (c / "draws.csv").read_text()


def test_read_manifest_raises_when_missing(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        ManifestManager.read_manifest(tmp_path / "missing")


def test_collect_git_info_requires_git(monkeypatch) -> None:
    clear_manifest_cache()

    def boom(_args):
        raise FileNotFoundError("git")

    monkeypatch.setattr(ManifestManager, "run_git_command", boom)
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "record_git", "uncached")
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "allow_no_git_origin", False)

    with pytest.raises(RuntimeError, match="BECPROBE_RECORD_GIT=ignore"):
        ManifestManager.collect_git_info()


def test_collect_git_info_allows_missing_origin(monkeypatch) -> None:
    clear_manifest_cache()

    def fake(args: list[str]) -> str:
        if args[0] == "remote":
            raise FileNotFoundError("no origin")
        return "abc123" if args == ["rev-parse", "HEAD"] else "main" if args[0] == "rev-parse" else ""

    monkeypatch.setattr(ManifestManager, "run_git_command", fake)
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "record_git", "uncached")
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "allow_no_git_origin", True)

    info = ManifestManager.collect_git_info()
    assert info == GitInfo(
        commit="abc123",
        branch="main",
        remote=None,
        dirty=False,
        diff="",
    )


def test_cached_git_info_is_collected_once(monkeypatch) -> None:
    clear_manifest_cache()
    calls: list[list[str]] = []

    def fake(args: list[str]) -> str:
        calls.append(args)
        return "+ kappa2 = 2.0" if args[0] == "diff" else "x"

    monkeypatch.setattr(ManifestManager, "run_git_command", fake)
    monkeypatch.setattr(becprobe.BECPROBE_CONFIG, "record_git", "cached")

    first = ManifestManager.collect_git_info()
    second = ManifestManager.collect_git_info()
    clear_manifest_cache()

    assert first is second
    assert first.dirty
    assert len(calls) == 4
