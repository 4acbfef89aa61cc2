"""Shipped presets and resolution of CONFIG arguments into experiments."""

import tomllib
from collections.abc import Sequence
from importlib.resources import files
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict

from ..errors import ConfigValidationError
from ..serialization import ConfigSerializer, JsonValue, parse_override, set_dotted
from ..storage import ManifestManager
from .base import Experiment


class PresetInfo(BaseModel):
    """One row of `becprobe presets`."""

    model_config = ConfigDict(extra="forbid", strict=True)

    name: str
    experiment: str
    description: str
    provenance: str


def _preset_files() -> dict[str, Any]:
    root = files("becprobe") / "presets"
    return {
        entry.name.removesuffix(".toml"): entry
        for entry in root.iterdir()
        if entry.name.endswith(".toml")
    }


def _read_document(text: str, source: str) -> dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigValidationError(f"cannot parse {source}: {e}") from e


def _config_table(document: dict[str, Any], source: str) -> dict[str, JsonValue]:
    config = document.get("config", document)
    if not isinstance(config, dict) or ConfigSerializer.CLASS_MARKER not in config:
        raise ConfigValidationError(
            f"{source} has no experiment config",
            hints=[f"Put the experiment under a [config] table with a {ConfigSerializer.CLASS_MARKER} key."],
        )
    return config


def list_presets() -> list[PresetInfo]:
    """All shipped presets, sorted by name."""
    rows = []
    for name, entry in sorted(_preset_files().items()):
        document = _read_document(entry.read_text(), f"preset {name}")
        meta = document.get("preset", {})
        rows.append(
            PresetInfo(
                name=name,
                experiment=_config_table(document, name)[ConfigSerializer.CLASS_MARKER].rpartition(".")[2],
                description=str(meta.get("description", "")),
                provenance=str(meta.get("provenance", "")),
            )
        )
    return rows


def load_preset(name: str) -> dict[str, JsonValue]:
    """Serialized config of a shipped preset."""
    presets = _preset_files()
    if name not in presets:
        raise ConfigValidationError(
            f"unknown preset {name!r}",
            hints=[f"Available presets: {', '.join(sorted(presets))}"],
        )
    return _config_table(_read_document(presets[name].read_text(), f"preset {name}"), name)


def _load_source(source: str) -> tuple[dict[str, JsonValue], str | None]:
    path = Path(source)
    if path.suffix == ".toml" and path.is_file():
        return _config_table(_read_document(path.read_text(), str(path)), str(path)), None
    if path.name == ManifestManager.MANIFEST_FILE or path.is_dir():
        try:
            manifest = ManifestManager.read_manifest(path)
        except (FileNotFoundError, ValueError) as e:
            raise ConfigValidationError(f"cannot read manifest from {path}: {e}") from e
        return dict(manifest.config), manifest.preset
    if path.suffix == ".toml":
        raise ConfigValidationError(f"config file not found: {path}")
    return load_preset(source), source


def resolve_config(source: str, overrides: Sequence[str] = ()) -> tuple[Experiment, str | None]:
    """
    Turn a CONFIG argument (preset name, TOML file, manifest or run directory) plus
    `key=value` overrides into an experiment. Returns the experiment and the preset
    name it came from, if any.
    """
    data, preset = _load_source(source)
    issues: list[tuple[str, str]] = []
    for text in overrides:
        try:
            key, value = parse_override(text)
            set_dotted(data, key, value)
        except (KeyError, ValueError) as e:
            issues.append((text, str(e).strip("'\"")))
    if issues:
        raise ConfigValidationError("invalid overrides", issues=issues)

    try:
        experiment = ConfigSerializer.from_dict(data)
    except (TypeError, ValueError, AttributeError, ImportError) as e:
        raise ConfigValidationError(f"cannot build config from {source}: {e}") from e
    if not isinstance(experiment, Experiment):
        raise ConfigValidationError(
            f"{source} does not describe an experiment (got {type(experiment).__name__})"
        )
    return experiment, preset
