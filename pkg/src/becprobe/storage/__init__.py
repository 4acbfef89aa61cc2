from .manifest import (
    EnvironmentInfo,
    GitInfo,
    ManifestManager,
    RunManifest,
    clear_manifest_cache,
    package_version,
)
from .tables import read_csv, write_csv, write_json, write_matrix

__all__ = [
    "EnvironmentInfo",
    "GitInfo",
    "ManifestManager",
    "RunManifest",
    "clear_manifest_cache",
    "package_version",
    "read_csv",
    "write_csv",
    "write_json",
    "write_matrix",
]
