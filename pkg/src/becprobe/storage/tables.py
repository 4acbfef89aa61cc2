"""Plain CSV/JSON writers for run outputs."""

import json
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike


def _json_default(obj: object) -> object:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def write_json(path: Path, data: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=_json_default) + "\n")
    return path


def write_csv(
    path: Path,
    columns: Mapping[str, ArrayLike],
    *,
    metadata: Mapping[str, object] | None = None,
) -> Path:
    """
    Write equal-length columns as CSV.

    `metadata` is emitted as leading `# key: value` comment lines.
    """
    arrays = [np.asarray(v, dtype=float).ravel() for v in columns.values()]
    lengths = {a.size for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    path.parent.mkdir(parents=True, exist_ok=True)
    header_lines = [f"# {key}: {value}" for key, value in (metadata or {}).items()]
    header_lines.append(",".join(columns))
    table = np.column_stack(arrays) if arrays else np.empty((0, 0))
    np.savetxt(
        path,
        table,
        delimiter=",",
        header="\n".join(header_lines),
        comments="",
        fmt="%.17g",
    )
    return path


def write_matrix(
    path: Path,
    matrix: ArrayLike,
    *,
    labels: list[str] | None = None,
    metadata: Mapping[str, object] | None = None,
) -> Path:
    """Write a dense matrix as CSV; `labels` (if given) become the header row."""
    values = np.atleast_2d(np.asarray(matrix, dtype=float))
    path.parent.mkdir(parents=True, exist_ok=True)
    header_lines = [f"# {key}: {value}" for key, value in (metadata or {}).items()]
    if labels is not None:
        header_lines.append(",".join(labels))
    np.savetxt(
        path,
        values,
        delimiter=",",
        header="\n".join(header_lines),
        comments="",
        fmt="%.17g",
    )
    return path


def read_csv(path: Path) -> dict[str, np.ndarray]:
    """Read a file written by `write_csv` back into named columns."""
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    names = lines[0].split(",")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    if data.size == 0:
        return {name: np.empty(0) for name in names}
    return {name: data[:, i] for i, name in enumerate(names)}
