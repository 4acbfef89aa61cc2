"""CSV exports of covariance series, snapshots, ensemble statistics and records."""

from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..storage.tables import write_csv
from .covariance import CovarianceSeries
from .ensemble import EnsembleSummary
from .trajectory import MeasurementRecord


def export_time_series(
    series: CovarianceSeries,
    directory: Path,
    *,
    modes: Sequence[int] | None = None,
    name: str = "covariance.csv",
) -> Path:
    """t plus var_x, var_p, cov_xp and the first moments of each selected mode."""
    columns: dict[str, np.ndarray] = {"t": series.times}
    for label in modes if modes is not None else series.labels:
        row = series.labels.index(label)
        x, p = 2 * row, 2 * row + 1
        columns[f"var_x_{label}"] = series.A[:, x, x]
        columns[f"var_p_{label}"] = series.A[:, p, p]
        columns[f"cov_xp_{label}"] = series.A[:, x, p]
        columns[f"R_x_{label}"] = series.R[:, x]
        columns[f"R_p_{label}"] = series.R[:, p]
    columns["min_symplectic"] = series.min_symplectic
    return write_csv(directory / name, columns)


def export_snapshots(
    series: CovarianceSeries,
    directory: Path,
    times: Sequence[float] | None = None,
    *,
    name: str = "snapshots.csv",
) -> Path:
    """Full covariance matrices, flattened to (t, row, col, value); rows index [x_j, p_j]."""
    if times is None:
        indices = [len(series) - 1]
    else:
        indices = [int(np.argmin(np.abs(series.times - t))) for t in times]
    quadratures = [f"{q}{label}" for label in series.labels for q in ("x", "p")]
    dim = len(quadratures)
    row, col = np.divmod(np.arange(dim * dim), dim)
    t_col, row_col, col_col, values = [], [], [], []
    for i in indices:
        t_col.append(np.full(dim * dim, series.times[i]))
        row_col.append(row)
        col_col.append(col)
        values.append(series.A[i].ravel())
    return write_csv(
        directory / name,
        {
            "t": np.concatenate(t_col),
            "row": np.concatenate(row_col),
            "col": np.concatenate(col_col),
            "value": np.concatenate(values),
        },
        metadata={"index": " ".join(quadratures)},
    )


def export_ensemble(
    summary: EnsembleSummary, directory: Path, *, name: str = "ensemble.csv"
) -> Path:
    columns: dict[str, np.ndarray] = {"t": summary.times}
    sigma2_x, sigma2_p = summary.sigma2_x, summary.sigma2_p
    for col, label in enumerate(summary.labels):
        columns[f"sigma2_x_{label}"] = sigma2_x[:, col]
        columns[f"sigma2_x_se_{label}"] = summary.standard_error(sigma2_x[:, col])
        columns[f"sigma2_p_{label}"] = sigma2_p[:, col]
        columns[f"energy_{label}"] = summary.mean_energy[:, col]
        columns[f"var_x_{label}"] = summary.covariance.variance(label, "x")
    return write_csv(
        directory / name,
        columns,
        metadata={"n_traj": summary.n_traj, "seed": summary.seed},
    )


def export_record(
    record: MeasurementRecord, directory: Path, *, name: str = "record.csv"
) -> Path:
    """One row per (step, pixel): t, pixel, increment."""
    n_steps, n_channels = record.increments.shape
    return write_csv(
        directory / name,
        {
            "t": np.repeat(record.t, n_channels),
            "pixel": np.tile(np.arange(n_channels), n_steps),
            "increment": record.increments.ravel(),
        },
    )
