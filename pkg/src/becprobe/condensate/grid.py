"""Uniform spatial grids and kinetic-energy operators in oscillator units."""

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import chz
import numpy as np
from numpy.typing import NDArray

KineticScheme = Literal["sinc_dvr", "fd2"]


@chz.chz
class GridConfig:
    """Symmetric uniform grid over [-half_width, half_width] (units of l_x)."""

    n_points: int = 1024
    half_width: float = 12.0
    kinetic: KineticScheme = "sinc_dvr"

    def validate(self) -> list[tuple[str, str]]:
        issues: list[tuple[str, str]] = []
        if self.n_points < 16:
            issues.append(("n_points", f"need at least 16 points, got {self.n_points}"))
        if self.half_width <= 0:
            issues.append(("half_width", f"must be positive, got {self.half_width}"))
        if self.kinetic not in ("sinc_dvr", "fd2"):
            issues.append(("kinetic", f"unknown scheme {self.kinetic!r}"))
        return issues

    def build(self) -> "SpatialGrid":
        return SpatialGrid(self.n_points, self.half_width, self.kinetic)


@dataclass(frozen=True)
class SpatialGrid:
    n_points: int
    half_width: float
    kinetic: KineticScheme = "sinc_dvr"

    @cached_property
    def points(self) -> NDArray[np.float64]:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def k_max(self) -> float:
        """Nyquist wavenumber of the grid."""
        return np.pi / self.spacing

    def integrate(self, values: NDArray[np.float64], axis: int = -1) -> NDArray[np.float64]:
        return np.sum(values, axis=axis) * self.spacing

    def kinetic_matrix(self) -> NDArray[np.float64]:
        """Dense matrix of -1/2 d^2/dx^2 for the configured scheme."""
        n, dx = self.n_points, self.spacing
        if self.kinetic == "fd2":
            main = np.full(n, 1.0 / dx**2)
            off = np.full(n - 1, -0.5 / dx**2)
            return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
        # Colbert-Miller sinc DVR on an infinite uniform lattice
        idx = np.arange(n)
        diff = idx[:, None] - idx[None, :]
        with np.errstate(divide="ignore"):
            t = np.where(diff == 0, 0.0, 2.0 * (-1.0) ** diff / np.where(diff == 0, 1, diff) ** 2)
        t[idx, idx] = np.pi**2 / 3.0
        return t / (2.0 * dx**2)

    def fft_wavenumbers(self) -> NDArray[np.float64]:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    def refined(self) -> "SpatialGrid":
        """Same extent with the spacing halved."""
        return SpatialGrid(2 * self.n_points - 1, self.half_width, self.kinetic)
