"""
Diffraction-limited measurement kernel.

K_alpha(x) = (1/2pi) int dk exp(-(alpha l_R k)^4 / 64 pi^2) exp(ikx), applied on
the grid by FFT with zero padding to twice the grid length.
"""

import numpy as np
from numpy.typing import NDArray

from ..condensate.grid import SpatialGrid
from ..errors import GridResolutionError

MASS_TOL = 1e-6
SINGLE_PASS = 1.0
DOUBLE_PASS = 2.0**0.25


def kernel_weight(alpha: float, l_R: float, k: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.exp(-((alpha * l_R * k) ** 4) / (64.0 * np.pi**2))


def _padded_wavenumbers(grid: SpatialGrid) -> NDArray[np.float64]:
    return 2.0 * np.pi * np.fft.fftfreq(2 * grid.n_points, d=grid.spacing)


def kernel_lags(grid: SpatialGrid) -> NDArray[np.float64]:
    """Lags x - x' at which `diffraction_kernel` is sampled."""
    n = grid.n_points
    return np.arange(-(n - 1), n) * grid.spacing


def diffraction_kernel(alpha: float, l_R: float, grid: SpatialGrid) -> NDArray[np.float64]:
    """
    Kernel samples on `kernel_lags(grid)`, so that a convolution on the grid is
    sum_j K(x_i - x_j) f(x_j) dx.

    Raises GridResolutionError if the kernel mass within the grid extent
    deviates from one by more than 1e-6.
    """
    if l_R < 0:
        raise ValueError(f"Rayleigh length must be non-negative, got {l_R}")
    n, dx = grid.n_points, grid.spacing
    weights = kernel_weight(alpha, l_R, _padded_wavenumbers(grid))
    samples = np.fft.fftshift(np.fft.ifft(weights).real) / dx
    # fftshift puts lag 0 at index n of the 2n samples
    kernel = samples[1 : 2 * n]
    lags = kernel_lags(grid)
    mass = float(np.sum(kernel[np.abs(lags) <= grid.half_width]) * dx)
    if abs(mass - 1.0) > MASS_TOL:
        raise GridResolutionError(
            f"diffraction kernel mass within the grid is {mass:.8f}, not 1",
            hints=["Widen the grid or refine the spacing for this Rayleigh length."],
        )
    return kernel


def apply_kernel(
    alpha: float, l_R: float, grid: SpatialGrid, values: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Convolve each row of `values` with K_alpha (linear, not circular)."""
    if l_R == 0:
        return np.array(values, dtype=float, copy=True)
    diffraction_kernel(alpha, l_R, grid)
    n = grid.n_points
    weights = kernel_weight(alpha, l_R, _padded_wavenumbers(grid))
    spectrum = np.fft.fft(values, n=2 * n, axis=-1)
    return np.fft.ifft(spectrum * weights, axis=-1).real[..., :n]
