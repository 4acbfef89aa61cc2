"""
Second-order density and momentum correlations of the Bogoliubov fluctuations.

With delta Phi(x) = sum_j [f-_j(x) x_j + i f+_j(x) p_j], the normal-ordered density
covariance is

    N(x1, x2) = -2 psi(x1) psi(x2) sum_j f-_j(x1) [f+_j(x2) - 2 sum_k f-_k(x2) cov(x_j, x_k)]

(symmetrized). The Poissonian channel psi(x1)^2 delta(x1 - x2) is kept separately so
region integrals pick up exactly the integral of n0.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ..condensate.bogoliubov import BogoliubovBasis
from ..condensate.grid import SpatialGrid
from ..condensate.meanfield import MeanField
from ..dynamics.state import GaussianState
from ..errors import AliasingError, NumericalError
from ..runtime import record_warning
from ..storage.tables import write_csv, write_matrix

TRUNCATION_THRESHOLD = 0.01
TAIL_FRACTION = 0.1
ALIASING_THRESHOLD = 0.01


@dataclass(frozen=True)
class RegionSpec:
    """Three adjacent intervals R1 = [left, a), R2 = [a, b), R3 = [b, right]."""

    left: float
    a: float
    b: float
    right: float

    @classmethod
    def centered(cls, width: float, grid: SpatialGrid) -> "RegionSpec":
        """R2 of width `width` centred on the trap, R1 and R3 the rest of the grid."""
        if width <= 0 or width >= 2.0 * grid.half_width:
            raise ValueError(f"gate width must lie in (0, {2.0 * grid.half_width}), got {width}")
        return cls(-grid.half_width, -0.5 * width, 0.5 * width, grid.half_width)

    def validate(self, grid: SpatialGrid) -> None:
        if not self.left <= self.a <= self.b <= self.right:
            raise ValueError(f"regions must be ordered, got {self}")
        edge = grid.half_width + 0.5 * grid.spacing
        if self.left < -edge or self.right > edge:
            raise ValueError(
                f"regions [{self.left}, {self.right}] extend beyond the grid [-{grid.half_width}, {grid.half_width}]"
            )

    def weights(self, grid: SpatialGrid) -> NDArray[np.float64]:
        """(3, n) overlap length of each grid cell with each region; rows sum to the cell size."""
        self.validate(grid)
        x, dx = grid.points, grid.spacing
        lo, hi = x - 0.5 * dx, x + 0.5 * dx
        # Regions reaching the grid ends absorb the half cells beyond the outer points.
        left = -np.inf if self.left <= x[0] + 1e-12 else self.left
        right = np.inf if self.right >= x[-1] - 1e-12 else self.right
        bounds = [(left, self.a), (self.a, self.b), (self.b, right)]
        out = np.empty((3, x.size))
        for i, (start, stop) in enumerate(bounds):
            out[i] = np.clip(np.minimum(hi, stop) - np.maximum(lo, start), 0.0, None)
        return out


@dataclass(frozen=True)
class CorrelationField:
    """
    N(x1, x2) on the grid product.

    `poisson` holds n0(x) of the delta channel (None when excluded). `projector` is the
    number-conserving correction -n0(x1) n0(x2) / N0 of that channel, set whenever the
    zero mode is absent. The projector is part of the delta channel: it is applied exactly
    when the delta term is, here and in `region_number_statistics`.
    """

    x: NDArray[np.float64]
    spacing: float
    values: NDArray[np.float64]
    poisson: NDArray[np.float64] | None
    projector: NDArray[np.float64] | None

    @property
    def includes_poisson(self) -> bool:
        return self.poisson is not None

    def total(self) -> NDArray[np.float64]:
        """Dense matrix with the delta channel on the diagonal as n0 / dx."""
        out = self.values.copy()
        if self.poisson is not None:
            out[np.diag_indices_from(out)] += self.poisson / self.spacing
        if self.poisson is not None and self.projector is not None:
            out += self.projector
        return out


def _state_rows(basis: BogoliubovBasis, state: GaussianState) -> NDArray[np.intp]:
    missing = [label for label in state.labels if label not in basis.labels]
    if missing:
        raise ValueError(f"state modes {missing} are not in the basis")
    return np.array([basis.index(label) for label in state.labels], dtype=np.intp)


def _fluctuation_kernel(
    f_minus: NDArray[np.float64],
    f_plus: NDArray[np.float64],
    cov_xx: NDArray[np.float64],
    rows: slice | NDArray[np.intp],
) -> NDArray[np.float64]:
    """sum over j in rows of f-_j(x1) [f+_j(x2) - 2 sum_k cov_jk f-_k(x2)]."""
    inner = f_plus[rows] - 2.0 * cov_xx[rows] @ f_minus
    return f_minus[rows].T @ inner


def density_correlation(
    basis: BogoliubovBasis, state: GaussianState, include_poisson: bool = True
) -> CorrelationField:
    rows = _state_rows(basis, state)
    f_minus = basis.f_minus[rows]
    f_plus = basis.f_plus[rows]
    cov_xx = state.A[0::2, 0::2]
    psi = basis.mean_field.psi
    weight = -2.0 * np.outer(psi, psi)

    kernel = _fluctuation_kernel(f_minus, f_plus, cov_xx, slice(None))
    values = weight * kernel
    values = 0.5 * (values + values.T)

    excited = [i for i, label in enumerate(state.labels) if label != 0]
    n_tail = max(1, int(round(TAIL_FRACTION * len(excited))))
    if len(excited) > n_tail:
        tail_rows = np.array(sorted(excited, key=lambda i: state.labels[i])[-n_tail:])
        tail = weight * _fluctuation_kernel(f_minus, f_plus, cov_xx, tail_rows)
        tail = 0.5 * (tail + tail.T)
        sampled = slice(None, None, max(1, values.shape[0] // 64))
        ratio = float(np.max(np.abs(tail[sampled, sampled]), initial=0.0)) / max(
            float(np.max(np.abs(values[sampled, sampled]), initial=0.0)), 1e-300
        )
        if ratio > TRUNCATION_THRESHOLD:
            record_warning(
                f"highest {n_tail} modes contribute {ratio:.1%} of the density correlations; "
                "the mode sum may be truncated"
            )

    poisson = basis.mean_field.density.copy() if include_poisson else None
    projector = None
    if 0 not in state.labels:
        n0 = basis.mean_field.density
        projector = -np.outer(n0, n0) / basis.mean_field.N0
    return CorrelationField(
        x=basis.grid.points,
        spacing=basis.grid.spacing,
        values=values,
        poisson=poisson,
        projector=projector,
    )


@dataclass(frozen=True)
class RegionStatistics:
    """Atom-number moments of the three regions; `covariance` is 3x3 over (N1, N2, N3)."""

    regions: RegionSpec
    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]
    N0: float

    @property
    def var_N2(self) -> float:
        return float(self.covariance[1, 1])

    @property
    def covar_N1_N3(self) -> float:
        return float(self.covariance[0, 2])

    @property
    def N2_0(self) -> float:
        return float(self.mean[1])

    @property
    def var_N2_normalized(self) -> float:
        return self.var_N2 / self.N2_0

    @property
    def covar_N1_N3_normalized(self) -> float:
        return self.covar_N1_N3 / self.N0


def region_number_statistics(
    field: CorrelationField, mf: MeanField, regions: RegionSpec
) -> RegionStatistics:
    """
    var N2 = int_R2 n0 + double int_R2xR2 N and cov(N1, N3) = double int_R1xR3 N.

    Counting statistics always carry the delta channel, taken from the mean field, so its
    projector is added even when the field was built with include_poisson=False.
    """
    W = regions.weights(mf.grid)
    n0 = mf.density
    mean = W @ n0
    cov = W @ field.values @ W.T + np.diag(mean)
    if field.projector is not None:
        cov += W @ field.projector @ W.T
    return RegionStatistics(regions=regions, mean=mean, covariance=0.5 * (cov + cov.T), N0=mf.N0)


@dataclass(frozen=True)
class MomentumField:
    """Deviation of cov[m(k1), m(k2)] from Poissonian statistics."""

    k: NDArray[np.float64]
    values: NDArray[np.float64]
    density: NDArray[np.float64]


def _fourier(
    values: NDArray[np.float64], x: NDArray[np.float64], dx: float, k: NDArray[np.float64]
) -> NDArray[np.complex128]:
    """int dx e^{ikx} f(x) / sqrt(2 pi) for each row of `values`."""
    phase = np.exp(1j * np.outer(x, k))
    return values @ phase * (dx / math.sqrt(2.0 * math.pi))


def _check_aliasing(functions: NDArray[np.float64], grid: SpatialGrid) -> None:
    power = np.abs(np.fft.fft(functions, axis=-1)) ** 2
    k = np.abs(grid.fft_wavenumbers())
    high = power[:, k > 0.5 * grid.k_max].sum(axis=-1)
    total = power.sum(axis=-1)
    fraction = np.where(total > 0, high / np.where(total > 0, total, 1.0), 0.0)
    if fraction.max() > ALIASING_THRESHOLD:
        raise AliasingError(
            f"{fraction.max():.1%} of a mode's spectral mass lies above half the Nyquist wavenumber",
            hints=["Increase trap.grid.n_points or reduce basis.modes."],
        )


def _default_wavenumbers(functions: NDArray[np.float64], grid: SpatialGrid) -> NDArray[np.float64]:
    power = np.abs(np.fft.fft(functions, axis=-1)) ** 2
    k = grid.fft_wavenumbers()
    order = np.argsort(np.abs(k))
    cumulative = np.cumsum(power[:, order].sum(axis=0))
    cut = np.abs(k[order])[np.searchsorted(cumulative, 0.9999 * cumulative[-1])]
    return np.linspace(-cut, cut, 201)


def momentum_correlation(
    basis: BogoliubovBasis,
    state: GaussianState,
    k: NDArray[np.float64] | None = None,
) -> MomentumField:
    """
    M(k1, k2) = psi~(k1) psi~(k2) [w(k1)^T A w(k2) - Re Gamma(k1, k2)]

    with w_j = (2 Re F-_j, -2 Im F+_j) interleaved like A and
    Gamma = sum_j F-_j(k1) conj(F+_j(k2)) + F+_j(k1) conj(F-_j(k2)).
    """
    rows = _state_rows(basis, state)
    grid = basis.grid
    psi = basis.mean_field.psi
    f_minus, f_plus = basis.f_minus[rows], basis.f_plus[rows]
    functions = np.vstack([psi, f_minus, f_plus])
    _check_aliasing(functions, grid)
    if k is None:
        k = _default_wavenumbers(functions, grid)
    k = np.asarray(k, dtype=float)
    if np.max(np.abs(k), initial=0.0) > grid.k_max:
        raise AliasingError(
            f"requested |k| up to {np.max(np.abs(k)):.3g} beyond the grid Nyquist {grid.k_max:.3g}"
        )

    x, dx = grid.points, grid.spacing
    psi_k = _fourier(psi[None, :], x, dx, k)[0]
    if np.max(np.abs(psi_k.imag), initial=0.0) > 1e-8 * np.max(np.abs(psi_k), initial=1.0):
        raise NumericalError("momentum correlations assume a real, even ground state")
    psi_k = psi_k.real
    F_minus = _fourier(f_minus, x, dx, k)
    F_plus = _fourier(f_plus, x, dx, k)

    w = np.empty((2 * rows.size, k.size))
    w[0::2] = 2.0 * F_minus.real
    w[1::2] = -2.0 * F_plus.imag
    gamma = (F_minus.T @ F_plus.conj() + F_plus.T @ F_minus.conj()).real
    values = np.outer(psi_k, psi_k) * (w.T @ state.A @ w - gamma)
    values = 0.5 * (values + values.T)
    return MomentumField(k=k, values=values, density=psi_k**2)


def export_correlation_field(
    field: CorrelationField, directory: Path, *, name: str = "density_correlation"
) -> list[Path]:
    """Dense matrix plus (x1, x2, value) triplets."""
    x1, x2 = np.meshgrid(field.x, field.x, indexing="ij")
    total = field.total()
    metadata = {"poisson": field.includes_poisson, "dx": field.spacing}
    return [
        write_matrix(directory / f"{name}_matrix.csv", total, metadata=metadata),
        write_csv(
            directory / f"{name}.csv",
            {"x1": x1.ravel(), "x2": x2.ravel(), "value": total.ravel()},
            metadata=metadata,
        ),
    ]


def export_momentum_field(
    field: MomentumField, directory: Path, *, name: str = "momentum_correlation"
) -> list[Path]:
    k1, k2 = np.meshgrid(field.k, field.k, indexing="ij")
    return [
        write_matrix(directory / f"{name}_matrix.csv", field.values),
        write_csv(directory / f"{name}.csv", {"k1": k1.ravel(), "k2": k2.ravel(), "value": field.values.ravel()}),
        write_csv(directory / "momentum_density.csv", {"k": field.k, "m0": field.density}),
    ]
