"""
Light-matter coupling matrices.

Mode j couples to the probe through kappa_j(x) = 2 kappa f0+(x) f-_j(x) sqrt(u(x)).
The factor 2 absorbs the light-segment length so that noninteracting couplings
equal the closed Hermite-integral form.
"""

from dataclasses import dataclass
from pathlib import Path

import chz
import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy import integrate, special

from ..condensate.bogoliubov import BogoliubovBasis
from ..condensate.meanfield import TrapConfig, thomas_fermi_mu
from ..errors import ConfigValidationError, NumericalError
from ..runtime import get_logger, record_warning
from ..storage.tables import write_matrix
from .config import ProbeConfig
from .kernel import DOUBLE_PASS, SINGLE_PASS, apply_kernel, diffraction_kernel

COVERAGE_THRESHOLD = 0.99
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class CouplingSet:
    """
    Coupling matrices indexed by basis row.

    `nu_bar` has one column per detector channel; with an ideal detector the
    channels are an equivalent factorization rather than physical pixels and
    `pixel_edges` is empty.
    """

    labels: tuple[int, ...]
    kappa2_bar: NDArray[np.float64]
    nu_bar: NDArray[np.float64]
    K2: NDArray[np.float64]
    pixel_edges: NDArray[np.float64]
    coverage: NDArray[np.float64]
    kappa2: float
    ideal_detector: bool

    @property
    def n_channels(self) -> int:
        return self.nu_bar.shape[1]

    def index(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexError(f"mode {label} is not in the coupling set") from None

    def coupling(self, j: int, k: int) -> float:
        return float(self.kappa2_bar[self.index(j), self.index(k)])


def _mode_profiles(basis: BogoliubovBasis, probe: ProbeConfig) -> NDArray[np.float64]:
    mf = basis.mean_field
    f0_plus = mf.psi / np.sqrt(2.0 * mf.N0)
    root_u = np.sqrt(probe.profile.intensity(basis.grid.points))
    kappa_eff = 2.0 * np.sqrt(probe.kappa2)
    return kappa_eff * f0_plus * basis.f_minus * root_u


def coupling_profile(
    basis: BogoliubovBasis, j: int, probe: ProbeConfig
) -> NDArray[np.float64]:
    """kappa_j(x) on the grid for the physical mode label j."""
    row = basis.index(j)
    return _mode_profiles(basis, probe)[row]


def _smoothed_profiles(basis: BogoliubovBasis, probe: ProbeConfig) -> NDArray[np.float64]:
    """S = K_1 * kappa, one row per mode."""
    return apply_kernel(
        SINGLE_PASS, probe.resolved_rayleigh_length(), basis.grid, _mode_profiles(basis, probe)
    )


def environment_couplings(basis: BogoliubovBasis, probe: ProbeConfig) -> NDArray[np.float64]:
    """
    kappa2_bar_jk = double integral of K_{2^(1/4)}(x - x') kappa_j(x) kappa_k(x').

    Evaluated as dx * S S^T with S = K_1 * kappa, since K_1 * K_1 = K_{2^(1/4)}.
    """
    smoothed = _smoothed_profiles(basis, probe)
    kappa2_bar = smoothed @ smoothed.T * basis.grid.spacing
    asymmetry = float(np.max(np.abs(kappa2_bar - kappa2_bar.T), initial=0.0))
    if asymmetry > SYMMETRY_TOL * max(1.0, float(np.abs(kappa2_bar).max(initial=0.0))):
        raise NumericalError(f"environment couplings are not symmetric ({asymmetry:.2e})")
    return 0.5 * (kappa2_bar + kappa2_bar.T)


def environment_couplings_direct(
    basis: BogoliubovBasis, probe: ProbeConfig
) -> NDArray[np.float64]:
    """Brute-force double sum over the grid with K_{2^(1/4)}; O(n^2), for small grids."""
    grid = basis.grid
    profiles = _mode_profiles(basis, probe)
    l_R = probe.resolved_rayleigh_length()
    if l_R == 0:
        return profiles @ profiles.T * grid.spacing
    kernel = diffraction_kernel(DOUBLE_PASS, l_R, grid)
    n = grid.n_points
    idx = np.arange(n)
    matrix = kernel[idx[:, None] - idx[None, :] + (n - 1)]
    return profiles @ matrix @ profiles.T * grid.spacing**2


def pixel_edges(probe: ProbeConfig, half_width: float) -> NDArray[np.float64]:
    width = probe.detector_half_width if probe.detector_half_width is not None else half_width
    width = min(width, half_width)
    l_D, offset = probe.pixel_width, probe.pixel_offset
    first = int(np.floor((-width - offset) / l_D))
    last = int(np.ceil((width - offset) / l_D))
    return offset + l_D * np.arange(first, last + 1)


def _equivalent_channels(kappa2_bar: NDArray[np.float64]) -> NDArray[np.float64]:
    values, vectors = scipy.linalg.eigh(kappa2_bar)
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def pixel_couplings(
    basis: BogoliubovBasis, probe: ProbeConfig
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    (nu_bar, K2, pixel_edges, coverage).

    nu_bar_jd = -(2 / sqrt(l_D)) * integral over pixel d of (K_1 * kappa_j). An ideal
    detector (l_D = 0) returns K2 = 4 kappa2_bar with nu_bar = 2 L, L L^T = kappa2_bar.
    """
    grid = basis.grid
    if probe.pixel_width == 0:
        kappa2_bar = environment_couplings(basis, probe)
        nu_bar = 2.0 * _equivalent_channels(kappa2_bar)
        return nu_bar, 4.0 * kappa2_bar, np.empty(0), np.ones(basis.n_modes)

    smoothed = _smoothed_profiles(basis, probe)
    x = grid.points
    edges = np.unique(np.clip(pixel_edges(probe, grid.half_width), x[0], x[-1]))
    cumulative = integrate.cumulative_trapezoid(smoothed, x, axis=-1, initial=0.0)
    cumulative_abs = integrate.cumulative_trapezoid(np.abs(smoothed), x, axis=-1, initial=0.0)
    at_edges = np.stack([np.interp(edges, x, row) for row in cumulative])
    abs_at_edges = np.stack([np.interp(edges, x, row) for row in cumulative_abs])
    nu_bar = -(2.0 / np.sqrt(probe.pixel_width)) * np.diff(at_edges, axis=1)
    K2 = nu_bar @ nu_bar.T

    total_abs = cumulative_abs[:, -1]
    covered = abs_at_edges[:, -1] - abs_at_edges[:, 0]
    coverage = np.where(total_abs > 0, covered / np.where(total_abs > 0, total_abs, 1.0), 1.0)
    if coverage.min() < COVERAGE_THRESHOLD:
        worst = int(coverage.argmin())
        record_warning(
            f"detector pixels cover only {coverage[worst]:.1%} of the coupling profile "
            f"of mode {basis.labels[worst]}"
        )
    return nu_bar, K2, edges, coverage


def build_couplings(basis: BogoliubovBasis, probe: ProbeConfig) -> CouplingSet:
    """All coupling matrices, rescaled to the calibration target if one is set."""
    if probe.calibrate_mode is not None and probe.calibrate_value is not None:
        if probe.kappa2 <= 0:
            raise ConfigValidationError(
                "cannot calibrate a probe with zero strength",
                issues=[("probe.kappa2", "must be positive when calibrating")],
            )
        reference = environment_couplings(basis, probe)
        row = basis.index(probe.calibrate_mode)
        current = reference[row, row]
        if current <= 0:
            raise ConfigValidationError(
                f"mode {probe.calibrate_mode} does not couple to the probe",
                issues=[("probe.calibrate_mode", "coupling is zero, cannot calibrate")],
            )
        scaled = probe.kappa2 * probe.calibrate_value / current
        get_logger().info(
            "calibrated kappa2 %.6g -> %.6g so that kappa2_bar[%d,%d] = %.6g",
            probe.kappa2,
            scaled,
            probe.calibrate_mode,
            probe.calibrate_mode,
            probe.calibrate_value,
        )
        probe = chz.replace(probe, kappa2=scaled)

    kappa2_bar = environment_couplings(basis, probe)
    nu_bar, K2, edges, coverage = pixel_couplings(basis, probe)
    excess = np.diag(K2) - 4.0 * np.diag(kappa2_bar)
    if np.any(excess > 1e-8 * max(1.0, float(np.abs(kappa2_bar).max(initial=0.0)))):
        raise NumericalError("retrieved information exceeds the imprinted information (K2 > 4 kappa2)")
    return CouplingSet(
        labels=basis.labels,
        kappa2_bar=kappa2_bar,
        nu_bar=nu_bar,
        K2=K2,
        pixel_edges=edges,
        coverage=coverage,
        kappa2=probe.kappa2,
        ideal_detector=probe.pixel_width == 0,
    )


def hermite_couplings(kappa2: float, J: int) -> NDArray[np.float64]:
    """Noninteracting couplings for modes 0..J with an ideal, uniform probe."""
    j = np.arange(J + 1)[:, None]
    k = np.arange(J + 1)[None, :]
    even = (j + k) % 2 == 0
    sign = np.where(((j - k) // 2) % 2 == 0, 1.0, -1.0)
    magnitude = special.gamma((j + k + 1) / 2.0) / (
        np.pi * np.sqrt(2.0 * special.factorial(j) * special.factorial(k))
    )
    return np.where(even, kappa2 * sign * magnitude, 0.0)


def thomas_fermi_couplings(kappa2: float, trap: TrapConfig, J: int) -> NDArray[np.float64]:
    """
    Deep Thomas-Fermi couplings for modes 0..J: diagonal only, with
    kappa2_bar_jj = kappa2 omega_j / (2 lambda) and
    kappa2_bar_00 = (kappa2 / 2) sqrt(2 / (3 omega_0)), omega_0 = 4 mu / 3.
    """
    if trap.interaction <= 0:
        raise ValueError("Thomas-Fermi couplings require a positive interaction")
    mu = thomas_fermi_mu(trap)
    omega0 = 4.0 * mu / 3.0
    j = np.arange(1, J + 1)
    omega = trap.omega_x * np.sqrt(j * (j + 1) / 2.0)
    diagonal = np.concatenate(
        [[0.5 * kappa2 * np.sqrt(2.0 / (3.0 * omega0))], kappa2 * omega / (2.0 * trap.interaction)]
    )
    return np.diag(diagonal)


def export_couplings(
    couplings: CouplingSet, probe: ProbeConfig, directory: Path
) -> list[Path]:
    metadata = {
        "J": max(couplings.labels),
        "l_R": probe.resolved_rayleigh_length(),
        "l_D": probe.pixel_width,
        "offset": probe.pixel_offset,
        "profile": probe.profile.describe(),
        "kappa2": couplings.kappa2,
    }
    labels = [str(j) for j in couplings.labels]
    paths = [
        write_matrix(
            directory / "kappa2_bar.csv", couplings.kappa2_bar, labels=labels, metadata=metadata
        ),
        write_matrix(directory / "K2.csv", couplings.K2, labels=labels, metadata=metadata),
        write_matrix(directory / "nu_bar.csv", couplings.nu_bar, metadata=metadata),
    ]
    if couplings.pixel_edges.size:
        paths.append(
            write_matrix(directory / "pixel_edges.csv", couplings.pixel_edges[None, :], metadata=metadata)
        )
    return paths
