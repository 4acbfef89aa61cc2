"""
Bogoliubov-de Gennes modes about the mean field.

With P = H0 + g n0 - mu (kernel psi) and Q = H0 + 3 g n0 - mu the mode pairs obey

    P f+ = omega f-,    Q f- = omega f+,    integral f+_j f-_k dx = delta_jk / 2.

f- carries the density fluctuation (it multiplies psi in delta n), f+ the phase.
"""

import functools
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import chz
import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy import special

from ..errors import ConvergenceError, FiniteDifferenceError, GridResolutionError, NumericalError
from ..runtime import get_logger
from ..storage.tables import write_csv
from .grid import SpatialGrid
from .meanfield import (
    MeanField,
    TrapConfig,
    number_dephasing_rate,
    solve_ground_state,
    thomas_fermi_mu,
)

BdgMethod = Literal["reduced", "dense"]
Regime = Literal["noninteracting", "thomas_fermi"]

RESIDUAL_TOL = 1e-6
TF_MAX_ORDER = 10


@dataclass(frozen=True)
class BogoliubovBasis:
    """
    Mode frequencies and mode-function pairs, one row per retained mode.

    `labels` are physical mode indices (0 is the zero mode), so the row of mode j
    is `labels.index(j)` whether or not the zero mode is present.
    """

    mean_field: MeanField
    frequencies: NDArray[np.float64]
    f_plus: NDArray[np.float64]
    f_minus: NDArray[np.float64]
    labels: tuple[int, ...]
    includes_zero_mode: bool
    residual: float = 0.0

    @property
    def grid(self) -> SpatialGrid:
        return self.mean_field.grid

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    @property
    def J(self) -> int:
        """Number of retained excited modes."""
        return self.n_modes - int(self.includes_zero_mode)

    @property
    def omega0(self) -> float:
        if not self.includes_zero_mode:
            raise ValueError("basis does not include the zero mode")
        return float(self.frequencies[0])

    def index(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexError(
                f"mode {label} is not in the basis (retained modes {self.labels[0]}..{self.labels[-1]})"
            ) from None

    def overlap(self) -> NDArray[np.float64]:
        """Matrix of integral f+_j f-_k dx; 1/2 times identity for a biorthonormal set."""
        return self.f_plus @ self.f_minus.T * self.grid.spacing

    def with_zero_mode(
        self, f0_plus: NDArray[np.float64], f0_minus: NDArray[np.float64], omega0: float
    ) -> "BogoliubovBasis":
        if self.includes_zero_mode:
            return self
        return replace(
            self,
            frequencies=np.concatenate([[omega0], self.frequencies]),
            f_plus=np.vstack([f0_plus, self.f_plus]),
            f_minus=np.vstack([f0_minus, self.f_minus]),
            labels=(0, *self.labels),
            includes_zero_mode=True,
        )

    def without_zero_mode(self) -> "BogoliubovBasis":
        if not self.includes_zero_mode:
            return self
        return replace(
            self,
            frequencies=self.frequencies[1:],
            f_plus=self.f_plus[1:],
            f_minus=self.f_minus[1:],
            labels=self.labels[1:],
            includes_zero_mode=False,
        )

    def truncated(self, n_excited: int) -> "BogoliubovBasis":
        """Keep only the lowest `n_excited` excited modes."""
        keep = int(self.includes_zero_mode) + n_excited
        return replace(
            self,
            frequencies=self.frequencies[:keep],
            f_plus=self.f_plus[:keep],
            f_minus=self.f_minus[:keep],
            labels=self.labels[:keep],
        )


def max_safe_modes(grid: SpatialGrid) -> int:
    """
    Largest mode index the grid resolves.

    Requires 10 points per oscillation of the fastest local wavelength, and the classical
    turning point sqrt(2 j + 1) of level j to sit two Airy lengths inside the grid edge.
    Above the condensate the high modes are single-particle levels, so mu drops out.
    """
    k_limit = 2.0 * np.pi / (10.0 * grid.spacing)
    by_resolution = (k_limit**2 - 1.0) / 2.0
    edge = grid.half_width
    airy_length = (2.0 * max(edge - 1.0, 1.0)) ** (-1.0 / 3.0)
    turning_point = max(edge - 2.0 * airy_length, 0.0)
    by_extent = (turning_point**2 - 1.0) / 2.0
    return max(0, int(np.floor(min(by_resolution, by_extent))))


def _operators(
    mf: MeanField, cfg: TrapConfig
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    grid = mf.grid
    H0 = grid.kinetic_matrix() + np.diag(0.5 * cfg.omega_x**2 * grid.points**2)
    n0 = mf.density
    P = H0 + np.diag(cfg.g1d * n0 - mf.mu)
    Q = H0 + np.diag(3.0 * cfg.g1d * n0 - mf.mu)
    return P, Q


def _fix_sign(
    f_plus: NDArray[np.float64], f_minus: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Flip the pair so that f- is positive on its outermost right lobe."""
    scale = np.abs(f_minus).max()
    significant = np.nonzero(np.abs(f_minus) > 1e-3 * scale)[0]
    if significant.size and f_minus[significant[-1]] < 0:
        return -f_plus, -f_minus
    return f_plus, f_minus


def _solve_reduced(
    P: NDArray[np.float64], Q: NDArray[np.float64], J: int
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    q_vals, q_vecs = scipy.linalg.eigh(Q)
    S = (q_vecs * np.sqrt(np.clip(q_vals, 0.0, None))) @ q_vecs.T
    reduced = S @ P @ S
    reduced = 0.5 * (reduced + reduced.T)
    omega2, h = scipy.linalg.eigh(reduced, subset_by_index=[0, J])
    if abs(omega2[0]) > 1e-4:
        raise NumericalError(
            f"lowest reduced BdG eigenvalue {omega2[0]:.3e} is not the zero mode",
            hints=["The mean field is not a converged stationary state."],
        )
    omega = np.sqrt(np.clip(omega2[1:], 0.0, None))
    f_plus = (S @ h[:, 1:]).T
    f_minus = (P @ f_plus.T).T / omega[:, None]
    return omega, f_plus, f_minus


def _solve_dense(
    P: NDArray[np.float64], Q: NDArray[np.float64], J: int, dx: float
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    n = P.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, n:] = Q
    block[n:, :n] = P
    values, vectors = scipy.linalg.eig(block)
    # the zero mode is a Jordan block, so rounding splits it into a pair near 0
    positive = np.nonzero((np.abs(values.imag) < 1e-6) & (values.real > 1e-3))[0]
    positive = positive[np.argsort(values.real[positive])][:J]
    if positive.size < J:
        raise NumericalError(f"dense BdG solve returned only {positive.size} positive modes")
    omega = values.real[positive]
    vecs = vectors[:, positive].real.T
    f_plus, f_minus = vecs[:, :n], vecs[:, n:]
    norms = np.sum(f_plus * f_minus, axis=1) * dx
    if np.any(norms <= 0):
        raise NumericalError("dense BdG solve produced a mode with non-positive norm")
    return omega, f_plus, f_minus


def solve_bdg(
    mf: MeanField, cfg: TrapConfig, J: int, *, method: BdgMethod = "reduced"
) -> BogoliubovBasis:
    """Lowest J excited Bogoliubov modes, sorted by frequency and biorthonormalized."""
    if J < 1:
        raise ValueError(f"J must be at least 1, got {J}")
    grid = mf.grid
    limit = max_safe_modes(grid)
    if J > limit:
        raise GridResolutionError(
            f"requested {J} modes but the grid resolves at most {limit}",
            max_safe_modes=limit,
            hints=["Increase grid.n_points or grid.half_width, or reduce basis.modes."],
        )
    P, Q = _operators(mf, cfg)
    dx = grid.spacing
    if method == "reduced":
        omega, f_plus, f_minus = _solve_reduced(P, Q, J)
    elif method == "dense":
        omega, f_plus, f_minus = _solve_dense(P, Q, J, dx)
    else:
        raise ValueError(f"unknown BdG method {method!r}")

    norms = np.sum(f_plus * f_minus, axis=1) * dx
    if np.any(norms <= 0) or not np.all(np.isfinite(norms)):
        raise NumericalError("Bogoliubov mode normalization failed")
    scale = np.sqrt(0.5 / norms)[:, None]
    f_plus, f_minus = f_plus * scale, f_minus * scale
    for j in range(J):
        f_plus[j], f_minus[j] = _fix_sign(f_plus[j], f_minus[j])

    res_q = np.sqrt(np.sum((Q @ f_minus.T - f_plus.T * omega) ** 2, axis=0) * dx)
    res_p = np.sqrt(np.sum((P @ f_plus.T - f_minus.T * omega) ** 2, axis=0) * dx)
    residual = np.maximum(res_q, res_p) / np.maximum(1.0, omega)
    worst = float(residual.max())
    if worst > RESIDUAL_TOL:
        raise ConvergenceError(
            f"BdG eigenpair residual too large for mode {int(residual.argmax()) + 1}",
            residual=worst,
            iterations=1,
        )
    get_logger().debug(
        "BdG (%s): %d modes, omega_1=%.8f omega_J=%.6f residual=%.2e",
        method,
        J,
        omega[0],
        omega[-1],
        worst,
    )
    for array in (omega, f_plus, f_minus):
        array.setflags(write=False)
    return BogoliubovBasis(
        mean_field=mf,
        frequencies=omega,
        f_plus=f_plus,
        f_minus=f_minus,
        labels=tuple(range(1, J + 1)),
        includes_zero_mode=False,
        residual=worst,
    )


def zero_mode_pair(
    mf: MeanField, cfg: TrapConfig, *, rel_step: float = 1e-3
) -> tuple[NDArray[np.float64], NDArray[np.float64], float]:
    """(f0+, f0-, omega_0) from two neighbouring ground states at fixed g1d."""
    N = cfg.atom_number
    f0_plus = mf.psi / np.sqrt(2.0 * N)
    plus = solve_ground_state(cfg.with_atom_number(N * (1 + rel_step)))
    minus = solve_ground_state(cfg.with_atom_number(N * (1 - rel_step)))
    dpsi_dN = (plus.psi - minus.psi) / (2.0 * N * rel_step)
    f0_minus = np.sqrt(2.0 * N) * dpsi_dN
    norm = float(np.sum(f0_plus * f0_minus) * mf.grid.spacing)
    if abs(norm - 0.5) > 1e-4:
        raise FiniteDifferenceError(
            f"zero-mode pair normalization {norm:.6f} deviates from 1/2",
            hints=["Use a finer grid or a smaller relative number step."],
        )
    f0_minus = f0_minus * (0.5 / norm)
    omega0 = number_dephasing_rate(cfg, rel_step=rel_step)
    return f0_plus, f0_minus, omega0


def analytic_reference(
    regime: Regime, j: int, grid: SpatialGrid, *, trap: TrapConfig | None = None
) -> tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    """
    Closed-form (omega_j, f+_j, f-_j).

    Noninteracting modes are Hermite-Gauss functions with f+ = f-. Thomas-Fermi
    modes are Legendre polynomials on the condensate interval and need `trap`.
    """
    if j < 0:
        raise ValueError(f"mode index must be non-negative, got {j}")
    x = grid.points
    if regime == "noninteracting":
        norm = 1.0 / np.sqrt(2.0**j * special.factorial(j) * np.sqrt(np.pi))
        phi = norm * special.eval_hermite(j, x) * np.exp(-0.5 * x**2)
        return float(j), phi / np.sqrt(2.0), phi / np.sqrt(2.0)
    if regime != "thomas_fermi":
        raise ValueError(f"unknown regime {regime!r}")
    if trap is None:
        raise ValueError("the Thomas-Fermi reference needs the trap configuration")
    if j < 1 or j > TF_MAX_ORDER:
        raise ValueError(f"Thomas-Fermi closed forms are tabulated for 1 <= j <= {TF_MAX_ORDER}")
    mu = thomas_fermi_mu(trap)
    radius = np.sqrt(2.0 * mu) / trap.omega_x
    omega = trap.omega_x * np.sqrt(j * (j + 1) / 2.0)
    y = x / radius
    inside = np.abs(y) < 1.0
    edge = np.where(inside, 1.0 - y**2, 1.0)
    legendre = special.eval_legendre(j, np.clip(y, -1.0, 1.0))
    a = np.sqrt((2 * j + 1) / (4.0 * radius) * 2.0 * mu / omega)
    b = np.sqrt((2 * j + 1) / (4.0 * radius) * omega / (2.0 * mu))
    f_plus = np.where(inside, a * np.sqrt(edge) * legendre, 0.0)
    f_minus = np.where(inside, b * legendre / np.sqrt(edge), 0.0)
    return float(omega), f_plus, f_minus


@chz.chz
class BasisConfig:
    """Mode basis: J excited modes, optionally with the zero mode."""

    modes: int = 40
    number_conserving: bool = False
    method: BdgMethod = "reduced"

    def validate(self, trap: TrapConfig) -> list[tuple[str, str]]:
        issues: list[tuple[str, str]] = []
        if self.modes < 1:
            issues.append(("modes", f"need at least one excited mode, got {self.modes}"))
        if self.method not in ("reduced", "dense"):
            issues.append(("method", f"unknown BdG method {self.method!r}"))
        if issues or trap.validate():
            return issues
        limit = max_safe_modes(trap.grid.build())
        if self.modes > limit:
            issues.append(
                (
                    "modes",
                    f"{self.modes} modes are not resolvable on this grid "
                    f"(max safe J = {limit})",
                )
            )
        return issues


@functools.lru_cache(maxsize=16)
def build_basis(trap: TrapConfig, basis: BasisConfig) -> BogoliubovBasis:
    """Mean field, BdG modes and (unless number conserving) the zero mode."""
    mf = solve_ground_state(trap)
    modes = solve_bdg(mf, trap, basis.modes, method=basis.method)
    if basis.number_conserving:
        return modes
    f0_plus, f0_minus, omega0 = zero_mode_pair(mf, trap)
    return modes.with_zero_mode(f0_plus, f0_minus, omega0)


def export_spectrum(basis: BogoliubovBasis, directory: Path) -> Path:
    return write_csv(
        directory / "spectrum.csv",
        {"j": np.asarray(basis.labels), "omega_j": basis.frequencies},
    )


def export_modes(basis: BogoliubovBasis, directory: Path) -> Path:
    columns: dict[str, NDArray[np.float64]] = {"x": basis.grid.points}
    for row, label in enumerate(basis.labels):
        columns[f"f_plus_{label}"] = basis.f_plus[row]
        columns[f"f_minus_{label}"] = basis.f_minus[row]
    return write_csv(directory / "modes.csv", columns)
