"""
Mean-field ground state of a harmonically trapped 1D condensate.

Oscillator units throughout: hbar = m = omega_x = 1 and lengths in l_x, so the
interaction enters only through lambda = N g1d / (hbar omega_x l_x).
"""

import functools
from dataclasses import dataclass
from pathlib import Path

import chz
import numpy as np
import scipy.linalg
from numpy.typing import NDArray
from scipy import integrate, optimize

from ..config import BECPROBE_CONFIG
from ..errors import ConvergenceError, FiniteDifferenceError, GridResolutionError
from ..runtime import get_logger, record_warning
from ..storage.tables import write_csv, write_json
from .grid import GridConfig, SpatialGrid

EDGE_THRESHOLD = 1e-6


@chz.chz
class TrapConfig:
    """Axial trap and interaction parameters in oscillator units."""

    interaction: float = 4.953
    atom_number: float = 1000.0
    omega_x: float = 1.0
    grid: GridConfig = chz.field(default_factory=GridConfig)

    @property
    def g1d(self) -> float:
        return self.interaction / self.atom_number

    def with_atom_number(self, atom_number: float) -> "TrapConfig":
        """Same g1d, different atom number."""
        return chz.replace(
            self,
            atom_number=atom_number,
            interaction=self.g1d * atom_number,
        )

    def thomas_fermi_radius(self) -> float:
        if self.interaction <= 0:
            return 0.0
        return float(np.sqrt(2.0 * thomas_fermi_mu(self)) / self.omega_x)

    def validate(self) -> list[tuple[str, str]]:
        issues = [(f"grid.{k}", v) for k, v in self.grid.validate()]
        if self.atom_number <= 0:
            issues.append(("atom_number", f"must be positive, got {self.atom_number}"))
        if self.interaction < 0:
            issues.append(("interaction", f"must be non-negative, got {self.interaction}"))
        if self.omega_x <= 0:
            issues.append(("omega_x", f"must be positive, got {self.omega_x}"))
        if issues:
            return issues
        needed = max(4.0 / np.sqrt(self.omega_x), self.thomas_fermi_radius())
        if self.grid.half_width < needed:
            issues.append(
                (
                    "grid.half_width",
                    f"grid must extend to at least {needed:.3f} l_x "
                    "(8 l_x total or twice the Thomas-Fermi radius)",
                )
            )
        return issues


@dataclass(frozen=True)
class MeanField:
    grid: SpatialGrid
    psi: NDArray[np.float64]
    mu: float
    N0: float
    residual: float = 0.0
    # energies of the accepted imaginary-time steps, starting from the initial guess
    relaxation_energies: tuple[float, ...] = ()

    @property
    def density(self) -> NDArray[np.float64]:
        return self.psi**2

    @property
    def points(self) -> NDArray[np.float64]:
        return self.grid.points


def _potential(cfg: TrapConfig, x: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * cfg.omega_x**2 * x**2


def _grid_norm(values: NDArray[np.float64], dx: float) -> float:
    return float(np.sqrt(np.sum(values**2) * dx))


def _symmetrize(psi: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (psi + psi[::-1])


def _normalize(psi: NDArray[np.float64], N: float, dx: float) -> NDArray[np.float64]:
    return psi * np.sqrt(N / (np.sum(psi**2) * dx))


def _initial_guess(cfg: TrapConfig, x: NDArray[np.float64]) -> NDArray[np.float64]:
    gaussian = np.exp(-0.5 * cfg.omega_x * x**2)
    if cfg.interaction <= 0:
        return gaussian
    mu_tf = thomas_fermi_mu(cfg)
    tf = np.sqrt(np.clip(mu_tf - _potential(cfg, x), 0.0, None) / cfg.g1d)
    return np.maximum(tf / max(tf.max(), 1e-300), gaussian)


def _imaginary_time(
    cfg: TrapConfig, grid: SpatialGrid, max_iter: int
) -> tuple[NDArray[np.float64], list[float]]:
    """
    Split-step imaginary-time relaxation with normalization after each step.

    Steps that raise the energy are rejected and retried with half the step, so the
    returned energy history never increases.
    """
    logger = get_logger()
    x, dx = grid.points, grid.spacing
    N, g = cfg.atom_number, cfg.g1d
    V = _potential(cfg, x)
    k = grid.fft_wavenumbers()
    half_k2 = 0.5 * k**2

    def energy(psi: NDArray[np.float64]) -> float:
        psi_k = np.fft.fft(psi)
        kinetic = np.sum(half_k2 * np.abs(psi_k) ** 2) / psi.size
        n = psi**2
        return float((kinetic + np.sum(V * n + 0.5 * g * n**2)) * dx)

    dtau = min(0.05, 0.5 / max(1.0, cfg.omega_x))
    psi = _normalize(_symmetrize(_initial_guess(cfg, x)), N, dx)
    e_old = energy(psi)
    history = [e_old]
    iteration = 0
    while iteration < max_iter:
        iteration += 1
        half_pot = np.exp(-0.5 * dtau * (V + g * psi**2))
        trial = half_pot * psi
        trial = np.fft.ifft(np.exp(-dtau * half_k2) * np.fft.fft(trial)).real
        trial = np.exp(-0.5 * dtau * (V + g * trial**2)) * trial
        trial = _normalize(np.abs(_symmetrize(trial)), N, dx)
        e_new = energy(trial)
        if e_new > e_old + 1e-12 * abs(e_old) + 1e-14:
            dtau *= 0.5
            logger.debug("imaginary time: energy rose, halving step to %.3e", dtau)
            if dtau < 1e-8:
                raise ConvergenceError(
                    "imaginary-time step collapsed while the energy kept rising",
                    residual=float("nan"),
                    iterations=iteration,
                )
            continue
        psi = trial
        history.append(e_new)
        change = abs(e_old - e_new) / max(abs(e_new), 1e-300)
        e_old = e_new
        if change < 1e-13:
            break
    return psi, history


def _newton_polish(
    cfg: TrapConfig,
    grid: SpatialGrid,
    psi: NDArray[np.float64],
    tol: float,
    max_newton: int = 40,
) -> tuple[NDArray[np.float64], float, float, int]:
    x, dx = grid.points, grid.spacing
    N, g = cfg.atom_number, cfg.g1d
    H0 = grid.kinetic_matrix() + np.diag(_potential(cfg, x))
    mu = float(psi @ (H0 @ psi) + g * np.sum(psi**4)) / float(psi @ psi)
    residual = np.inf
    n = psi.size
    for iteration in range(1, max_newton + 1):
        F = H0 @ psi + g * psi**3 - mu * psi
        c = np.sum(psi**2) * dx - N
        residual = _grid_norm(F, dx)
        if residual < tol and abs(c) < 1e-12 * N:
            return psi, mu, residual, iteration
        J = np.empty((n + 1, n + 1))
        J[:n, :n] = H0 + np.diag(3.0 * g * psi**2 - mu)
        J[:n, n] = -psi
        J[n, :n] = 2.0 * dx * psi
        J[n, n] = 0.0
        step = scipy.linalg.solve(J, -np.concatenate([F, [c]]))
        psi = _symmetrize(psi + step[:n])
        mu += float(step[n])
    raise ConvergenceError(
        "Newton polishing of the ground state did not converge",
        residual=float(residual),
        iterations=max_newton,
        hints=["Increase the grid resolution or check the interaction parameter."],
    )


@functools.lru_cache(maxsize=64)
def _solve_cached(cfg: TrapConfig, tol: float, max_iter: int) -> MeanField:
    logger = get_logger()
    grid = cfg.grid.build()
    psi, history = _imaginary_time(cfg, grid, max_iter)
    psi, mu, residual, n_newton = _newton_polish(cfg, grid, psi, tol)
    psi = np.abs(psi)
    peak = psi.max()
    if max(psi[0], psi[-1]) > EDGE_THRESHOLD * peak:
        raise GridResolutionError(
            f"ground-state density does not vanish at the grid edge "
            f"(edge/peak = {max(psi[0], psi[-1]) / peak:.2e})",
            hints=[f"Increase grid.half_width beyond {cfg.grid.half_width}."],
        )
    H0 = grid.kinetic_matrix() + np.diag(_potential(cfg, grid.points))
    mu = float(psi @ (H0 @ psi) + cfg.g1d * np.sum(psi**4)) / float(psi @ psi)
    psi.setflags(write=False)
    logger.debug(
        "ground state lambda=%.6g: mu=%.10f residual=%.2e (%d imaginary-time, %d Newton)",
        cfg.interaction,
        mu,
        residual,
        len(history) - 1,
        n_newton,
    )
    return MeanField(
        grid=grid,
        psi=psi,
        mu=mu,
        N0=cfg.atom_number,
        residual=residual,
        relaxation_energies=tuple(history),
    )


def solve_ground_state(
    cfg: TrapConfig, *, tol: float = 1e-8, max_iter: int | None = None
) -> MeanField:
    """
    Solve the 1D Gross-Pitaevskii ground state.

    Imaginary-time relaxation is followed by Newton polishing of the nonlinear
    eigenproblem; mu is the Rayleigh quotient of the converged state.
    """
    limit = max_iter if max_iter is not None else BECPROBE_CONFIG.gpe_max_iter
    return _solve_cached(cfg, tol, limit)


def thomas_fermi_mu(cfg: TrapConfig) -> float:
    """Chemical potential fixed by the continuous Thomas-Fermi normalization."""
    if cfg.interaction <= 0:
        raise ValueError("Thomas-Fermi profile requires a positive interaction")
    g, N, w = cfg.g1d, cfg.atom_number, cfg.omega_x

    def number(mu: float) -> float:
        radius = np.sqrt(2.0 * mu) / w
        value, _ = integrate.quad(
            lambda x: (mu - 0.5 * w**2 * x**2) / g, -radius, radius, epsabs=1e-12, epsrel=1e-12
        )
        return value - N

    upper = 1.0
    while number(upper) < 0:
        upper *= 2.0
    return float(optimize.brentq(number, 1e-12, upper, xtol=1e-14, rtol=1e-14))


def thomas_fermi_profile(cfg: TrapConfig) -> MeanField:
    """Inverted-parabola reference density on the configured grid."""
    if cfg.interaction <= 0:
        raise ValueError("Thomas-Fermi profile requires a positive interaction (g1d > 0)")
    grid = cfg.grid.build()
    mu = thomas_fermi_mu(cfg)
    density = np.clip(mu - _potential(cfg, grid.points), 0.0, None) / cfg.g1d
    return MeanField(grid=grid, psi=np.sqrt(density), mu=mu, N0=cfg.atom_number)


def number_dephasing_rate(cfg: TrapConfig, *, rel_step: float = 1e-3) -> float:
    """omega_0 = 2 N dmu/dN at fixed g1d, by central differences checked under halving."""
    if cfg.interaction <= 0:
        return 0.0

    def estimate(step: float) -> float:
        plus = solve_ground_state(cfg.with_atom_number(cfg.atom_number * (1 + step)))
        minus = solve_ground_state(cfg.with_atom_number(cfg.atom_number * (1 - step)))
        return (plus.mu - minus.mu) / step

    coarse = estimate(rel_step)
    fine = estimate(rel_step / 2)
    change = abs(coarse - fine) / max(abs(fine), 1e-12)
    if change > 1e-2:
        raise FiniteDifferenceError(
            f"omega_0 changed by {change:.2%} when halving the number step",
            hints=["Use a smaller relative number step or a finer grid."],
        )
    if change > 1e-3:
        record_warning(f"omega_0 finite difference only stable to {change:.2%}")
    return fine


def export_mean_field(mf: MeanField, directory: Path) -> list[Path]:
    return [
        write_csv(
            directory / "meanfield.csv",
            {"x": mf.points, "psi": mf.psi, "n0": mf.density},
        ),
        write_json(
            directory / "meanfield.json",
            {"mu": mf.mu, "N0": mf.N0, "residual": mf.residual},
        ),
    ]
