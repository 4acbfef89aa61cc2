"""Gaussian states over interleaved quadratures [x_0, p_0, x_1, p_1, ...]."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from ..errors import PhysicalityError

PHYSICALITY_TOL = 1e-6


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    return scipy.linalg.block_diag(*([np.array([[0.0, 1.0], [-1.0, 0.0]])] * n_modes))


def symplectic_eigenvalues(A: NDArray[np.float64]) -> NDArray[np.float64]:
    """Symplectic spectrum of a covariance matrix, ascending (vacuum gives 1/2)."""
    n = A.shape[0] // 2
    values = np.abs(np.linalg.eigvals(symplectic_form(n) @ A))
    return np.sort(values)[::2]


def quadrature_indices(rows: Sequence[int]) -> NDArray[np.intp]:
    return np.array([i for row in rows for i in (2 * row, 2 * row + 1)], dtype=np.intp)


@dataclass(frozen=True)
class GaussianState:
    """First moments R, covariance A and time t for the modes in `labels`."""

    R: NDArray[np.float64]
    A: NDArray[np.float64]
    t: float = 0.0
    labels: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.A.shape != (self.R.size, self.R.size):
            raise ValueError(f"covariance shape {self.A.shape} does not match R of size {self.R.size}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(self.R.size // 2)))

    @classmethod
    def vacuum(cls, labels: Sequence[int], t: float = 0.0) -> "GaussianState":
        n = len(labels)
        return cls(R=np.zeros(2 * n), A=0.5 * np.eye(2 * n), t=t, labels=tuple(labels))

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def row(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexError(f"mode {label} is not in the state") from None

    def reduced(self, modes: Sequence[int]) -> "GaussianState":
        """State of the listed physical modes (partial trace over the rest)."""
        idx = quadrature_indices([self.row(j) for j in modes])
        return GaussianState(
            R=self.R[idx], A=self.A[np.ix_(idx, idx)], t=self.t, labels=tuple(modes)
        )

    def symplectic_eigenvalues(self) -> NDArray[np.float64]:
        return symplectic_eigenvalues(self.A)

    def check_physical(self, tol: float = PHYSICALITY_TOL) -> float:
        """Return the smallest symplectic eigenvalue, raising if below 1/2 - tol."""
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.R))):
            raise PhysicalityError(
                "state contains NaN or infinite entries",
                time=self.t,
                hints=["Reduce dt; the integrator has diverged."],
            )
        smallest = float(self.symplectic_eigenvalues().min())
        if smallest < 0.5 - tol:
            raise PhysicalityError(
                f"covariance violates the uncertainty principle at t={self.t:.6g} "
                f"(smallest symplectic eigenvalue {smallest:.8f})",
                time=self.t,
                min_symplectic_eigenvalue=smallest,
                hints=["Reduce dt."],
            )
        return smallest


@dataclass(frozen=True)
class JointGaussian:
    """
    System and probe modes: covariance [[A, C], [C^T, B]], first moments (R, Q).

    Probe quadratures are interleaved like the system's; the measured quadrature of
    each probe mode is its second (p-like) entry.
    """

    A: NDArray[np.float64]
    B: NDArray[np.float64]
    C: NDArray[np.float64]
    R: NDArray[np.float64]
    Q: NDArray[np.float64]
    t: float = 0.0
    labels: tuple[int, ...] = ()

    @property
    def full(self) -> NDArray[np.float64]:
        return np.block([[self.A, self.C], [self.C.T, self.B]])

    def check_physical(self, tol: float = 1e-9) -> float:
        full = self.full
        if np.max(np.abs(full - full.T), initial=0.0) > 1e-10:
            raise PhysicalityError("joint covariance is not symmetric", time=self.t)
        smallest = float(symplectic_eigenvalues(full).min())
        if smallest < 0.5 - tol:
            raise PhysicalityError(
                f"joint covariance is unphysical (smallest symplectic eigenvalue {smallest:.10f})",
                time=self.t,
                min_symplectic_eigenvalue=smallest,
            )
        return smallest
