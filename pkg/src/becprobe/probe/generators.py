"""
Drift, back-action and measurement generators of the conditional dynamics.

Quadratures are interleaved, [x_0, p_0, x_1, p_1, ...] in basis row order:

    dR = -D R dt + A M dW
    dA/dt = E - D0 A - A D0^T - A M M^T A
"""

from dataclasses import dataclass
from typing import Literal

import chz
import numpy as np
from numpy.typing import NDArray

from ..condensate.bogoliubov import BogoliubovBasis
from ..errors import ConfigValidationError
from .couplings import CouplingSet


@chz.chz
class FeedbackSpec:
    """
    Mode-matched feedback on the measured momenta of `targets`.

    `epsilon = "auto"` uses critical damping (1) for weak probing and the
    overdamped gain sqrt(1 + 4 kappa_tilde) / 2 for strong probing, switching
    at the crossover; kappa_tilde = kappa2_bar_jj / omega_j of each target.
    """

    targets: tuple[int, ...] = ()
    epsilon: float | Literal["auto"] = 1.0

    def gain(self, kappa_tilde: float) -> float:
        if self.epsilon == "auto":
            from ..dynamics.feedback import optimal_feedback_gain

            return optimal_feedback_gain(kappa_tilde)
        return float(self.epsilon)

    def validate(self) -> list[tuple[str, str]]:
        issues: list[tuple[str, str]] = []
        if 0 in self.targets:
            issues.append(("targets", "the zero mode is not an oscillator and cannot be damped"))
        if self.epsilon != "auto" and float(self.epsilon) < 0:
            issues.append(("epsilon", f"must be non-negative or 'auto', got {self.epsilon}"))
        return issues


@dataclass(frozen=True)
class Generators:
    """
    `D` includes feedback damping and drives the first moments; `D0` is the bare
    drift that enters the covariance equation.
    """

    labels: tuple[int, ...]
    frequencies: NDArray[np.float64]
    D: NDArray[np.float64]
    D0: NDArray[np.float64]
    E: NDArray[np.float64]
    M: NDArray[np.float64]
    gains: dict[int, float]

    @property
    def dim(self) -> int:
        return self.D.shape[0]

    @property
    def MMT(self) -> NDArray[np.float64]:
        return self.M @ self.M.T

    @property
    def channels(self) -> NDArray[np.intp]:
        """Columns of M that carry measurement (the p columns)."""
        return np.arange(1, self.M.shape[1], 2)

    @property
    def n_channels(self) -> int:
        return self.M.shape[1] // 2

    def index(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise IndexError(f"mode {label} is not in the generators") from None

    def scaled(self, strength: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(E, M) at schedule multiplier `strength`; M scales with its square root."""
        return strength * self.E, np.sqrt(strength) * self.M

    def max_rate(self) -> float:
        """max(omega_J, max K2) used for the integrator step bound."""
        k2 = np.diag(self.MMT)[0::2]
        return float(max(np.max(self.frequencies, initial=0.0), np.max(k2, initial=0.0)))

    def with_feedback(self, gains: dict[int, float]) -> "Generators":
        D = self.D.copy()
        for label, epsilon in gains.items():
            row = self.index(label)
            if self.labels[row] == 0:
                raise ConfigValidationError(
                    "feedback cannot target the zero mode",
                    issues=[("feedback.targets", "mode 0 is not a harmonic oscillator")],
                )
            omega = self.frequencies[row]
            D[2 * row + 1, 2 * row + 1] = 2.0 * epsilon * omega
        return Generators(
            self.labels, self.frequencies, D, self.D0, self.E, self.M, {**self.gains, **gains}
        )

    def without_measurement(self) -> "Generators":
        return Generators(
            self.labels, self.frequencies, self.D, self.D0, self.E, np.zeros_like(self.M), self.gains
        )


def drift_matrix(
    labels: tuple[int, ...], frequencies: NDArray[np.float64]
) -> NDArray[np.float64]:
    D = np.zeros((2 * len(labels), 2 * len(labels)))
    for row, (label, omega) in enumerate(zip(labels, frequencies)):
        x, p = 2 * row, 2 * row + 1
        if label == 0:
            D[p, x] = omega
        else:
            D[x, p] = -omega
            D[p, x] = omega
    return D


def assemble_generators(
    basis: BogoliubovBasis,
    couplings: CouplingSet,
    feedback: FeedbackSpec | None = None,
) -> Generators:
    if couplings.labels != basis.labels:
        raise ValueError(
            f"coupling labels {couplings.labels[:3]}... do not match basis labels {basis.labels[:3]}..."
        )
    n = basis.n_modes
    D = drift_matrix(basis.labels, basis.frequencies)
    E = np.zeros((2 * n, 2 * n))
    E[1::2, 1::2] = couplings.kappa2_bar
    M = np.zeros((2 * n, 2 * couplings.n_channels))
    M[0::2, 1::2] = couplings.nu_bar
    generators = Generators(
        labels=basis.labels,
        frequencies=np.asarray(basis.frequencies, dtype=float),
        D=D,
        D0=D,
        E=E,
        M=M,
        gains={},
    )
    if feedback is None or not feedback.targets:
        return generators
    if 0 in feedback.targets:
        raise ConfigValidationError(
            "feedback cannot target the zero mode",
            issues=[("feedback.targets", "mode 0 is not a harmonic oscillator")],
        )
    gains: dict[int, float] = {}
    for label in feedback.targets:
        row = basis.index(label)
        kappa_tilde = couplings.kappa2_bar[row, row] / basis.frequencies[row]
        gains[label] = feedback.gain(kappa_tilde)
    return generators.with_feedback(gains)
