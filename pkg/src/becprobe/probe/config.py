"""Probe beam and detector configuration."""

import chz
import numpy as np
from numpy.typing import NDArray

from ..condensate.units import PhysicalTrap


@chz.chz
class UniformBeam:
    def intensity(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.ones_like(x)

    def validate(self) -> list[tuple[str, str]]:
        return []

    def describe(self) -> str:
        return "uniform"


@chz.chz
class GaussianBeam:
    """
    Gaussian intensity u(x) = exp(-x^2 / (2 sigma^2)) with sigma = width / 2.

    `width` is the beam width l_G, so a central region of width l_G holds the
    bulk of the beam.
    """

    width: float = 1.0

    @property
    def sigma(self) -> float:
        return self.width / 2.0

    def intensity(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.exp(-(x**2) / (2.0 * self.sigma**2))

    def validate(self) -> list[tuple[str, str]]:
        if self.width <= 0:
            return [("width", f"Gaussian beam width must be positive, got {self.width}")]
        return []

    def describe(self) -> str:
        return f"gaussian(l_G={self.width:g})"


BeamProfile = UniformBeam | GaussianBeam


@chz.chz
class ProbeConfig:
    """
    Probe strength, optics and detector array (oscillator units).

    `kappa2` is the probe rate constant in units of omega_x. The optical resolution
    is `rayleigh_length` directly, or derived from `wavelength_nm` and `lab`.
    Pixel edges sit at `pixel_offset + n * pixel_width`; a zero pixel width means
    an ideal detector.
    """

    kappa2: float = 1.0
    rayleigh_length: float = 0.0
    wavelength_nm: float | None = None
    lab: PhysicalTrap | None = None
    pixel_width: float = 0.0
    pixel_offset: float = 0.0
    detector_half_width: float | None = None
    profile: BeamProfile = chz.field(default_factory=UniformBeam)
    calibrate_mode: int | None = None
    calibrate_value: float | None = None

    def resolved_rayleigh_length(self) -> float:
        if self.wavelength_nm is None:
            return self.rayleigh_length
        lab = self.lab if self.lab is not None else PhysicalTrap()
        return lab.rayleigh_length(self.wavelength_nm * 1e-9)

    def validate(self) -> list[tuple[str, str]]:
        issues = [(f"profile.{k}", v) for k, v in self.profile.validate()]
        if self.kappa2 < 0:
            issues.append(("kappa2", f"must be non-negative, got {self.kappa2}"))
        if self.rayleigh_length < 0:
            issues.append(("rayleigh_length", f"must be non-negative, got {self.rayleigh_length}"))
        if self.wavelength_nm is not None:
            if self.wavelength_nm <= 0:
                issues.append(("wavelength_nm", f"must be positive, got {self.wavelength_nm}"))
            if self.rayleigh_length > 0:
                issues.append(
                    ("wavelength_nm", "give either rayleigh_length or wavelength_nm, not both")
                )
        if self.pixel_width < 0:
            issues.append(("pixel_width", f"must be non-negative, got {self.pixel_width}"))
        if self.detector_half_width is not None and self.detector_half_width <= 0:
            issues.append(
                ("detector_half_width", f"must be positive, got {self.detector_half_width}")
            )
        if (self.calibrate_mode is None) != (self.calibrate_value is None):
            issues.append(
                ("calibrate_value", "calibrate_mode and calibrate_value must be set together")
            )
        if self.calibrate_value is not None and self.calibrate_value <= 0:
            issues.append(("calibrate_value", f"must be positive, got {self.calibrate_value}"))
        return issues
