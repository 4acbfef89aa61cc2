"""Conversion between laboratory parameters and oscillator units."""

import chz
import numpy as np
from scipy import constants

RB87_MASS_U = 86.909180527
RB87_SCATTERING_LENGTH_A0 = 98.98


@chz.chz
class PhysicalTrap:
    """
    Laboratory description of an elongated trap.

    Defaults describe 1000 87Rb atoms with omega_x = 2 pi 150 Hz and a transverse
    frequency 100 times larger.
    """

    atom_number: float = 1000.0
    axial_frequency_hz: float = 150.0
    transverse_ratio: float = 100.0
    scattering_length_a0: float = RB87_SCATTERING_LENGTH_A0
    mass_u: float = RB87_MASS_U

    @property
    def mass(self) -> float:
        return self.mass_u * constants.atomic_mass

    @property
    def omega_x(self) -> float:
        return 2.0 * np.pi * self.axial_frequency_hz

    @property
    def omega_perp(self) -> float:
        return self.transverse_ratio * self.omega_x

    @property
    def l_x(self) -> float:
        """Axial oscillator length in metres."""
        return float(np.sqrt(constants.hbar / (self.mass * self.omega_x)))

    @property
    def l_perp(self) -> float:
        return float(np.sqrt(constants.hbar / (self.mass * self.omega_perp)))

    @property
    def scattering_length(self) -> float:
        return self.scattering_length_a0 * constants.physical_constants["Bohr radius"][0]

    @property
    def g1d(self) -> float:
        """1D coupling 2 hbar^2 a / (m l_perp^2) in J m."""
        return 2.0 * constants.hbar**2 * self.scattering_length / (self.mass * self.l_perp**2)

    def interaction(self) -> float:
        """Dimensionless N g1d / (hbar omega_x l_x) = 2 N a omega_perp / (omega_x l_x)."""
        return (
            2.0 * self.atom_number * self.scattering_length * self.omega_perp
            / (self.omega_x * self.l_x)
        )

    def rayleigh_length(self, wavelength_m: float) -> float:
        """Diffraction-limited resolution sqrt(l_perp lambda) in units of l_x."""
        if wavelength_m <= 0:
            raise ValueError(f"wavelength must be positive, got {wavelength_m}")
        return float(np.sqrt(self.l_perp * wavelength_m) / self.l_x)

    def to_seconds(self, t: float) -> float:
        return t / self.omega_x
