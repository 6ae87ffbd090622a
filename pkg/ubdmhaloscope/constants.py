"""Physical constants (CODATA 2018) and natural-unit converters.

Everything inside the package works in base SI units (rad/s, m, s, J, T).
The converters here are the only place eV/GeV and the Heaviside-Lorentz
natural system (hbar = c = 1) meet SI.
"""
from dataclasses import dataclass
import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    """Fixed CODATA values.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant, J s
    c : float
        Speed of light, m/s
    eps0 : float
        Vacuum permittivity, F/m
    mu0 : float
        Vacuum permeability, H/m
    eV_to_J : float
        Joules per electronvolt
    GeV_per_cm3_to_J_per_m3 : float
        Converts an energy density in GeV/cm^3 to J/m^3
    alpha : float
        Fine-structure constant
    """
    hbar: float = 1.054571817e-34
    c: float = 299792458.0
    eps0: float = 8.8541878128e-12
    mu0: float = 1.25663706212e-6
    eV_to_J: float = 1.602176634e-19
    GeV_per_cm3_to_J_per_m3: float = 1.602176634e-19 * 1e9 * 1e6
    alpha: float = 7.2973525693e-3

    @property
    def GeV_to_J(self):
        return self.eV_to_J * 1e9

    @property
    def hbar_eV_s(self):
        """hbar in eV s"""
        return self.hbar / self.eV_to_J

    @property
    def hbar_c_eV_m(self):
        """hbar*c in eV m"""
        return self.hbar * self.c / self.eV_to_J

    def inv_m3_to_eV3(self, density_m3):
        return density_m3 * self.hbar_c_eV_m**3

    def tesla_to_eV2(self, field_T):
        """Magnetic field in T to eV^2 (Heaviside-Lorentz, hbar = c = 1).

        Matches B^2/mu0 (SI energy density, times two) to B^2 in natural units.
        """
        energy_density_eV_m3 = np.square(field_T) / self.mu0 / self.eV_to_J
        return np.sqrt(energy_density_eV_m3 * self.hbar_c_eV_m**3)

    def per_GeV_to_per_eV(self, value):
        return value * 1e-9

    def rate_eV_to_rad_s(self, energy_eV):
        return energy_eV / self.hbar_eV_s


CONSTANTS = PhysicalConstants()
