"""Axion and haloscope parameters, the massive dispersion relation, and the
haloscope-axion coupling constant."""
from dataclasses import dataclass, field
import numpy as np

from .base import DomainError, EvanescentModeError, ConfigError, check_positive, exactly_one
from .constants import CONSTANTS

# External literature value: m_a * f_a = 5.7e-6 eV * 1e12 GeV
default_mass_fa_constant = 5.7e6  # eV GeV
# g_agg = alpha * g_gamma / (pi * f_a)
default_g_gamma = 0.97
default_quantization_volume = 1e63  # (1e21 m)^3
default_rho_DM_GeV_cm3 = 0.3


def mass_fa_convert(mass_eV=None, f_a_GeV=None, K=default_mass_fa_constant):
    """Convert between axion mass and symmetry-breaking scale, m_a * f_a = K.

    Parameters
    ----------
    mass_eV : float or None
        Axion mass in eV.
    f_a_GeV : float or None
        Symmetry-breaking scale in GeV.
    K : float, optional
        Proportionality constant in eV GeV. By default 5.7e6.

    Returns
    -------
    float
        f_a in GeV if the mass was given, otherwise the mass in eV.
    """
    name, value = exactly_one(mass_eV=mass_eV, f_a_GeV=f_a_GeV)
    check_positive(value, name)
    check_positive(K, 'K')
    return K / value


@dataclass(frozen=True)
class AxionParams:
    """Particle-physics inputs.

    ``g_agg`` (1/GeV) and ``f_a_GeV`` are optional; missing values are derived
    from the mass through ``mass_fa_constant`` and ``g_gamma``.
    """
    mass_eV: float
    g_agg: float = None
    f_a_GeV: float = None
    mass_fa_constant: float = default_mass_fa_constant
    g_gamma: float = default_g_gamma

    def __post_init__(self):
        check_positive(self.mass_eV, 'mass_eV')
        if self.g_agg is not None:
            check_positive(self.g_agg, 'g_agg', allow_zero=True)
        if self.f_a_GeV is not None:
            check_positive(self.f_a_GeV, 'f_a_GeV')
            product = self.mass_eV * self.f_a_GeV
            if abs(product - self.mass_fa_constant) > 1e-12 * self.mass_fa_constant:
                raise DomainError(
                    f'mass_eV * f_a_GeV = {product:.15e} does not match the configured constant {self.mass_fa_constant:.15e}')

    @classmethod
    def from_fa(cls, f_a_GeV, g_gamma=default_g_gamma, mass_fa_constant=default_mass_fa_constant, g_agg=None):
        mass = mass_fa_convert(f_a_GeV=f_a_GeV, K=mass_fa_constant)
        # f_a is rederived from the mass on access
        return cls(mass_eV=mass, g_agg=g_agg, f_a_GeV=None,
                   mass_fa_constant=mass_fa_constant, g_gamma=g_gamma)

    @property
    def f_a(self):
        """Symmetry-breaking scale in GeV, derived from the mass when not set"""
        if self.f_a_GeV is not None:
            return self.f_a_GeV
        return mass_fa_convert(mass_eV=self.mass_eV, K=self.mass_fa_constant)

    @property
    def coupling_per_fa(self):
        """Constant C in g_agg = C / f_a, in GeV^-1 GeV"""
        if self.g_gamma is None:
            raise ConfigError('axion.g_gamma is required to relate g_agg to f_a')
        return CONSTANTS.alpha * self.g_gamma / np.pi

    @property
    def g_agg_GeV(self):
        """Axion-photon coupling in 1/GeV"""
        if self.g_agg is not None:
            return self.g_agg
        return self.coupling_per_fa / self.f_a

    @property
    def g_agg_J(self):
        """Axion-photon coupling in 1/J"""
        return self.g_agg_GeV / CONSTANTS.GeV_to_J


@dataclass(frozen=True)
class HaloscopeParams:
    """Cavity resonance (rad/s), coupling volume (m^3), field (T) and decay rate (rad/s)"""
    omega_b: float
    V_prime: float
    B0: float
    kappa_c: float

    def __post_init__(self):
        check_positive(self.omega_b, 'omega_b')
        check_positive(self.V_prime, 'V_prime')
        check_positive(self.B0, 'B0', allow_zero=True)
        check_positive(self.kappa_c, 'kappa_c')
        if self.kappa_c >= self.omega_b:
            raise DomainError(f'kappa_c ({self.kappa_c}) must be smaller than omega_b ({self.omega_b})')

    @classmethod
    def from_quality(cls, omega_b, V_prime, B0, Q_c):
        check_positive(Q_c, 'Q_c')
        return cls(omega_b=omega_b, V_prime=V_prime, B0=B0, kappa_c=omega_b / Q_c)

    @property
    def Q_c(self):
        return self.omega_b / self.kappa_c


@dataclass(frozen=True)
class FieldQuantizationContext:
    """Quantization volume V (m^3) and local dark-matter energy density (J/m^3).

    V is bookkeeping only; no exported observable depends on it.
    """
    V: float = default_quantization_volume
    rho_DM: float = field(default=default_rho_DM_GeV_cm3 * CONSTANTS.GeV_per_cm3_to_J_per_m3)

    def __post_init__(self):
        check_positive(self.V, 'V')
        check_positive(self.rho_DM, 'rho_DM', allow_zero=True)

    @classmethod
    def from_GeV_per_cm3(cls, rho_GeV_cm3, V=default_quantization_volume):
        return cls(V=V, rho_DM=rho_GeV_cm3 * CONSTANTS.GeV_per_cm3_to_J_per_m3)


def compton_frequency(mass_eV):
    """omega_c = m c^2 / hbar in rad/s"""
    check_positive(mass_eV, 'mass_eV')
    out = np.asarray(mass_eV, dtype=float) * CONSTANTS.eV_to_J / CONSTANTS.hbar
    return out if out.ndim else float(out)


def _compton_wavenumber(mass_eV):
    # mc/hbar
    return compton_frequency(mass_eV) / CONSTANTS.c


def omega_of_k(k, mass_eV):
    """Angular frequency of the massive mode with wavenumber k.

    Parameters
    ----------
    k : float or array
        Wavenumber in rad/m, non-negative.
    mass_eV : float
        Field mass in eV.

    Returns
    -------
    float or array
        omega in rad/s with (hbar omega)^2 = (m c^2)^2 + (hbar k c)^2
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError('Wavenumber must be non-negative')
    omega_c = compton_frequency(mass_eV)
    y = k / _compton_wavenumber(mass_eV)
    out = omega_c * np.sqrt(1.0 + y * y)
    return out if out.ndim else float(out)


def k_of_omega(omega, mass_eV):
    """Inverse of omega_of_k.

    Raises
    ------
    EvanescentModeError
        If omega lies below the mass gap m c^2 / hbar.
    """
    omega = np.asarray(omega, dtype=float)
    omega_c = compton_frequency(mass_eV)
    r = omega / omega_c
    if np.any(r < 1.0):
        raise EvanescentModeError(
            f'omega below the mass gap {float(omega_c):.10e} rad/s has no propagating mode')
    out = _compton_wavenumber(mass_eV) * np.sqrt((r - 1.0) * (r + 1.0))
    return out if out.ndim else float(out)


def group_velocity(k, mass_eV):
    """d omega / dk = c^2 k / omega"""
    return CONSTANTS.c**2 * np.asarray(k, dtype=float) / omega_of_k(k, mass_eV)


def doppler_shifted_frequency(mass_eV, v_g):
    """Compton frequency seen in the lab, omega_c (1 + |v_g|^2 / 2c^2).

    Parameters
    ----------
    mass_eV : float
    v_g : array-like
        Lab velocity relative to the halo rest frame, m/s. A scalar is read as the speed.
    """
    speed = float(np.linalg.norm(np.atleast_1d(np.asarray(v_g, dtype=float))))
    if speed >= CONSTANTS.c:
        raise DomainError(f'|v_g| = {speed} m/s is not below c')
    beta2 = (speed / CONSTANTS.c) ** 2
    return float(compton_frequency(mass_eV) * (1.0 + 0.5 * beta2))


def coupling_g(axion, halo):
    """Haloscope-axion coupling g = g_agg (B0/mu0) sqrt(hbar omega_b V' c / eps0).

    Returns
    -------
    float
        g in m^{3/2} s^{-3/2}
    """
    C = CONSTANTS
    return axion.g_agg_J * (halo.B0 / C.mu0) * np.sqrt(C.hbar * halo.omega_b * halo.V_prime * C.c / C.eps0)


def rate_gamma(axion, halo, omega_b=None):
    """Axion-bath rate Gamma = (g/c)^2 k_b / (4 pi) in 1/s"""
    if omega_b is None:
        omega_b = halo.omega_b
    k_b = k_of_omega(omega_b, axion.mass_eV)
    g = coupling_g(axion, halo)
    return (g / CONSTANTS.c) ** 2 * k_b / (4 * np.pi)
