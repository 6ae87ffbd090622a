"""Two-cavity Heisenberg-Langevin model: a haloscope cavity b fed through a
lossy "axion cavity" a that stands in for the galactic field."""
from dataclasses import dataclass
import logging
import warnings
import numpy as np
import pandas as pd
from scipy import integrate

from .base import (ConfigError, DomainError, ResolutionError, SmallCouplingWarning,
                   UsageError, check_positive)
from .units import omega_of_k
from . import halo as halo_models
from . import io_utils

logger = logging.getLogger(__name__)

default_Q_a = 1e6
small_coupling_ratio = 0.01
max_grid_points = 2**21


@dataclass(frozen=True)
class TwoCavityParams:
    """Parameters of the coupled-cavity model (rates in rad/s).

    kappa_a is not stored; it is omega_phi_prime / Q_a.
    """
    omega_b: float
    kappa_c: float
    omega_phi_prime: float
    g2c: float
    Q_a: float = default_Q_a

    def __post_init__(self):
        check_positive(self.omega_b, 'omega_b')
        check_positive(self.kappa_c, 'kappa_c')
        check_positive(self.omega_phi_prime, 'omega_phi_prime')
        check_positive(self.Q_a, 'Q_a')
        check_positive(self.g2c, 'g2c', allow_zero=True)

    @property
    def kappa_a(self):
        return self.omega_phi_prime / self.Q_a

    @property
    def coupling_ratio(self):
        """g2c^2 / (kappa_a kappa_c)"""
        return self.g2c**2 / (self.kappa_a * self.kappa_c)

    @property
    def small_coupling(self):
        return self.coupling_ratio < small_coupling_ratio


def _flat(value):
    def spectrum(omega):
        return np.full(np.shape(omega), float(value))
    return spectrum


def _tabulated(omega_tab, values):
    def spectrum(omega):
        return np.interp(omega, omega_tab, values, left=0.0, right=0.0)
    return spectrum


class InputSpectra(object):
    """Input noise spectra (occupation per unit bandwidth) of both cavities.

    Parameters
    ----------
    S_bin : callable
        omega -> haloscope input spectrum.
    S_ain : callable
        omega -> axion-cavity input spectrum.
    """

    def __init__(self, S_bin, S_ain, description=None):
        self.S_bin = S_bin
        self.S_ain = S_ain
        self.description = description or {}

    @classmethod
    def flat(cls, n_th=0.0, n_a=0.0):
        check_positive(n_th, 'n_th', allow_zero=True)
        check_positive(n_a, 'n_a', allow_zero=True)
        return cls(_flat(n_th), _flat(n_a), {'S_bin': 'flat', 'n_th': n_th, 'S_ain': 'flat', 'n_a': n_a})

    @classmethod
    def from_lineshape(cls, dist, mass_eV, n_a, n_th=0.0, n_table=20001):
        """Axion input carrying the halo frequency lineshape, scaled to peak value n_a"""
        check_positive(n_a, 'n_a', allow_zero=True)
        lo, hi = dist.support()
        mom = halo_models.MomentumDistribution(dist, mass_eV)
        omega_tab = omega_of_k(np.linspace(lo, hi, n_table) / mom.velocity_per_wavenumber, mass_eV)
        shape = halo_models.frequency_lineshape(dist, mass_eV, omega_tab)
        peak = float(np.max(shape))
        values = n_a * shape / peak if peak > 0 else np.zeros_like(shape)
        return cls(_flat(n_th), _tabulated(omega_tab, values),
                   {'S_bin': 'flat', 'n_th': n_th, 'S_ain': 'halo lineshape', 'n_a': n_a,
                    'halo': dist.parameters()})

    @classmethod
    def from_tables(cls, bin_table=None, ain_table=None, n_th=0.0, n_a=0.0):
        """Tabulated spectra from two-column files; missing tables fall back to flat values"""
        S_bin, S_ain = _flat(n_th), _flat(n_a)
        if bin_table is not None:
            S_bin = _tabulated(*_load_spectrum(bin_table))
        if ain_table is not None:
            S_ain = _tabulated(*_load_spectrum(ain_table))
        return cls(S_bin, S_ain, {'S_bin': bin_table or 'flat', 'n_th': n_th,
                                  'S_ain': ain_table or 'flat', 'n_a': n_a})


def _load_spectrum(path):
    omega, values = io_utils.read_two_column(path)
    if np.any(np.diff(omega) <= 0):
        raise ConfigError(f'Spectrum table {path} needs strictly increasing frequencies')
    if np.any(values < 0):
        raise ConfigError(f'Spectrum table {path} has negative values')
    return omega, values


class SpectrumGrid(object):
    """Sampled power spectral density.

    Parameters
    ----------
    omega : array-like
        Strictly increasing angular frequencies, rad/s.
    S : array-like
        Non-negative PSD values.
    components : dict, optional
        Named parts of S (e.g. 'cavity', 'axion') on the same grid.
    """

    def __init__(self, omega, S, components=None):
        omega = np.asarray(omega, dtype=float)
        S = np.asarray(S, dtype=float)
        if omega.ndim != 1 or omega.shape != S.shape:
            raise UsageError('omega and S must be one-dimensional arrays of equal length')
        if np.any(np.diff(omega) <= 0):
            raise DomainError('omega must be strictly increasing')
        if np.any(S < 0):
            raise DomainError('PSD values must be non-negative')
        self.omega = omega
        self.S = S
        self.components = dict(components or {})

    def __len__(self):
        return self.omega.size

    @property
    def spacing(self):
        return float((self.omega[-1] - self.omega[0]) / (self.omega.size - 1))

    def is_uniform(self, rtol=1e-9):
        """True when every step matches the mean step to rtol, plus the float
        rounding of the absolute frequencies"""
        steps = np.diff(self.omega)
        mean_step = (self.omega[-1] - self.omega[0]) / (self.omega.size - 1)
        rounding = 4 * np.finfo(float).eps * float(np.max(np.abs(self.omega)))
        return bool(np.all(np.abs(steps - mean_step) <= rtol * abs(mean_step) + rounding))

    def mean_occupation(self):
        """Trapezoid estimate of int S domega / 2 pi"""
        return float(integrate.trapezoid(self.S, self.omega) / (2 * np.pi))

    def component(self, name):
        if name is None:
            return self.S
        if name not in self.components:
            raise UsageError(f'Unknown spectrum component {name!r}, have {sorted(self.components)}')
        return self.components[name]

    def to_dataframe(self):
        return pd.DataFrame({'omega_rad_s': self.omega, 'S_value': self.S})


def susceptibility(params, which, omega):
    """Complex Lorentzian response [i(omega_0 - omega) + kappa/2]^-1 in s.

    Parameters
    ----------
    params : TwoCavityParams
    which : str
        'cavity' (omega_b, kappa_c) or 'axion' (omega_phi_prime, kappa_a).
    omega : float or array
    """
    omega0, kappa = _resonance(params, which)
    return 1.0 / (1j * (omega0 - np.asarray(omega, dtype=float)) + 0.5 * kappa)


def _resonance(params, which):
    if which == 'cavity':
        return params.omega_b, params.kappa_c
    if which == 'axion':
        return params.omega_phi_prime, params.kappa_a
    raise UsageError(f"which must be 'cavity' or 'axion', got {which!r}")


def _abs2_susceptibility(params, which, omega):
    omega0, kappa = _resonance(params, which)
    detuning = omega0 - omega
    return 1.0 / (detuning * detuning + 0.25 * kappa * kappa)


def output_psd(params, inputs, omega):
    """Haloscope output spectrum.

    S = kappa_c |chi_b|^2 S_bin + g2c^2 kappa_a |chi_b|^2 |chi_a|^2 S_ain

    Returns
    -------
    SpectrumGrid
        With components 'cavity' and 'axion'.
    """
    omega = np.asarray(omega, dtype=float)
    if not params.small_coupling:
        warnings.warn(f'g2c^2/(kappa_a kappa_c) = {params.coupling_ratio:.3e} is outside the '
                      f'small-coupling regime (< {small_coupling_ratio})', SmallCouplingWarning)
    S_bin = np.asarray(inputs.S_bin(omega), dtype=float)
    S_ain = np.asarray(inputs.S_ain(omega), dtype=float)
    if np.any(S_bin < 0) or np.any(S_ain < 0):
        raise DomainError('Input spectra must be non-negative')
    chi_b2 = _abs2_susceptibility(params, 'cavity', omega)
    chi_a2 = _abs2_susceptibility(params, 'axion', omega)
    cavity = params.kappa_c * chi_b2 * S_bin
    axion = params.g2c**2 * params.kappa_a * chi_b2 * chi_a2 * S_ain
    return SpectrumGrid(omega, cavity + axion, components={'cavity': cavity, 'axion': axion})


def uniform_grid(params, linewidths=40, points_per_linewidth=16, n_points=None):
    """Uniform grid covering both resonances.

    Spans ``linewidths`` of the broader feature beyond the two resonances with
    ``points_per_linewidth`` samples per narrower linewidth, unless ``n_points``
    is given.
    """
    broad = max(params.kappa_c, params.kappa_a)
    narrow = min(params.kappa_c, params.kappa_a)
    lo = min(params.omega_b, params.omega_phi_prime) - 0.5 * linewidths * broad
    hi = max(params.omega_b, params.omega_phi_prime) + 0.5 * linewidths * broad
    if n_points is None:
        n_points = int(np.ceil((hi - lo) / (narrow / points_per_linewidth))) + 1
    if n_points > max_grid_points:
        raise ConfigError(f'Grid would need {n_points} points; set psd.grid_points or reduce the span')
    return np.linspace(lo, hi, int(n_points))


def feature_fwhm(grid, component=None, min_points=10):
    """Full width at half maximum of a spectral feature, in rad/s.

    Crossings are located by linear interpolation between samples.

    Raises
    ------
    ResolutionError
        If fewer than ``min_points`` samples lie above half maximum or the
        feature runs off the grid.
    """
    S = np.asarray(grid.component(component), dtype=float)
    omega = grid.omega
    i_peak = int(np.argmax(S))
    half = 0.5 * S[i_peak]
    if half <= 0:
        raise ResolutionError('Feature has zero height')
    above = S >= half
    if int(np.count_nonzero(above)) < min_points:
        raise ResolutionError(
            f'Only {int(np.count_nonzero(above))} samples across the feature, need at least {min_points}')
    i = i_peak
    while i > 0 and S[i - 1] >= half:
        i -= 1
    j = i_peak
    while j < S.size - 1 and S[j + 1] >= half:
        j += 1
    if i == 0 or j == S.size - 1:
        raise ResolutionError('Feature is not contained in the grid')
    left = omega[i - 1] + (half - S[i - 1]) * (omega[i] - omega[i - 1]) / (S[i] - S[i - 1])
    right = omega[j] + (S[j] - half) * (omega[j + 1] - omega[j]) / (S[j] - S[j + 1])
    return float(right - left)


def g1_time_domain(grid, window=None, component=None):
    """Unnormalized first-order correlation G1(tau) = int S(omega) e^{-i omega tau} domega / 2 pi.

    Evaluated with one FFT at tau_m = 2 pi m / (N d_omega), |m| < N/2.

    Parameters
    ----------
    grid : SpectrumGrid
        Must be uniform in omega.
    window : str or None, optional
        'hann' tapers S before the transform. By default None, which keeps
        G1(0) equal to the Riemann sum of S.

    Returns
    -------
    tau : np.array
        Symmetric delays in s, ascending.
    G1 : np.array
        Complex correlation; G1(-tau) is exactly conj(G1(tau)).
    """
    if len(grid) < 2 or not grid.is_uniform():
        raise UsageError('g1_time_domain needs a uniform omega grid')
    S = np.asarray(grid.component(component), dtype=float)
    N = S.size
    if window == 'hann':
        S = S * np.hanning(N)
    elif window is not None:
        raise UsageError(f"window must be None or 'hann', got {window!r}")
    d_omega = grid.spacing
    spectrum = np.fft.fft(S)
    m = np.arange(0, (N + 1) // 2)
    tau_pos = 2 * np.pi * m / (N * d_omega)
    G_pos = (d_omega / (2 * np.pi)) * np.exp(-1j * grid.omega[0] * tau_pos) * spectrum[m]
    G_pos[0] = d_omega / (2 * np.pi) * np.sum(S)
    tau = np.concatenate([-tau_pos[:0:-1], tau_pos])
    G1 = np.concatenate([np.conj(G_pos[:0:-1]), G_pos])
    return tau, G1


def effective_two_cavity_coupling(gamma, kappa_a):
    """g2c = sqrt(Gamma kappa_a) / 2, so that 4 g2c^2 / kappa_a = Gamma"""
    check_positive(gamma, 'gamma', allow_zero=True)
    check_positive(kappa_a, 'kappa_a')
    return 0.5 * np.sqrt(gamma * kappa_a)


def axion_term_occupation(params, n_a):
    """int S_axion domega / 2 pi for a flat axion input n_a (closed form)"""
    alpha = 0.5 * params.kappa_c
    beta = 0.5 * params.kappa_a
    detuning = params.omega_b - params.omega_phi_prime
    return params.g2c**2 * params.kappa_a * n_a * (alpha + beta) / (
        2 * alpha * beta * (detuning**2 + (alpha + beta)**2))
