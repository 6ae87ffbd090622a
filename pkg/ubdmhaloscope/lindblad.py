"""Thermal Lindblad dynamics of the haloscope mode on a truncated Fock basis,
and the Born-Markov validity check."""
from dataclasses import dataclass, asdict
import logging
import warnings
import numpy as np
import pandas as pd
from scipy import optimize

from .base import (ConfigError, DomainError, TruncationError, TruncationWarning,
                   UsageError, check_positive)
from .constants import CONSTANTS
from .units import rate_gamma, doppler_shifted_frequency
from . import halo as halo_models

logger = logging.getLogger(__name__)

truncation_threshold = 1e-6
steady_state_tail_tol = 1e-12
stability_limit = 0.1


class DensityMatrix(object):
    """Haloscope state on Fock levels 0..N_max.

    Parameters
    ----------
    entries : array-like
        Square complex matrix.
    """

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise UsageError(f'Density matrix must be square, got shape {entries.shape}')
        self._entries = entries
        self._entries.setflags(write=False)

    @classmethod
    def vacuum(cls, N_max):
        return cls.fock(0, N_max)

    @classmethod
    def fock(cls, n, N_max):
        if not 0 <= n <= N_max:
            raise DomainError(f'Fock level {n} is outside 0..{N_max}')
        rho = np.zeros((N_max + 1, N_max + 1), dtype=complex)
        rho[n, n] = 1.0
        return cls(rho)

    @classmethod
    def thermal(cls, n_bar, N_max):
        """Bose-Einstein populations n^k/(n+1)^(k+1), renormalized on the truncated space"""
        return cls(np.diag(bose_einstein_populations(n_bar, N_max)))

    @property
    def entries(self):
        return self._entries

    @property
    def dim(self):
        return self._entries.shape[0]

    @property
    def N_max(self):
        return self.dim - 1

    @property
    def populations(self):
        return np.real(np.diag(self._entries)).copy()

    @property
    def mean_occupation(self):
        return float(np.dot(np.arange(self.dim), self.populations))

    @property
    def max_level_population(self):
        """Population of the highest retained level"""
        return float(np.real(self._entries[-1, -1]))

    @property
    def trace_error(self):
        return float(abs(np.trace(self._entries) - 1.0))

    @property
    def hermiticity_error(self):
        return float(np.max(np.abs(self._entries - self._entries.conj().T)))

    @property
    def min_eigenvalue(self):
        hermitian = 0.5 * (self._entries + self._entries.conj().T)
        return float(np.min(np.linalg.eigvalsh(hermitian)))

    def check(self, herm_tol=1e-12, trace_tol=1e-10, pos_tol=1e-10):
        """Raise a DomainError if any density-matrix invariant is violated"""
        if self.hermiticity_error > herm_tol:
            raise DomainError(f'Density matrix is not Hermitian (error {self.hermiticity_error:.2e})')
        if self.trace_error > trace_tol:
            raise DomainError(f'Density matrix trace error {self.trace_error:.2e}')
        if self.min_eigenvalue < -pos_tol:
            raise DomainError(f'Density matrix has negative eigenvalue {self.min_eigenvalue:.2e}')
        return True


def bose_einstein_populations(n_bar, N_max):
    check_positive(n_bar, 'n_bar', allow_zero=True)
    if n_bar == 0:
        p = np.zeros(N_max + 1)
        p[0] = 1.0
        return p
    levels = np.arange(N_max + 1)
    ratio = n_bar / (n_bar + 1.0)
    p = ratio**levels / (n_bar + 1.0)
    return p / p.sum()


@dataclass(frozen=True)
class LindbladParams:
    """Rates (1/s) and occupations of the haloscope baths.

    Attributes
    ----------
    gamma : float
        Axion-bath rate.
    n_eff : float
        Effective axion-bath occupation.
    omega_b : float
        Cavity frequency, rad/s; only enters in the lab frame.
    env_kappa, env_nth : float
        Ordinary-environment rate and occupation; zero disables the bath.
    rotating_frame : bool
        Drop the free Hamiltonian commutator.
    """
    gamma: float
    n_eff: float
    omega_b: float = 0.0
    env_kappa: float = 0.0
    env_nth: float = 0.0
    rotating_frame: bool = True

    def __post_init__(self):
        check_positive(self.gamma, 'gamma', allow_zero=True)
        check_positive(self.n_eff, 'n_eff', allow_zero=True)
        check_positive(self.omega_b, 'omega_b', allow_zero=True)
        check_positive(self.env_kappa, 'env_kappa', allow_zero=True)
        check_positive(self.env_nth, 'env_nth', allow_zero=True)

    @classmethod
    def from_physics(cls, axion, haloscope, dist, ctx, env_kappa=0.0, env_nth=0.0, rotating_frame=True):
        gamma = rate_gamma(axion, haloscope)
        occupation = halo_models.n_eff(dist, axion.mass_eV, ctx.rho_DM, haloscope.omega_b)
        return cls(gamma=gamma, n_eff=occupation, omega_b=haloscope.omega_b,
                   env_kappa=env_kappa, env_nth=env_nth, rotating_frame=rotating_frame)

    @property
    def total_rate(self):
        return self.gamma + self.env_kappa

    @property
    def total_occupation(self):
        """Rate-weighted occupation of the combined baths"""
        if self.total_rate == 0:
            return 0.0
        return (self.gamma * self.n_eff + self.env_kappa * self.env_nth) / self.total_rate

    def stability_number(self, N_max, dt):
        rate = self.gamma * (self.n_eff + 1.0) + self.env_kappa * (self.env_nth + 1.0)
        number = dt * rate * (N_max + 1)
        if not self.rotating_frame:
            number += dt * self.omega_b * N_max
        return number


@dataclass(frozen=True)
class MarkovReport:
    H_I_bound: float
    tau_c: float
    f_a_max: float
    valid: bool
    margin: float

    def to_dict(self):
        return asdict(self)


def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def _dissipator(L, Ld, LdL, rho):
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def _generator(p, dim):
    """Closure rho -> d rho/dt for the given parameters and dimension"""
    b = _ladder(dim)
    bd = b.conj().T
    bdb = bd @ b
    bbd = b @ bd
    number = np.diag(np.arange(dim, dtype=complex))
    channels = []
    # (rate, L, L^dagger, L^dagger L)
    for rate, occ in ((p.gamma, p.n_eff), (p.env_kappa, p.env_nth)):
        if rate > 0:
            channels.append((rate * (occ + 1.0), b, bd, bdb))
            if occ > 0:
                channels.append((rate * occ, bd, b, bbd))

    def rhs(rho):
        out = np.zeros_like(rho)
        if not p.rotating_frame and p.omega_b:
            out += -1j * p.omega_b * (number @ rho - rho @ number)
        for rate, L, Ld, LdL in channels:
            out += rate * _dissipator(L, Ld, LdL, rho)
        return out

    return rhs


def lindblad_rhs(rho, p, dim=None):
    """Time derivative of rho under the thermal Lindblad generator.

    Parameters
    ----------
    rho : DensityMatrix or np.array
    p : LindbladParams
    dim : int or None, optional
        Expected Hilbert-space dimension. If given and different from rho's, a UsageError is raised.

    Returns
    -------
    np.array
        d rho / dt in 1/s
    """
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise UsageError(f'Density matrix must be square, got shape {entries.shape}')
    if dim is not None and entries.shape[0] != dim:
        raise UsageError(f'Density matrix dimension {entries.shape[0]} does not match {dim}')
    return _generator(p, entries.shape[0])(entries)


def _rk4_step(rhs, rho, h):
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * h * k1)
    k3 = rhs(rho + 0.5 * h * k2)
    k4 = rhs(rho + h * k3)
    new = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (new + new.conj().T)


def _check_truncation(population, t, on_truncation):
    if population <= truncation_threshold:
        return
    msg = (f'Population {population:.3e} at the highest Fock level exceeds {truncation_threshold:.0e} '
           f'at t = {t:.6e} s; increase N_max')
    if on_truncation == 'warn':
        warnings.warn(msg, TruncationWarning)
    else:
        raise TruncationError(msg)


def _integrate(rho0, p, T, dt, on_truncation, record_every):
    if on_truncation not in ('error', 'warn'):
        raise ConfigError(f"on_truncation must be 'error' or 'warn', got {on_truncation!r}")
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)
    check_positive(T, 'T', allow_zero=True)
    check_positive(dt, 'dt')
    number = p.stability_number(rho0.N_max, dt)
    if number >= stability_limit:
        raise ConfigError(
            f'Step size dt = {dt:.3e} s violates the stability condition (dt * rates * (N_max+1) = {number:.3e} >= {stability_limit})')
    n_steps = int(np.ceil(T / dt - 1e-9)) if T > 0 else 0
    h = T / n_steps if n_steps else 0.0
    rhs = _generator(p, rho0.dim)
    rho = rho0.entries.copy()
    rows = [(0.0, rho0.mean_occupation, rho0.trace_error, rho0.max_level_population)]
    levels = np.arange(rho0.dim)
    # every step is checked; a run reports its first truncation event once
    reported = False
    for step in range(1, n_steps + 1):
        rho = _rk4_step(rhs, rho, h)
        top = float(np.real(rho[-1, -1]))
        t = step * h
        if not reported and top > truncation_threshold:
            _check_truncation(top, t, on_truncation)
            reported = True
        if record_every and (step % record_every == 0 or step == n_steps):
            pops = np.real(np.diag(rho))
            rows.append((t, float(levels @ pops), float(abs(np.trace(rho) - 1.0)), float(pops[-1])))
    final = DensityMatrix(rho)
    if not reported:
        _check_truncation(final.max_level_population, T, on_truncation)
    logger.debug('integrated %d steps of %.3e s, final <n> = %.12e', n_steps, h, final.mean_occupation)
    return final, rows


def evolve(rho0, p, T, dt, on_truncation='error'):
    """Integrate the master equation from rho0 to time T with fixed-step RK4.

    Parameters
    ----------
    rho0 : DensityMatrix
    p : LindbladParams
    T : float
        Horizon in s.
    dt : float
        Largest step in s; the step actually used divides T evenly.
    on_truncation : str, optional
        'error' (default) raises TruncationError when the top-level population
        exceeds 1e-6, 'warn' issues a TruncationWarning instead.

    Returns
    -------
    DensityMatrix
    """
    final, _ = _integrate(rho0, p, T, dt, on_truncation, record_every=None)
    return final


def trajectory(rho0, p, T, dt, record_every=1, on_truncation='error'):
    """Like evolve, also returning a DataFrame with columns
    t, mean_n, trace_error, max_level_population"""
    final, rows = _integrate(rho0, p, T, dt, on_truncation, record_every=max(int(record_every), 1))
    df = pd.DataFrame(rows, columns=['t', 'mean_n', 'trace_error', 'max_level_population'])
    return final, df


def steady_state(p, N_max, tail_tol=steady_state_tail_tol):
    """Bose-Einstein stationary state of the combined baths.

    Raises
    ------
    TruncationError
        If (n/(n+1))^N_max is not below tail_tol; large occupations belong to
        analytic_moments.
    """
    n_bar = p.total_occupation
    tail = (n_bar / (n_bar + 1.0)) ** N_max
    if tail >= tail_tol:
        raise TruncationError(
            f'Occupation {n_bar:.3e} leaves a truncation tail {tail:.3e} >= {tail_tol:.0e} at N_max = {N_max}; '
            'use analytic_moments for large occupations')
    return DensityMatrix.thermal(n_bar, N_max)


def analytic_moments(p, t, n0):
    """Closed-form mean occupation n + (n0 - n) exp(-Gamma t) of the combined baths"""
    t = np.asarray(t, dtype=float)
    rate = p.total_rate
    n_bar = p.total_occupation
    out = n_bar + (n0 - n_bar) * np.exp(-rate * t)
    return out if out.ndim else float(out)


def markov_margin(f_a_GeV, haloscope, ctx, Q_a, v_g=halo_models.default_v_g,
                  mass_fa_constant=None, coupling_per_fa=None, g_agg=None):
    """Return (|H_I| in rad/s, tau_c in s) for an axion with scale f_a.

    The mass follows from m_a f_a = K and the coupling from g_agg = C / f_a
    unless ``g_agg`` (1/GeV) is given.
    """
    C = CONSTANTS
    if mass_fa_constant is None:
        raise ConfigError('axion.mass_fa_constant is required for the Markov check')
    if g_agg is None:
        if coupling_per_fa is None:
            raise ConfigError('axion.g_gamma is required to relate g_agg to f_a')
        g_agg = coupling_per_fa / f_a_GeV
    mass_eV = mass_fa_constant / f_a_GeV
    density_m3 = (ctx.rho_DM * ctx.V / (mass_eV * C.eV_to_J)) / ctx.V
    volume_nat = haloscope.V_prime / C.hbar_c_eV_m**3
    density_nat = C.inv_m3_to_eV3(density_m3)
    H_I_eV = 2.0 * C.per_GeV_to_per_eV(g_agg) * C.tesla_to_eV2(haloscope.B0) * np.sqrt(volume_nat * density_nat) / np.pi
    tau_c = Q_a / doppler_shifted_frequency(mass_eV, v_g)
    return float(C.rate_eV_to_rad_s(H_I_eV)), float(tau_c)


def markov_check(axion, haloscope, ctx, Q_a, v_g=halo_models.default_v_g):
    """Born-Markov validity of the axion bath.

    Parameters
    ----------
    axion : AxionParams
    haloscope : HaloscopeParams
    ctx : FieldQuantizationContext
    Q_a : float
        Axion quality factor.
    v_g : array-like, optional
        Lab velocity used for the Doppler-shifted frequency.

    Returns
    -------
    MarkovReport
        ``margin`` is (|H_I| tau_c)^2; ``f_a_max`` solves |H_I| tau_c = 1.
    """
    check_positive(Q_a, 'Q_a')
    C_fa = axion.coupling_per_fa
    K = axion.mass_fa_constant
    H_I, tau_c = markov_margin(axion.f_a, haloscope, ctx, Q_a, v_g=v_g, mass_fa_constant=K,
                               coupling_per_fa=C_fa, g_agg=axion.g_agg_GeV)
    margin = (H_I * tau_c) ** 2

    def log_product(log_fa):
        h, tc = markov_margin(10.0**log_fa, haloscope, ctx, Q_a, v_g=v_g,
                              mass_fa_constant=K, coupling_per_fa=C_fa)
        return np.log(h * tc)

    if haloscope.B0 == 0:
        f_a_max = np.inf
    else:
        lo = hi = np.log10(axion.f_a)
        while log_product(hi) < 0:
            hi += 1.0
        while log_product(lo) > 0:
            lo -= 1.0
        f_a_max = 10.0 ** optimize.brentq(log_product, lo, hi, xtol=1e-14, rtol=1e-14)
    report = MarkovReport(H_I_bound=H_I, tau_c=tau_c, f_a_max=float(f_a_max),
                          valid=bool(margin < 1.0), margin=float(margin))
    logger.debug('Markov check: %s', report)
    return report
