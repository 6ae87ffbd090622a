"""First- and second-order coherence of the field at a fixed point, and the
photon-counting probabilities of a cavity detector."""
from dataclasses import dataclass, field
import logging
import numpy as np
import pandas as pd

from .base import DomainError, UsageError, ValidityError, check_positive
from .constants import CONSTANTS
from .units import compton_frequency, doppler_shifted_frequency
from . import halo as halo_models

logger = logging.getLogger(__name__)

default_Q_a = 1e6
default_ratio = 20.0
envelope_tol = 1e-9
_tau_block = 64


def coherence_time(omega, Q_a=default_Q_a):
    """tau_coh = 2 Q_a / omega in s"""
    check_positive(omega, 'omega')
    check_positive(Q_a, 'Q_a')
    return 2.0 * Q_a / omega


def _envelope_phase_rate(v, omega_c):
    """omega_k - omega_c as a function of speed, without cancellation"""
    x = (v / CONSTANTS.c) ** 2
    return omega_c * x / (np.sqrt(1.0 + x) + 1.0)


class CoherentState(object):
    """Single-mode coherent field oscillating at ``omega``"""
    variant = 'coherent'

    def __init__(self, omega, Q_a=default_Q_a, label='coherent'):
        check_positive(omega, 'omega')
        self.omega = float(omega)
        self.label = label
        self.coherence_time = coherence_time(self.omega, Q_a)

    def g1(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.exp(-1j * self.omega * tau)

    def g2(self, tau):
        return np.ones(np.shape(tau))

    def parameters(self):
        return {'variant': self.variant, 'omega': self.omega}


class ThermalState(object):
    """Multimode thermal field with momenta drawn from a halo distribution.

    g1 is the normalized <1/omega_k>-weighted average of exp(-i omega_k tau),
    evaluated as a speed integral of the slowly varying envelope with the
    carrier exp(-i omega_c tau) factored out.

    Parameters
    ----------
    dist : MomentumDistribution
    Q_a : float, optional
        Quality factor that sets the reported coherence time. By default 1e6.
    """
    variant = 'thermal'

    def __init__(self, dist, Q_a=default_Q_a, label=None, tol=envelope_tol):
        if not isinstance(dist, halo_models.MomentumDistribution):
            raise UsageError('ThermalState needs a MomentumDistribution')
        self.dist = dist
        self.label = label or dist.parent.variant
        self.tol = tol
        self.omega_c = compton_frequency(dist.mass_eV)
        v_g = getattr(dist.parent, 'v_g', None)
        if v_g is None and hasattr(dist.parent, 'round_component'):
            v_g = dist.parent.round_component.v_g
        self.omega_ref = (doppler_shifted_frequency(dist.mass_eV, v_g) if v_g is not None else self.omega_c)
        self.coherence_time = coherence_time(self.omega_ref, Q_a)

    def envelope(self, tau):
        """g1(tau) exp(+i omega_c tau)"""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.empty(tau.shape, dtype=complex)
        flat = tau.ravel()
        res = out.reshape(-1)
        omega_c = self.omega_c
        c = CONSTANTS.c
        for start in range(0, flat.size, _tau_block):
            block = flat[start:start + _tau_block]

            def integrand(v):
                weight = 1.0 / np.sqrt(1.0 + (v / c)**2)
                phase = np.exp(-1j * np.outer(_envelope_phase_rate(v, omega_c), block))
                return np.concatenate([weight[:, None] * phase, weight[:, None]], axis=1)

            est = halo_models.integrate_speed(self.dist.parent, integrand, tol=self.tol)
            res[start:start + _tau_block] = est[:-1] / est[-1].real
        return out

    def g1(self, tau):
        tau_arr = np.asarray(tau, dtype=float)
        out = np.exp(-1j * self.omega_c * tau_arr) * self.envelope(tau_arr).reshape(tau_arr.shape)
        return out

    def g2(self, tau):
        return 1.0 + np.abs(self.g1(tau))**2

    def parameters(self):
        params = {'variant': self.variant, 'mass_eV': self.dist.mass_eV,
                  'quadrature_tol': self.tol}
        params['halo'] = self.dist.parent.parameters()
        return params


class TabulatedSpectrumState(object):
    """Gaussian (thermal-statistics) field with a sampled power spectrum"""
    variant = 'spectrum'

    def __init__(self, grid, Q_a=default_Q_a, label='spectrum'):
        self.grid = grid
        self.label = label
        weights = np.zeros(len(grid))
        steps = np.diff(grid.omega)
        weights[:-1] += 0.5 * steps
        weights[1:] += 0.5 * steps
        self._w = weights * grid.S
        total = float(np.sum(self._w))
        if total <= 0:
            raise DomainError('Spectrum carries no power')
        self._total = total
        self._center = float(np.sum(self._w * grid.omega) / total)
        self.coherence_time = coherence_time(self._center, Q_a)

    def g1(self, tau):
        tau = np.asarray(tau, dtype=float)
        offsets = self.grid.omega - self._center
        env = np.exp(-1j * np.multiply.outer(tau, offsets)) @ self._w / self._total
        return np.exp(-1j * self._center * tau) * env

    def g2(self, tau):
        return 1.0 + np.abs(self.g1(tau))**2

    def parameters(self):
        return {'variant': self.variant, 'n_points': len(self.grid)}


state_mapping = {
    'coherent': CoherentState,
    'thermal': ThermalState,
    'spectrum': TabulatedSpectrumState,
}


def FieldState(variant, *args, **kwargs):
    """Build a field state.

    Parameters
    ----------
    variant : str
        'coherent' (takes omega), 'thermal' (takes a MomentumDistribution) or
        'spectrum' (takes a SpectrumGrid).
    """
    if variant not in state_mapping:
        raise UsageError(f'Unknown field state {variant!r}, choose from {sorted(state_mapping)}')
    return state_mapping[variant](*args, **kwargs)


def g1(state, tau):
    """Normalized first-order coherence of a field state"""
    out = state.g1(tau)
    return complex(out) if np.ndim(out) == 0 else out


def g2(state, tau):
    """Normalized second-order coherence of a field state"""
    out = np.asarray(state.g2(tau), dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass
class CoherenceCurve:
    tau: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    state_label: str
    tau_coh: float = None
    parameters: dict = field(default_factory=dict)

    def to_dataframe(self):
        df = pd.DataFrame({'tau_s': self.tau})
        if self.tau_coh:
            df['tau_over_tau_coh'] = self.tau / self.tau_coh
        df['re_g1'] = np.real(self.g1)
        df['im_g1'] = np.imag(self.g1)
        df['abs_g1'] = np.abs(self.g1)
        df['g2'] = self.g2
        return df


def g2_curve(states, tau_grid):
    """One CoherenceCurve per state over a sorted, non-negative tau grid (s)"""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or np.any(tau < 0) or np.any(np.diff(tau) < 0):
        raise DomainError('tau grid must be sorted and non-negative')
    curves = []
    for state in states:
        first = np.asarray(state.g1(tau), dtype=complex)
        if state.variant == 'coherent':
            second = np.ones(tau.shape)
        else:
            second = 1.0 + np.abs(first)**2
        curves.append(CoherenceCurve(tau=tau, g1=first, g2=second, state_label=state.label,
                                     tau_coh=state.coherence_time, parameters=state.parameters()))
        logger.debug('curve %s: %d points', state.label, tau.size)
    return curves


def _sample_streams(seed, n_samples, chunk):
    return halo_models._spawn_generators(seed, n_samples, chunk)


def monte_carlo_g1(dist, tau, n_samples=10_000_000, seed=0, chunk=1_000_000):
    """Monte Carlo estimate of the thermal g1 defining integral.

    Velocities are sampled from the halo distribution; each carries weight
    omega_c/omega_k. Chunks use independent streams spawned from ``seed``.

    Parameters
    ----------
    dist : MomentumDistribution
    tau : array-like
        Delays in s.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    omega_c = compton_frequency(dist.mass_eV)
    numerator = np.zeros(tau.shape, dtype=complex)
    denominator = 0.0
    for rng, size in _sample_streams(seed, n_samples, chunk):
        v = np.sqrt(np.sum(dist.parent.sample(size, rng)**2, axis=1))
        weight = 1.0 / np.sqrt(1.0 + (v / CONSTANTS.c)**2)
        rate = _envelope_phase_rate(v, omega_c)
        for i, t in enumerate(tau):
            numerator[i] += np.sum(weight * np.exp(-1j * rate * t))
        denominator += float(np.sum(weight))
    return np.exp(-1j * omega_c * tau) * numerator / denominator


def monte_carlo_g2(dist, tau, n_samples=10_000_000, seed=0, chunk=1_000_000):
    """g2 of the thermal state from the double integral over pairs of modes.

    Each chunk draws the two members of its pairs independently, so this
    path never goes through g1.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    omega_c = compton_frequency(dist.mass_eV)
    pair_sum = np.zeros(tau.shape)
    weight_sum = 0.0
    for rng, size in _sample_streams(seed, n_samples, chunk):
        va = np.sqrt(np.sum(dist.parent.sample(size, rng)**2, axis=1))
        vb = np.sqrt(np.sum(dist.parent.sample(size, rng)**2, axis=1))
        wa = 1.0 / np.sqrt(1.0 + (va / CONSTANTS.c)**2)
        wb = 1.0 / np.sqrt(1.0 + (vb / CONSTANTS.c)**2)
        dphi = _envelope_phase_rate(va, omega_c) - _envelope_phase_rate(vb, omega_c)
        for i, t in enumerate(tau):
            pair_sum[i] += np.sum(wa * wb * np.cos(dphi * t))
        weight_sum += float(np.sum(wa * wb))
    return 1.0 + pair_sum / weight_sum


def field_G1_zero(dist, ctx):
    """Unnormalized <phi^- phi^+> of the thermal field at one point.

    Sum over modes of hbar c^2/(2 omega_k V) times the occupation
    (2 pi)^3 rho_DM f(k)/(m c^2), with the mode density V/(2 pi)^3.
    """
    C = CONSTANTS
    per_mode = C.hbar * C.c**2 / (2.0 * ctx.V)
    mode_density = ctx.V / (2 * np.pi)**3
    occupation = (2 * np.pi)**3 * ctx.rho_DM / (dist.mass_eV * C.eV_to_J)
    return per_mode * mode_density * occupation * halo_models.mean_inverse_omega(dist.parent, dist.mass_eV)


def lorentzian_filter(omega, omega_b, kappa):
    """Cavity absorption response kappa / ((omega - omega_b)^2 + kappa^2/4); integrates to 2 pi"""
    check_positive(kappa, 'kappa')
    d = np.asarray(omega, dtype=float) - omega_b
    return kappa / (d * d + 0.25 * kappa * kappa)


inequality_names = ('omega_a * delta_t >= ratio  (1/omega_a << delta_t)',
                    '1/(delta_t * delta_omega_a) >= ratio  (delta_t << 1/delta_omega_a)',
                    'delta_t * delta_omega_b >= ratio  (delta_t >> 1/delta_omega_b)')


@dataclass(frozen=True)
class CountingSetup:
    """Detector model for photon counting over an interval delta_t.

    Attributes
    ----------
    g_coupling : float
        Haloscope coupling g, m^{3/2} s^{-3/2}.
    H_omega_a : float
        Filter response at the field frequency.
    delta_t : float
        Counting interval, s.
    omega_a, delta_omega_a, delta_omega_b : float
        Field frequency, field bandwidth and detector bandwidth, rad/s.
    ratio : float
        Factor that operationalizes each "much less than".
    """
    g_coupling: float
    H_omega_a: float
    delta_t: float
    omega_a: float
    delta_omega_a: float
    delta_omega_b: float
    ratio: float = default_ratio

    def __post_init__(self):
        check_positive(self.g_coupling, 'g_coupling', allow_zero=True)
        check_positive(self.H_omega_a, 'H_omega_a', allow_zero=True)
        for name in ('delta_t', 'omega_a', 'delta_omega_a', 'delta_omega_b', 'ratio'):
            check_positive(getattr(self, name), name)

    def ratios(self):
        return (self.omega_a * self.delta_t,
                1.0 / (self.delta_t * self.delta_omega_a),
                self.delta_t * self.delta_omega_b)

    def validity_report(self):
        return {'ratio_required': self.ratio,
                'inequalities': [{'name': name, 'ratio': r, 'satisfied': bool(r >= self.ratio)}
                                 for name, r in zip(inequality_names, self.ratios())]}

    def check(self):
        report = self.validity_report()
        for item in report['inequalities']:
            if not item['satisfied']:
                raise ValidityError(
                    f"Timescale hierarchy violated: {item['name']} has ratio {item['ratio']:.3e} < {self.ratio}",
                    inequality=item['name'], report=report)
        return report


def timescale_window(omega_a, delta_omega_a, delta_omega_b, ratio=default_ratio):
    """Interval of counting times delta_t (s) meeting all three inequalities, or None if empty"""
    lo = max(ratio / omega_a, ratio / delta_omega_b)
    hi = 1.0 / (ratio * delta_omega_a)
    if lo > hi:
        return None
    return lo, hi


@dataclass(frozen=True)
class CountingProbability:
    value: float
    report: dict


def count_prob_single(G1_0, setup):
    """Probability of a click in one interval, 2 pi (g^2 / hbar c^2) H(omega_a) G1(0) delta_t.

    Raises
    ------
    ValidityError
        If the setup's timescale hierarchy fails; the message names the inequality.
    """
    check_positive(G1_0, 'G1_0', allow_zero=True)
    report = setup.check()
    C = CONSTANTS
    value = 2 * np.pi * (setup.g_coupling**2 / (C.hbar * C.c**2)) * setup.H_omega_a * G1_0 * setup.delta_t
    return CountingProbability(float(value), report)


def count_prob_joint(G2_tau, setup_a, setup_b, t_a=0.0, t_b=None):
    """Joint click probability on two identical haloscopes at t_a and t_b.

    (2 pi)^2 g_a^2 g_b^2 H_a H_b G2(t_a - t_b) delta_t^2 / (hbar^2 c^4)

    Raises
    ------
    DomainError
        If the counting intervals overlap, |t_a - t_b| < delta_t.
    UsageError
        If the two setups differ in delta_t or omega_a.
    """
    check_positive(G2_tau, 'G2_tau', allow_zero=True)
    if setup_a.delta_t != setup_b.delta_t or setup_a.omega_a != setup_b.omega_a:
        raise UsageError('Joint counting assumes identical cavities: delta_t and omega_a must match')
    if t_b is None:
        t_b = t_a + setup_a.delta_t
    if abs(t_a - t_b) < setup_a.delta_t:
        raise DomainError(f'Counting intervals overlap: |t_a - t_b| = {abs(t_a - t_b):.3e} s < delta_t')
    report_a = setup_a.check()
    setup_b.check()
    C = CONSTANTS
    value = ((2 * np.pi)**2 * setup_a.g_coupling**2 * setup_b.g_coupling**2
             * setup_a.H_omega_a * setup_b.H_omega_a * G2_tau * setup_a.delta_t**2
             / (C.hbar**2 * C.c**4))
    return CountingProbability(float(value), report_a)


nonclassical_labels = frozenset(['antibunched'])


def classify_statistics(g2_at_zero, tol=1e-3):
    """'bunched', 'coherent-like' or 'antibunched' (non-classical) from g2(0)"""
    if g2_at_zero < 0:
        raise DomainError(f'g2(0) must be non-negative, got {g2_at_zero}')
    if g2_at_zero < 1.0 - tol:
        return 'antibunched'
    if g2_at_zero > 1.0 + tol:
        return 'bunched'
    return 'coherent-like'
