"""Galactic halo velocity distributions and the quantities built on them.

Velocity densities are in s^3/m^3, speed marginals in s/m. Vectors are given
in a lab-aligned frame whose axes are (radial, polar, azimuthal) for the
anisotropic Sausage component; the default lab velocity points along the
third (azimuthal) axis.
"""
from functools import lru_cache
import logging
import numpy as np
from scipy import integrate, interpolate

from .base import (ConfigError, DomainError, QuadratureError, UsageError,
                   check_positive)
from .constants import CONSTANTS
from .units import k_of_omega, compton_frequency
from . import io_utils

logger = logging.getLogger(__name__)

default_v_g = (0.0, 0.0, 232.0e3)
default_v_esc = 544.0e3
default_v_v = 1e-3 * CONSTANTS.c
default_eta = 0.2
default_beta = 0.9

# Gaussian tails are dropped beyond this many dispersions from |v_g|
_tail_sigmas = 12.0
_panel_order = 20
_n_mu = 64
_n_phi = 128


@lru_cache(maxsize=8)
def angular_rule(n_mu=_n_mu, n_phi=_n_phi):
    """Product rule over the unit sphere.

    Gauss-Legendre in cos(theta) times the periodic trapezoid in phi.

    Returns
    -------
    directions : np.array
        (n_mu*n_phi, 3) unit vectors
    weights : np.array
        Weights summing to 4 pi
    """
    mu, w_mu = np.polynomial.legendre.leggauss(n_mu)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(1.0 - mu**2)
    dirs = np.stack([
        np.outer(sin_theta, np.cos(phi)).ravel(),
        np.outer(sin_theta, np.sin(phi)).ravel(),
        np.repeat(mu, n_phi),
    ], axis=1)
    weights = np.repeat(w_mu, n_phi) * (2 * np.pi / n_phi)
    dirs.setflags(write=False)
    weights.setflags(write=False)
    return dirs, weights


@lru_cache(maxsize=64)
def composite_gauss_legendre(lo, hi, n_panels, order=_panel_order):
    """Nodes and weights of an n_panels x order composite Gauss-Legendre rule on [lo, hi]"""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _as_vector(v_g):
    v_g = np.asarray(v_g, dtype=float)
    if v_g.ndim == 0:
        v_g = np.array([0.0, 0.0, float(v_g)])
    if v_g.shape != (3,):
        raise UsageError(f'v_g must be a 3-vector, got shape {v_g.shape}')
    return v_g


def _speed(v):
    return np.sqrt(np.sum(np.square(v), axis=-1))


class VelocityDistributionBase(object):
    """Common machinery for normalized lab-frame velocity distributions.

    Subclasses provide ``eval_f_v`` and ``support``; ``speed_marginal`` falls
    back to the angular product rule when no closed form exists.
    """
    variant = None

    def __init__(self, v_esc):
        check_positive(v_esc, 'v_esc')
        self._v_esc = float(v_esc)
        self._node_cache = {}

    @property
    def v_esc(self):
        return self._v_esc

    def eval_f_v(self, v):
        raise NotImplementedError

    def support(self):
        """Speed interval (m/s) outside which the marginal is negligible or zero"""
        return 0.0, self._v_esc

    def angular_marginal(self, speeds, chunk=256):
        """F(v) = v^2 int dOmega f(v) from the angular product rule"""
        speeds = np.atleast_1d(np.asarray(speeds, dtype=float))
        dirs, weights = angular_rule()
        out = np.empty(speeds.shape)
        flat = speeds.ravel()
        res = out.reshape(-1)
        for start in range(0, flat.size, chunk):
            s = flat[start:start + chunk]
            vecs = s[:, None, None] * dirs[None, :, :]
            res[start:start + chunk] = s**2 * (self.eval_f_v(vecs) @ weights)
        return out

    def speed_marginal(self, v):
        v = np.asarray(v, dtype=float)
        out = self.angular_marginal(v).reshape(v.shape)
        return out if out.ndim else float(out)

    def speed_nodes(self, n_panels):
        """Composite-rule speed nodes and weights already multiplied by F"""
        if n_panels not in self._node_cache:
            lo, hi = self.support()
            nodes, weights = composite_gauss_legendre(lo, hi, n_panels)
            wF = weights * np.asarray(self.speed_marginal(nodes))
            self._node_cache[n_panels] = (nodes, wF)
        return self._node_cache[n_panels]

    def sample(self, n, rng):
        raise NotImplementedError

    def parameters(self):
        return {'variant': self.variant, 'v_esc': self._v_esc}


class StandardHaloModel(VelocityDistributionBase):
    """Boosted Maxwell-Boltzmann halo with a hard escape-speed cutoff.

    f(v) = N exp(-|v - v_g|^2 / 2 v_v^2) for |v| <= v_esc, zero beyond.

    Parameters
    ----------
    v_g : array-like, optional
        Lab velocity relative to the halo, m/s. By default 232 km/s along the third axis.
    v_esc : float, optional
        Escape speed in m/s, applied to |v| in the lab frame. By default 544 km/s.
    v_v : float, optional
        Virialization dispersion in m/s. By default 1e-3 c.
    """
    variant = 'SHM'

    def __init__(self, v_g=default_v_g, v_esc=default_v_esc, v_v=default_v_v):
        super(StandardHaloModel, self).__init__(v_esc)
        check_positive(v_v, 'v_v')
        self._v_g = _as_vector(v_g)
        self._v_v = float(v_v)
        self._norm = 1.0
        lo, hi = self.support()
        total, err = integrate.quad(self._speed_unnormalized, lo, hi,
                                    epsabs=0.0, epsrel=1e-13, limit=200)
        self._norm = 1.0 / total
        logger.debug('SHM normalization %.16e (quad error %.2e)', self._norm, err)

    @property
    def v_g(self):
        return self._v_g.copy()

    @property
    def v_v(self):
        return self._v_v

    @property
    def norm(self):
        return self._norm

    def support(self):
        vg = np.linalg.norm(self._v_g)
        lo = max(0.0, vg - _tail_sigmas * self._v_v)
        hi = min(self._v_esc, vg + _tail_sigmas * self._v_v)
        return lo, hi

    def eval_f_v(self, v):
        v = np.asarray(v, dtype=float)
        d2 = np.sum(np.square(v - self._v_g), axis=-1)
        val = self._norm * np.exp(-0.5 * d2 / self._v_v**2)
        return np.where(_speed(v) <= self._v_esc, val, 0.0)

    def _speed_unnormalized(self, v):
        v = np.asarray(v, dtype=float)
        s2 = self._v_v**2
        vg = np.linalg.norm(self._v_g)
        if vg == 0.0:
            core = 4 * np.pi * v**2 * np.exp(-0.5 * v**2 / s2)
        else:
            # difference of the two Gaussians, written to avoid cancellation at small v
            core = -2 * np.pi * s2 * (v / vg) * np.exp(-0.5 * (v - vg)**2 / s2) * np.expm1(-2 * v * vg / s2)
        return np.where((v >= 0) & (v <= self._v_esc), core, 0.0)

    def speed_marginal(self, v):
        out = self._norm * self._speed_unnormalized(v)
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        out = np.empty((0, 3))
        while out.shape[0] < n:
            draw = self._v_g + self._v_v * rng.standard_normal((max(2 * (n - out.shape[0]), 1024), 3))
            draw = draw[_speed(draw) <= self._v_esc]
            out = np.concatenate([out, draw])
        return out[:n]

    def parameters(self):
        return {'variant': self.variant, 'v_g': self._v_g.tolist(),
                'v_esc': self._v_esc, 'v_v': self._v_v}


class SausageComponent(VelocityDistributionBase):
    """Anisotropic Gaussian with diagonal dispersions (radial, polar, azimuthal)"""
    variant = 'Sausage'

    def __init__(self, v_g, v_esc, sigmas):
        super(SausageComponent, self).__init__(v_esc)
        self._v_g = _as_vector(v_g)
        self._sigmas = np.asarray(sigmas, dtype=float)
        check_positive(self._sigmas, 'Sausage dispersions')
        self._norm = 1.0
        self._norm = 1.0 / integrate_speed(self, lambda v: np.ones_like(v), tol=1e-13, relative=True,
                                           weights_from_marginal=False)
        self._node_cache = {}
        logger.debug('Sausage normalization %.16e', self._norm)

    def support(self):
        vg = np.linalg.norm(self._v_g)
        smax = float(np.max(self._sigmas))
        return max(0.0, vg - _tail_sigmas * smax), min(self._v_esc, vg + _tail_sigmas * smax)

    def eval_f_v(self, v):
        v = np.asarray(v, dtype=float)
        u = (v - self._v_g) / self._sigmas
        val = self._norm * np.exp(-0.5 * np.sum(u * u, axis=-1))
        return np.where(_speed(v) <= self._v_esc, val, 0.0)

    def sample(self, n, rng):
        out = np.empty((0, 3))
        while out.shape[0] < n:
            draw = self._v_g + self._sigmas * rng.standard_normal((max(2 * (n - out.shape[0]), 1024), 3))
            draw = draw[_speed(draw) <= self._v_esc]
            out = np.concatenate([out, draw])
        return out[:n]


class SHMPlusPlus(VelocityDistributionBase):
    """Round SHM plus a radially anisotropic Sausage component.

    f = (1 - eta) f_SHM + eta f_Sausage, each component normalized on its own,
    so eta = 0 gives back the SHM exactly.

    Parameters
    ----------
    v_g, v_esc, v_v : see StandardHaloModel
    eta : float, optional
        Sausage fraction in [0, 1]. By default 0.2.
    beta : float, optional
        Sausage anisotropy in [0, 1). By default 0.9.
    sigma_r, sigma_theta, sigma_phi : float or None, optional
        Sausage dispersions in m/s. Missing values follow from beta with
        sigma_r^2 = 3 v_v^2/(3 - 2 beta), sigma_theta^2 = sigma_phi^2 = 3 v_v^2 (1 - beta)/(3 - 2 beta).
    """
    variant = 'SHMpp'

    def __init__(self, v_g=default_v_g, v_esc=default_v_esc, v_v=default_v_v,
                 eta=default_eta, beta=default_beta,
                 sigma_r=None, sigma_theta=None, sigma_phi=None):
        super(SHMPlusPlus, self).__init__(v_esc)
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f'eta must lie in [0, 1], got {eta}')
        if not 0.0 <= beta < 1.0:
            raise DomainError(f'beta must lie in [0, 1), got {beta}')
        self._eta = float(eta)
        self._beta = float(beta)
        check_positive(v_v, 'v_v')
        denom = 3.0 - 2.0 * beta
        if sigma_r is None:
            sigma_r = np.sqrt(3.0 * v_v**2 / denom)
        if sigma_theta is None:
            sigma_theta = np.sqrt(3.0 * v_v**2 * (1.0 - beta) / denom)
        if sigma_phi is None:
            sigma_phi = np.sqrt(3.0 * v_v**2 * (1.0 - beta) / denom)
        self._round = StandardHaloModel(v_g=v_g, v_esc=v_esc, v_v=v_v)
        self._sausage = None
        if self._eta > 0:
            self._sausage = SausageComponent(v_g, v_esc, (sigma_r, sigma_theta, sigma_phi))
        self._sigmas = (float(sigma_r), float(sigma_theta), float(sigma_phi))

    @property
    def eta(self):
        return self._eta

    @property
    def beta(self):
        return self._beta

    @property
    def round_component(self):
        return self._round

    def support(self):
        lo, hi = self._round.support()
        if self._sausage is not None:
            slo, shi = self._sausage.support()
            lo, hi = min(lo, slo), max(hi, shi)
        return lo, hi

    def eval_f_v(self, v):
        out = (1.0 - self._eta) * self._round.eval_f_v(v)
        if self._sausage is not None:
            out = out + self._eta * self._sausage.eval_f_v(v)
        return out

    def speed_marginal(self, v):
        out = (1.0 - self._eta) * np.asarray(self._round.speed_marginal(v))
        if self._sausage is not None:
            out = out + self._eta * np.asarray(self._sausage.speed_marginal(v))
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        pick = rng.random(n) < self._eta
        out = np.empty((n, 3))
        n_s = int(np.count_nonzero(pick))
        out[~pick] = self._round.sample(n - n_s, rng)
        if n_s:
            out[pick] = self._sausage.sample(n_s, rng)
        return out

    def parameters(self):
        params = self._round.parameters()
        params.update({'variant': self.variant, 'eta': self._eta, 'beta': self._beta,
                       'sigma_r': self._sigmas[0], 'sigma_theta': self._sigmas[1],
                       'sigma_phi': self._sigmas[2]})
        return params


class TabulatedDistribution(VelocityDistributionBase):
    """Isotropic distribution from a sampled speed density.

    The density is interpolated with a monotone cubic (PCHIP) and extended by
    zero outside the table; the last tabulated speed is the escape speed.

    Parameters
    ----------
    speeds : array-like
        Strictly increasing, non-negative speeds in m/s.
    density : array-like
        Non-negative, unnormalized speed density at each speed.
    """
    variant = 'Tabulated'

    def __init__(self, speeds, density, source=None):
        speeds = np.asarray(speeds, dtype=float)
        density = np.asarray(density, dtype=float)
        validate_speed_table(speeds, density)
        super(TabulatedDistribution, self).__init__(speeds[-1])
        self._speeds = speeds
        self._interp = interpolate.PchipInterpolator(speeds, density, extrapolate=False)
        total = float(self._interp.integrate(speeds[0], speeds[-1]))
        if total <= 0:
            raise ConfigError('Tabulated speed density integrates to zero')
        self._norm = 1.0 / total
        self._source = source

    @classmethod
    def from_file(cls, path):
        speeds, density = load_speed_table(path)
        return cls(speeds, density, source=str(path))

    def support(self):
        return float(self._speeds[0]), float(self._speeds[-1])

    def speed_marginal(self, v):
        v = np.asarray(v, dtype=float)
        val = self._interp(v)
        out = np.where(np.isnan(val), 0.0, np.clip(val, 0.0, None) * self._norm)
        return out if out.ndim else float(out)

    def eval_f_v(self, v):
        s = _speed(np.asarray(v, dtype=float))
        F = np.asarray(self.speed_marginal(s))
        with np.errstate(divide='ignore', invalid='ignore'):
            out = F / (4 * np.pi * s**2)
        return np.where(s > 0, out, 0.0)

    def sample(self, n, rng):
        lo, hi = self.support()
        grid = np.linspace(lo, hi, 20001)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (self.speed_marginal(grid[1:]) + self.speed_marginal(grid[:-1])) * np.diff(grid))])
        cdf /= cdf[-1]
        speeds = np.interp(rng.random(n), cdf, grid)
        mu = rng.uniform(-1.0, 1.0, n)
        phi = rng.uniform(0.0, 2 * np.pi, n)
        st = np.sqrt(1.0 - mu**2)
        return speeds[:, None] * np.stack([st * np.cos(phi), st * np.sin(phi), mu], axis=1)

    def parameters(self):
        return {'variant': self.variant, 'v_esc': self._v_esc, 'table': self._source,
                'n_points': int(self._speeds.size)}


distribution_mapping = {
    'SHM': StandardHaloModel,
    'SHMpp': SHMPlusPlus,
    'Tabulated': TabulatedDistribution,
}


def VelocityDistribution(variant='SHM', **kwargs):
    """Build a halo velocity distribution.

    Parameters
    ----------
    variant : str, optional
        One of 'SHM', 'SHMpp' or 'Tabulated'. By default 'SHM'.
    **kwargs
        Passed to the distribution class. A Tabulated distribution takes either
        ``table`` (a file path) or ``speeds`` and ``density``.
    """
    if variant not in distribution_mapping:
        raise ConfigError(f'Unknown halo variant {variant!r}, choose from {sorted(distribution_mapping)}')
    if variant == 'Tabulated' and 'table' in kwargs:
        return TabulatedDistribution.from_file(kwargs['table'])
    return distribution_mapping[variant](**kwargs)


def validate_speed_table(speeds, density):
    if speeds.ndim != 1 or speeds.shape != density.shape or speeds.size < 2:
        raise ConfigError('Speed table needs two columns of equal length with at least two rows')
    if np.any(speeds < 0):
        raise ConfigError('Tabulated speeds must be non-negative')
    if np.any(np.diff(speeds) <= 0):
        raise ConfigError('Tabulated speeds must be strictly increasing')
    if np.any(density < 0) or not np.all(np.isfinite(density)):
        raise ConfigError('Tabulated speed densities must be finite and non-negative')


def load_speed_table(path):
    speeds, density = io_utils.read_two_column(path)
    validate_speed_table(speeds, density)
    return speeds, density


def integrate_speed(dist, func, tol=1e-9, relative=False, start_panels=16, max_panels=2048,
                    weights_from_marginal=True):
    """Integrate func(v) F(v) dv over the distribution's support.

    The composite Gauss-Legendre rule is refined by doubling the panel count
    until two successive estimates agree within ``tol``.

    Parameters
    ----------
    dist : VelocityDistributionBase
    func : callable
        Maps an array of speeds (n,) to (n,) or (n, m) values.
    tol : float, optional
        Absolute tolerance (relative when ``relative`` is True). By default 1e-9.
    weights_from_marginal : bool, optional
        If False, integrates against the distribution's current (possibly
        unnormalized) marginal without using the node cache.

    Raises
    ------
    QuadratureError
        If the estimates fail to agree by ``max_panels``.
    """
    previous = None
    n_panels = start_panels
    history = []
    while n_panels <= max_panels:
        if weights_from_marginal:
            nodes, wF = dist.speed_nodes(n_panels)
        else:
            lo, hi = dist.support()
            nodes, weights = composite_gauss_legendre(lo, hi, n_panels)
            wF = weights * np.asarray(dist.speed_marginal(nodes))
        vals = np.asarray(func(nodes))
        est = np.tensordot(wF, vals, axes=(0, 0))
        if previous is not None:
            diff = float(np.max(np.abs(est - previous)))
            scale = float(np.max(np.abs(est))) if relative else 1.0
            history.append((n_panels, diff))
            if diff <= tol * scale:
                logger.debug('speed quadrature converged with %d panels (change %.2e)', n_panels, diff)
                return est
        previous = est
        n_panels *= 2
    raise QuadratureError(
        f'Speed quadrature did not reach tolerance {tol:.1e} by {max_panels} panels; '
        f'successive changes: {history}')


class MomentumDistribution(object):
    """Momentum-space view f(k) of a velocity distribution, k = m v / hbar.

    Parameters
    ----------
    parent : VelocityDistributionBase
    mass_eV : float
    """

    def __init__(self, parent, mass_eV):
        check_positive(mass_eV, 'mass_eV')
        self._parent = parent
        self._mass_eV = float(mass_eV)
        self._mass_kg = mass_eV * CONSTANTS.eV_to_J / CONSTANTS.c**2

    @property
    def parent(self):
        return self._parent

    @property
    def mass_eV(self):
        return self._mass_eV

    @property
    def velocity_per_wavenumber(self):
        """hbar / m in (m/s) per (rad/m)"""
        return CONSTANTS.hbar / self._mass_kg

    def speed_of(self, k):
        return self.velocity_per_wavenumber * np.asarray(k, dtype=float)

    def eval_f_k(self, k_vec):
        """3D density f(k) in m^3"""
        j = self.velocity_per_wavenumber
        return j**3 * self._parent.eval_f_v(j * np.asarray(k_vec, dtype=float))

    def radial_density(self, k):
        """Density over |k|, F_v(hbar k / m) hbar/m, in m"""
        k = np.asarray(k, dtype=float)
        if np.any(k < 0):
            raise DomainError('Wavenumber must be non-negative')
        j = self.velocity_per_wavenumber
        out = j * np.asarray(self._parent.speed_marginal(j * k))
        return out if out.ndim else float(out)

    def solid_angle_integral(self, k):
        """int dOmega f(k, theta, phi) at |k| = k, in m^3"""
        j = self.velocity_per_wavenumber
        v = j * float(k)
        if v == 0.0:
            return 4 * np.pi * j**3 * float(self._parent.eval_f_v(np.zeros(3)))
        return j**3 * float(self._parent.speed_marginal(v)) / v**2

    def mode_occupation(self, k_vec, rho_DM):
        """Mean occupation (2 pi)^3 rho_DM f(k) / (m c^2) of the mode k"""
        return (2 * np.pi)**3 * rho_DM * self.eval_f_k(k_vec) / (self._mass_eV * CONSTANTS.eV_to_J)

    def peak_wavenumber(self, n_grid=20001):
        """Wavenumber maximizing the radial density, from a dense grid"""
        lo, hi = self._parent.support()
        v = np.linspace(lo, hi, n_grid)
        F = np.asarray(self._parent.speed_marginal(v))
        return float(v[np.argmax(F)] / self.velocity_per_wavenumber)


def momentum_density(dist, mass_eV, k):
    """Radial momentum density f(|k|) = F_v(hbar k / m) hbar / m"""
    return MomentumDistribution(dist, mass_eV).radial_density(k)


def n_eff(dist, mass_eV, rho_DM, omega_b):
    """Effective bath occupation seen by a cavity at omega_b.

    n_eff = (2 pi)^2 rho_DM / (2 m c^2) int dOmega f(k_b, theta, phi)

    Parameters
    ----------
    dist : VelocityDistributionBase
    mass_eV : float
    rho_DM : float
        Dark-matter energy density, J/m^3
    omega_b : float
        Cavity frequency in rad/s, at or above the mass gap.

    Returns
    -------
    float
        n_eff, dimensionless
    """
    k_b = k_of_omega(omega_b, mass_eV)
    angular = MomentumDistribution(dist, mass_eV).solid_angle_integral(k_b)
    return (2 * np.pi)**2 * rho_DM / (2 * mass_eV * CONSTANTS.eV_to_J) * angular


def mean_inverse_omega(dist, mass_eV, tol=1e-13):
    """<1/omega_k>_f in s/rad.

    Integrated as omega_c^-1 <omega_c/omega_k> over the speed marginal,
    with omega_k / omega_c = sqrt(1 + v^2/c^2).
    """
    omega_c = compton_frequency(mass_eV)
    c = CONSTANTS.c
    ratio = integrate_speed(dist, lambda v: 1.0 / np.sqrt(1.0 + (v / c)**2), tol=tol)
    return float(ratio) / omega_c


def frequency_lineshape(dist, mass_eV, omega):
    """Detector-frame frequency density lambda(omega) = F(v(omega)) |dv/domega|.

    Returns
    -------
    np.array
        Density in 1/(rad/s); zero below the Compton frequency.
    """
    omega = np.asarray(omega, dtype=float)
    omega_c = compton_frequency(mass_eV)
    c = CONSTANTS.c
    r = omega / omega_c
    above = r > 1.0
    v = np.zeros_like(omega)
    v[above] = c * np.sqrt((r[above] - 1.0) * (r[above] + 1.0))
    dv_domega = np.zeros_like(omega)
    dv_domega[above] = c**2 * omega[above] / (omega_c**2 * v[above])
    F = np.asarray(dist.speed_marginal(v))
    return np.where(above, F * dv_domega, 0.0)


def sample_velocities(dist, n, seed=None, rng=None):
    """Draw n lab-frame velocities (n, 3) from the distribution"""
    if rng is None:
        rng = np.random.default_rng(seed)
    return dist.sample(int(n), rng)


def _spawn_generators(seed, n_samples, chunk):
    n_chunks = int(np.ceil(n_samples / chunk))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk, n_samples - i * chunk) for i in range(n_chunks)]
    return [(np.random.default_rng(s), size) for s, size in zip(children, sizes)]


def monte_carlo_n_eff(dist, mass_eV, rho_DM, omega_b, n_samples=10_000_000, seed=0, chunk=1_000_000):
    """n_eff with the solid-angle integral done by uniform-direction Monte Carlo.

    Chunks draw from independent streams spawned from ``seed``, so the result
    does not depend on how the chunks are scheduled.
    """
    mom = MomentumDistribution(dist, mass_eV)
    k_b = k_of_omega(omega_b, mass_eV)
    v_b = float(mom.speed_of(k_b))
    total = 0.0
    for rng, size in _spawn_generators(seed, n_samples, chunk):
        mu = rng.uniform(-1.0, 1.0, size)
        phi = rng.uniform(0.0, 2 * np.pi, size)
        st = np.sqrt(1.0 - mu**2)
        vecs = v_b * np.stack([st * np.cos(phi), st * np.sin(phi), mu], axis=1)
        total += float(np.sum(dist.eval_f_v(vecs)))
    angular = 4 * np.pi * total / n_samples * mom.velocity_per_wavenumber**3
    return (2 * np.pi)**2 * rho_DM / (2 * mass_eV * CONSTANTS.eV_to_J) * angular
