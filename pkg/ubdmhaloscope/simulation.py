import logging
import numpy as np

from .base import ConfigError, UsageError
from .config import load_config, set_path, validate
from .units import (AxionParams, HaloscopeParams, FieldQuantizationContext,
                    doppler_shifted_frequency, mass_fa_convert, coupling_g, rate_gamma)
from .halo import VelocityDistribution, MomentumDistribution, n_eff
from .lindblad import LindbladParams
from .spectral import TwoCavityParams, effective_two_cavity_coupling
from . import coherence

logger = logging.getLogger(__name__)


class HaloscopeSimulation(object):
    """All physical objects of one run configuration, built lazily and shared.

    To set one up:
    sim = HaloscopeSimulation(config_file='run.json', presets=['haystac'])

    Then
    * sim.axion is an AxionParams
    * sim.halo is the velocity distribution (see halo.VelocityDistribution)
    * sim.momentum is its momentum-space view at the axion mass
    * sim.haloscope and sim.context hold the cavity and field bookkeeping
    * sim.lindblad_params and sim.two_cavity_params derive the bath and spectral models

    Parameters
    ----------
    config : dict or None
        A full or partial run configuration. Missing keys take their defaults.
    config_file : str or None
        JSON file merged over the defaults (and presets) when ``config`` is None.
    presets : list of str, optional
        Preset names, applied before the config file.
    """

    def __init__(self, config=None, config_file=None, presets=()):
        if config is None:
            config = load_config(config_file, presets=presets)
        else:
            config = validate(config)
        self._config = config
        self._reset()

    def _reset(self):
        self._axion = None
        self._halo = None
        self._momentum = None
        self._haloscope = None
        self._context = None
        self._halo_variants = {}

    @property
    def config(self):
        return self._config

    def with_value(self, dotted, value):
        """New simulation with one configuration leaf replaced"""
        return HaloscopeSimulation(config=set_path(self._config, dotted, value))

    @property
    def Q_a(self):
        return float(self._config['context']['Q_a'])

    @property
    def seed(self):
        return self._config['numerics']['seed']

    @property
    def axion(self):
        if self._axion is None:
            cfg = self._config['axion']
            mass, f_a = cfg['mass_eV'], cfg['f_a_GeV']
            if mass is None and f_a is None:
                raise ConfigError('axion: set mass_eV or f_a_GeV')
            if mass is None:
                mass = mass_fa_convert(f_a_GeV=f_a, K=cfg['mass_fa_constant'])
                f_a = None
            self._axion = AxionParams(mass_eV=mass, g_agg=cfg['g_agg'], f_a_GeV=f_a,
                                      mass_fa_constant=cfg['mass_fa_constant'],
                                      g_gamma=cfg['g_gamma'])
        return self._axion

    def halo_variant(self, variant):
        """Velocity distribution of the given variant built from the halo section"""
        if variant not in self._halo_variants:
            cfg = self._config['halo']
            common = {'v_g': cfg['v_g'], 'v_esc': cfg['v_esc']}
            if variant == 'SHM':
                dist = VelocityDistribution('SHM', v_v=cfg['v_v'], **common)
            elif variant == 'SHMpp':
                dist = VelocityDistribution('SHMpp', v_v=cfg['v_v'], eta=cfg['eta'], beta=cfg['beta'],
                                            sigma_r=cfg['sigma_r'], sigma_theta=cfg['sigma_theta'],
                                            sigma_phi=cfg['sigma_phi'], **common)
            elif variant == 'Tabulated':
                if cfg['table'] is None:
                    raise ConfigError('halo.table is required for the Tabulated variant')
                dist = VelocityDistribution('Tabulated', table=cfg['table'])
            else:
                raise ConfigError(f'Unknown halo variant {variant!r}')
            self._halo_variants[variant] = dist
        return self._halo_variants[variant]

    @property
    def halo(self):
        if self._halo is None:
            self._halo = self.halo_variant(self._config['halo']['variant'])
        return self._halo

    @property
    def momentum(self):
        if self._momentum is None:
            self._momentum = MomentumDistribution(self.halo, self.axion.mass_eV)
        return self._momentum

    @property
    def omega_phi_prime(self):
        return doppler_shifted_frequency(self.axion.mass_eV, self._config['halo']['v_g'])

    @property
    def haloscope(self):
        if self._haloscope is None:
            cfg = self._config['haloscope']
            omega_b = cfg['omega_b']
            if omega_b is None:
                omega_b = self.omega_phi_prime + cfg['detuning']
                logger.debug('cavity tuned to %.12e rad/s', omega_b)
            self._haloscope = HaloscopeParams.from_quality(omega_b=omega_b, V_prime=cfg['V_prime'],
                                                           B0=cfg['B0'], Q_c=cfg['Q_c'])
        return self._haloscope

    @property
    def context(self):
        if self._context is None:
            cfg = self._config['context']
            self._context = FieldQuantizationContext.from_GeV_per_cm3(cfg['rho_DM_GeV_cm3'], V=cfg['V'])
        return self._context

    def n_eff(self):
        return n_eff(self.halo, self.axion.mass_eV, self.context.rho_DM, self.haloscope.omega_b)

    def gamma(self):
        return rate_gamma(self.axion, self.haloscope)

    def coupling_g(self):
        return coupling_g(self.axion, self.haloscope)

    @property
    def lindblad_params(self):
        """Pedagogical bath parameters from the lindblad section"""
        cfg = self._config['lindblad']
        return LindbladParams(gamma=cfg['gamma'], n_eff=cfg['n_bar'], omega_b=self.haloscope.omega_b,
                              env_kappa=cfg['env_kappa'], env_nth=cfg['env_nth'],
                              rotating_frame=cfg['rotating_frame'])

    @property
    def two_cavity_params(self):
        cfg = self._config['psd']
        kappa_a = self.omega_phi_prime / self.Q_a
        g2c = cfg['g2c']
        if g2c is None:
            g2c = effective_two_cavity_coupling(self.gamma(), kappa_a)
        return TwoCavityParams(omega_b=self.haloscope.omega_b, kappa_c=self.haloscope.kappa_c,
                               omega_phi_prime=self.omega_phi_prime, g2c=g2c, Q_a=self.Q_a)

    def field_state(self, name):
        """Field state for a label: 'coherent', 'halo' (configured variant) or a halo variant name"""
        if name == 'coherent':
            return coherence.FieldState('coherent', self.omega_phi_prime, Q_a=self.Q_a)
        if name in ('halo', 'thermal'):
            dist = self.momentum
        elif name in ('SHM', 'SHMpp', 'Tabulated'):
            dist = MomentumDistribution(self.halo_variant(name), self.axion.mass_eV)
        else:
            raise UsageError(f'Unknown field state {name!r}')
        return coherence.FieldState('thermal', dist, Q_a=self.Q_a,
                                    tol=self._config['numerics']['quad_tol'],
                                    label=name if name not in ('halo', 'thermal') else None)

    def tau_grid(self, section='coherence'):
        """Delays (s) and reference coherence time for a curve section"""
        cfg = self._config[section]
        tau_coh = coherence.coherence_time(self.omega_phi_prime, self.Q_a)
        if cfg.get('tau_over_tau_coh') is not None:
            scaled = np.asarray(cfg['tau_over_tau_coh'], dtype=float)
        else:
            scaled = np.linspace(0.0, cfg['tau_max_over_tau_coh'], int(cfg['n_tau']))
        return scaled * tau_coh, tau_coh
