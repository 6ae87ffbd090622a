import copy

from .constants import CONSTANTS

# A None default accepts any value type; other leaves are type-checked
# against their default.

axion_defaults = {
    'mass_eV': 1e-5,
    'f_a_GeV': None,
    'g_agg': None,
    'g_gamma': 0.97,
    'mass_fa_constant': 5.7e6,
}

halo_defaults = {
    'variant': 'SHM',
    'v_g': [0.0, 0.0, 232.0e3],
    'v_esc': 544.0e3,
    'v_v': 1e-3 * CONSTANTS.c,
    'eta': 0.2,
    'beta': 0.9,
    'sigma_r': None,
    'sigma_theta': None,
    'sigma_phi': None,
    'table': None,
}

haloscope_defaults = {
    'omega_b': None,  # None tunes the cavity to the Doppler-shifted axion frequency
    'detuning': 0.0,
    'V_prime': 0.136,
    'B0': 7.6,
    'Q_c': 1e4,
}

context_defaults = {
    'V': 1e63,
    'rho_DM_GeV_cm3': 0.3,
    'Q_a': 1e6,
}

numerics_defaults = {
    'seed': 0,
    'quad_tol': 1e-9,
    'workers': 1,
    'mc_samples': 0,
}

lindblad_defaults = {
    'gamma': 1.0,
    'n_bar': 0.5,
    'N_max': 30,
    'T': 10.0,
    'dt': 1e-3,
    'rho0': 'vacuum',
    'env_kappa': 0.0,
    'env_nth': 0.0,
    'rotating_frame': True,
    'record_every': 100,
    'on_truncation': 'error',
}

psd_defaults = {
    'input': 'flat',
    'n_th': 0.0,
    'n_a': None,
    'g2c': None,
    'bin_table': None,
    'ain_table': None,
    'grid_points': None,
    'linewidths': 40.0,
    'points_per_linewidth': 16.0,
}

coherence_defaults = {
    'states': ['SHM', 'SHMpp', 'coherent'],
    'tau_max_over_tau_coh': 10.0,
    'n_tau': 201,
    'tau_over_tau_coh': None,
}

counting_defaults = {
    'state': 'thermal',
    'ratio': 5.0,
    'delta_t': None,
    'H_omega_a': None,
    'tau_over_tau_coh': [0.0, 0.1, 0.5, 1.0, 2.0, 5.0],
}

sweep_defaults = {
    'command': 'neff',
    'axis': 'axion.mass_eV',
    'values': [],
}

default_run_config = {
    'axion': axion_defaults,
    'halo': halo_defaults,
    'haloscope': haloscope_defaults,
    'context': context_defaults,
    'numerics': numerics_defaults,
    'lindblad': lindblad_defaults,
    'psd': psd_defaults,
    'coherence': coherence_defaults,
    'counting': counting_defaults,
    'sweep': sweep_defaults,
}


def default_config():
    return copy.deepcopy(default_run_config)
