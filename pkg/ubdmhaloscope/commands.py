"""Run-level commands: each takes a HaloscopeSimulation and an output
directory, writes its files and returns a summary of scalar results."""
import logging
import multiprocessing
import os
import numpy as np
import pandas as pd

from .base import ConfigError, ResolutionError, UsageError
from .config import get_path, is_numeric_leaf, save_config, set_path
from .halo import mean_inverse_omega
from .units import k_of_omega
from .lindblad import DensityMatrix, markov_check, trajectory, analytic_moments
from .simulation import HaloscopeSimulation
from . import coherence
from . import io_utils
from . import spectral

logger = logging.getLogger(__name__)


def _initial_state(spec, N_max):
    if spec == 'vacuum':
        return DensityMatrix.vacuum(N_max)
    kind, _, arg = spec.partition(':')
    try:
        if kind == 'fock':
            return DensityMatrix.fock(int(arg), N_max)
        if kind == 'thermal':
            return DensityMatrix.thermal(float(arg), N_max)
    except ValueError:
        pass
    raise ConfigError(f"lindblad.rho0 must be 'vacuum', 'fock:N' or 'thermal:n', got {spec!r}")


def cmd_neff(sim, out_dir):
    axion, haloscope = sim.axion, sim.haloscope
    value = sim.n_eff()
    k_b = k_of_omega(haloscope.omega_b, axion.mass_eV)
    result = {'n_eff': value, 'k_b': k_b, 'omega_b': haloscope.omega_b,
              'inputs': {'mass_eV': axion.mass_eV, 'rho_DM_J_m3': sim.context.rho_DM,
                         'halo': sim.halo.parameters()}}
    path = io_utils.write_output(result, os.path.join(out_dir, 'neff.json'))
    return [path], {'n_eff': value, 'k_b': k_b}


def cmd_markov(sim, out_dir):
    axion = sim.axion
    report = markov_check(axion, sim.haloscope, sim.context, sim.Q_a, v_g=sim.config['halo']['v_g'])
    result = report.to_dict()
    result['inputs'] = {'f_a_GeV': axion.f_a, 'mass_eV': axion.mass_eV, 'g_agg_GeV': axion.g_agg_GeV,
                        'B0': sim.haloscope.B0, 'V_prime': sim.haloscope.V_prime, 'Q_a': sim.Q_a,
                        'rho_DM_J_m3': sim.context.rho_DM}
    path = io_utils.write_output(result, os.path.join(out_dir, 'markov.json'))
    return [path], {'f_a_max': report.f_a_max, 'margin': report.margin, 'valid': report.valid}


def cmd_lindblad(sim, out_dir):
    cfg = sim.config['lindblad']
    p = sim.lindblad_params
    rho0 = _initial_state(cfg['rho0'], cfg['N_max'])
    final, df = trajectory(rho0, p, cfg['T'], cfg['dt'], record_every=cfg['record_every'],
                           on_truncation=cfg['on_truncation'])
    csv_path = io_utils.write_output(df, os.path.join(out_dir, 'lindblad.csv'))
    closed_form = analytic_moments(p, cfg['T'], rho0.mean_occupation)
    sidecar = {'parameters': {'gamma': p.gamma, 'n_bar': p.n_eff, 'env_kappa': p.env_kappa,
                              'env_nth': p.env_nth, 'rotating_frame': p.rotating_frame,
                              'N_max': cfg['N_max'], 'T': cfg['T'], 'dt': cfg['dt'], 'rho0': cfg['rho0']},
               'final_mean_n': final.mean_occupation,
               'closed_form_mean_n': closed_form,
               'final_trace_error': final.trace_error,
               'final_min_eigenvalue': final.min_eigenvalue,
               'final_populations': final.populations}
    json_path = io_utils.write_output(sidecar, os.path.join(out_dir, 'lindblad.json'))
    return [csv_path, json_path], {'final_mean_n': final.mean_occupation,
                                   'closed_form_mean_n': closed_form}


def _input_spectra(sim):
    cfg = sim.config['psd']
    n_a = cfg['n_a'] if cfg['n_a'] is not None else sim.n_eff()
    if cfg['input'] == 'flat':
        return spectral.InputSpectra.flat(n_th=cfg['n_th'], n_a=n_a), n_a
    if cfg['input'] == 'lineshape':
        return spectral.InputSpectra.from_lineshape(sim.halo, sim.axion.mass_eV, n_a, n_th=cfg['n_th']), n_a
    if cfg['input'] == 'table':
        return spectral.InputSpectra.from_tables(cfg['bin_table'], cfg['ain_table'],
                                                 n_th=cfg['n_th'], n_a=n_a), n_a
    raise ConfigError(f"psd.input must be 'flat', 'lineshape' or 'table', got {cfg['input']!r}")


def _fwhm_or_none(grid, component):
    try:
        return spectral.feature_fwhm(grid, component)
    except ResolutionError as e:
        logger.info('no %s linewidth: %s', component, e)
        return None


def cmd_psd(sim, out_dir):
    cfg = sim.config['psd']
    params = sim.two_cavity_params
    inputs, n_a = _input_spectra(sim)
    omega = spectral.uniform_grid(params, linewidths=cfg['linewidths'],
                                  points_per_linewidth=cfg['points_per_linewidth'],
                                  n_points=cfg['grid_points'])
    grid = spectral.output_psd(params, inputs, omega)
    csv_path = io_utils.write_output(grid.to_dataframe(), os.path.join(out_dir, 'psd.csv'))
    sidecar = {'parameters': {'omega_b': params.omega_b, 'kappa_c': params.kappa_c,
                              'omega_phi_prime': params.omega_phi_prime, 'kappa_a': params.kappa_a,
                              'Q_a': params.Q_a, 'g2c': params.g2c,
                              'coupling_ratio': params.coupling_ratio,
                              'small_coupling': params.small_coupling},
               'inputs': inputs.description,
               'n_points': len(grid),
               'mean_occupation': grid.mean_occupation(),
               'fwhm_cavity': _fwhm_or_none(grid, 'cavity'),
               'fwhm_axion': _fwhm_or_none(grid, 'axion')}
    if cfg['input'] == 'flat':
        sidecar['axion_term_occupation'] = spectral.axion_term_occupation(params, n_a)
    json_path = io_utils.write_output(sidecar, os.path.join(out_dir, 'psd.json'))
    return [csv_path, json_path], {'mean_occupation': sidecar['mean_occupation'],
                                   'fwhm_axion': sidecar['fwhm_axion']}


def _curves(sim):
    tau, tau_coh = sim.tau_grid('coherence')
    states = [sim.field_state(name) for name in sim.config['coherence']['states']]
    return coherence.g2_curve(states, tau), tau, tau_coh


def _wide_frame(curves, tau, tau_coh, include_g2):
    columns = {'tau_s': tau, 'tau_over_tau_coh': tau / tau_coh}
    for curve in curves:
        df = curve.to_dataframe()
        keep = ['re_g1', 'im_g1', 'abs_g1'] + (['g2'] if include_g2 else [])
        for name in keep:
            columns[f'{curve.state_label}_{name}'] = df[name].to_numpy()
    return pd.DataFrame(columns)


def _monte_carlo_check(sim, curves):
    n_samples = int(sim.config['numerics']['mc_samples'])
    if n_samples <= 0:
        return None
    tau_coh = coherence.coherence_time(sim.omega_phi_prime, sim.Q_a)
    tau = np.array([0.1, 0.25, 0.5, 1.0, 2.0]) * tau_coh
    checks = {}
    for curve, name in zip(curves, sim.config['coherence']['states']):
        state = sim.field_state(name)
        if state.variant != 'thermal':
            continue
        exact = state.g1(tau)
        estimate = coherence.monte_carlo_g1(state.dist, tau, n_samples=n_samples, seed=sim.seed)
        checks[curve.state_label] = {'tau_s': tau, 'max_abs_deviation': float(np.max(np.abs(exact - estimate)))}
    return {'n_samples': n_samples, 'seed': sim.seed, 'states': checks}


def _curve_metadata(sim, curves, tau_coh):
    return {'states': {c.state_label: dict(c.parameters, g2_at_zero=float(c.g2[0]),
                                           classification=coherence.classify_statistics(float(c.g2[0])))
                       for c in curves},
            'tau_coh_s': tau_coh,
            'Q_a': sim.Q_a,
            'halo': sim.halo.parameters(),
            'quadrature_tol': sim.config['numerics']['quad_tol'],
            'seed': sim.seed}


def cmd_g1(sim, out_dir):
    curves, tau, tau_coh = _curves(sim)
    csv_path = io_utils.write_output(_wide_frame(curves, tau, tau_coh, include_g2=False),
                                  os.path.join(out_dir, 'g1.csv'))
    meta = _curve_metadata(sim, curves, tau_coh)
    json_path = io_utils.write_output(meta, os.path.join(out_dir, 'g1.json'))
    return [csv_path, json_path], {'n_tau': int(tau.size)}


def cmd_g2(sim, out_dir):
    curves, tau, tau_coh = _curves(sim)
    csv_path = io_utils.write_output(_wide_frame(curves, tau, tau_coh, include_g2=True),
                                  os.path.join(out_dir, 'g2.csv'))
    meta = _curve_metadata(sim, curves, tau_coh)
    meta['monte_carlo'] = _monte_carlo_check(sim, curves)
    json_path = io_utils.write_output(meta, os.path.join(out_dir, 'g2.json'))
    summary = {f'{c.state_label}_g2_at_zero': float(c.g2[0]) for c in curves}
    return [csv_path, json_path], summary


def counting_setup(sim, delta_t=None):
    """CountingSetup for the configured haloscope and the counting section"""
    cfg = sim.config['counting']
    omega_a = sim.omega_phi_prime
    d_omega_a = omega_a / sim.Q_a
    d_omega_b = sim.haloscope.kappa_c
    ratio = cfg['ratio']
    window = coherence.timescale_window(omega_a, d_omega_a, d_omega_b, ratio=ratio)
    if delta_t is None:
        delta_t = cfg['delta_t']
    if delta_t is None:
        if window is None:
            lo = max(ratio / omega_a, ratio / d_omega_b)
            hi = 1.0 / (ratio * d_omega_a)
        else:
            lo, hi = window
        delta_t = float(np.sqrt(lo * hi))
    H = cfg['H_omega_a']
    if H is None:
        H = float(coherence.lorentzian_filter(omega_a, sim.haloscope.omega_b, sim.haloscope.kappa_c))
    setup = coherence.CountingSetup(g_coupling=sim.coupling_g(), H_omega_a=H, delta_t=delta_t,
                                    omega_a=omega_a, delta_omega_a=d_omega_a,
                                    delta_omega_b=d_omega_b, ratio=ratio)
    return setup, window


def cmd_counting(sim, out_dir):
    cfg = sim.config['counting']
    setup, window = counting_setup(sim)
    state = sim.field_state('coherent' if cfg['state'] == 'coherent' else 'halo')
    G1_0 = coherence.field_G1_zero(sim.momentum, sim.context)
    single = coherence.count_prob_single(G1_0, setup)
    tau, tau_coh = sim.tau_grid('counting')
    tau = np.maximum(tau, setup.delta_t)
    g2_values = np.atleast_1d(coherence.g2(state, tau))
    joint = []
    for t, g2_value in zip(tau, g2_values):
        pj = coherence.count_prob_joint(G1_0**2 * g2_value, setup, setup, t_a=0.0, t_b=float(t))
        joint.append({'tau_s': float(t), 'P_joint': pj.value, 'g2': float(g2_value),
                      'ratio': pj.value / single.value**2 if single.value > 0 else None})
    result = {'state': state.label,
              'G1_0': G1_0,
              'P_single': single.value,
              'delta_t': setup.delta_t,
              'H_omega_a': setup.H_omega_a,
              'g_coupling': setup.g_coupling,
              'window': list(window) if window is not None else None,
              'validity_report': single.report,
              'joint': joint,
              'classification': coherence.classify_statistics(float(g2_values[0])),
              'mean_inverse_omega': mean_inverse_omega(sim.halo, sim.axion.mass_eV)}
    result['non_classical'] = result['classification'] in coherence.nonclassical_labels
    path = io_utils.write_output(result, os.path.join(out_dir, 'counting.json'))
    return [path], {'P_single': single.value, 'ratio_at_first_tau': joint[0]['ratio'] if joint else None}


command_mapping = {
    'neff': cmd_neff,
    'markov': cmd_markov,
    'lindblad': cmd_lindblad,
    'psd': cmd_psd,
    'g1': cmd_g1,
    'g2': cmd_g2,
    'counting': cmd_counting,
}


def run_command(command, config, out_dir, version=None):
    """Run one command, write its outputs and manifest into out_dir.

    Returns
    -------
    dict
        The command's summary values.
    """
    if command == 'sweep':
        return cmd_sweep(config, out_dir, version=version)
    if command not in command_mapping:
        raise UsageError(f'Unknown command {command!r}, choose from {sorted(command_mapping) + ["sweep"]}')
    if version is None:
        from . import __version__ as version
    os.makedirs(out_dir, exist_ok=True)
    sim = HaloscopeSimulation(config=config)
    manifest = io_utils.RunManifest(sim.config, version, sim.seed, command)
    logger.info('running %s into %s', command, out_dir)
    paths, summary = command_mapping[command](sim, out_dir)
    for path in paths:
        manifest.add_output(path, out_dir)
    manifest.write(out_dir)
    return summary


def _run_point(task):
    index, command, config, point_dir, version = task
    summary = run_command(command, config, point_dir, version=version)
    save_config(config, os.path.join(point_dir, 'config.json'), overwrite=True)
    return index, summary


def sweep_values(config):
    cfg = config['sweep']
    axis, values = cfg['axis'], cfg['values']
    if cfg['command'] not in command_mapping:
        raise UsageError(f"sweep.command must be one of {sorted(command_mapping)}, got {cfg['command']!r}")
    if not values:
        raise UsageError('sweep.values is empty')
    get_path(config, axis)
    if not is_numeric_leaf(config, axis):
        raise UsageError(f'Sweep axis {axis} is not a numeric parameter')
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise UsageError(f'Sweep value {v!r} for {axis} is not numeric')
    return axis, values


def cmd_sweep(config, out_dir, version=None):
    """Run sweep.command once per value of sweep.axis.

    Each point gets its own directory with the same files a single run
    would write; summary.csv collects one row per point in index order.
    """
    if version is None:
        from . import __version__ as version
    axis, values = sweep_values(config)
    command = config['sweep']['command']
    workers = max(int(config['numerics']['workers']), 1)
    os.makedirs(out_dir, exist_ok=True)
    tasks = []
    for i, value in enumerate(values):
        point_config = set_path(config, axis, value)
        tasks.append((i, command, point_config, os.path.join(out_dir, f'point_{i:03d}'), version))
    if workers > 1:
        with multiprocessing.Pool(processes=workers) as pool:
            results = list(pool.imap(_run_point, tasks))
    else:
        results = [_run_point(task) for task in tasks]
    rows = []
    for (index, summary), value in zip(sorted(results, key=lambda r: r[0]), values):
        row = {'point': index, axis: value}
        row.update(summary)
        rows.append(row)
    summary_df = pd.DataFrame(rows)
    manifest = io_utils.RunManifest(config, version, config['numerics']['seed'], 'sweep')
    summary_path = io_utils.write_output(summary_df, os.path.join(out_dir, 'summary.csv'))
    manifest.add_output(summary_path, out_dir)
    for i in range(len(values)):
        point_dir = os.path.join(out_dir, f'point_{i:03d}')
        for name in sorted(os.listdir(point_dir)):
            if name != io_utils.manifest_filename:
                manifest.add_output(os.path.join(point_dir, name), out_dir)
    manifest.write(out_dir)
    return {'n_points': len(values)}
