import json
import os
import numpy as np
import pandas as pd
import pytest

from ubdmhaloscope.cli import main, EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_TRUNCATION
from ubdmhaloscope.io_utils import file_checksum, read_csv


def _load(path):
    with open(path) as f:
        return json.load(f)


def _bytes(path):
    with open(path, 'rb') as f:
        return f.read()


def test_neff_run(tmp_path, write_config):
    out = str(tmp_path / 'out')
    config = write_config({'axion': {'mass_eV': 1e-22}})
    assert main(['neff', '--config', config, '--out', out]) == EXIT_OK
    result = _load(os.path.join(out, 'neff.json'))
    assert 91 <= np.log10(result['n_eff']) <= 93
    assert result['manifest'] == 'manifest.json'
    manifest = _load(os.path.join(out, 'manifest.json'))
    assert manifest['command'] == 'neff'
    assert manifest['config']['axion']['mass_eV'] == 1e-22
    assert manifest['outputs'] == {'neff.json': file_checksum(os.path.join(out, 'neff.json'))}


def test_malformed_config(tmp_path, capsys):
    path = tmp_path / 'broken.json'
    path.write_text('{"axion": {"mass_eV": }')
    assert main(['neff', '--config', str(path), '--out', str(tmp_path)]) == EXIT_CONFIG
    assert 'broken.json' in capsys.readouterr().err


def test_unknown_key(tmp_path, write_config):
    config = write_config({'haloscope': {'magnet': 9.0}})
    assert main(['neff', '--config', config, '--out', str(tmp_path)]) == EXIT_CONFIG


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(['fit'])


def test_markov_preset(tmp_path):
    assert main(['markov', '--preset', 'haystac', '--out', str(tmp_path)]) == EXIT_OK
    result = _load(tmp_path / 'markov.json')
    assert result['valid']
    assert 4e14 / 3 <= result['f_a_max'] <= 3 * 4e14
    assert result['inputs']['B0'] == 9.0


def test_lindblad_run(tmp_path, write_config):
    config = write_config({'lindblad': {'n_bar': 0.5, 'T': 2.0, 'dt': 1e-3, 'record_every': 200}})
    assert main(['lindblad', '--config', config, '--out', str(tmp_path)]) == EXIT_OK
    with open(tmp_path / 'lindblad.csv') as f:
        assert f.readline() == '# manifest: manifest.json\n'
    df = read_csv(tmp_path / 'lindblad.csv')
    assert list(df.columns) == ['t', 'mean_n', 'trace_error', 'max_level_population']
    assert df['t'].iloc[-1] == pytest.approx(2.0)
    sidecar = _load(tmp_path / 'lindblad.json')
    assert sidecar['final_mean_n'] == pytest.approx(sidecar['closed_form_mean_n'], rel=1e-6)
    assert sidecar['closed_form_mean_n'] == pytest.approx(0.5 * (1 - np.exp(-2.0)), rel=1e-12)
    assert sum(sidecar['final_populations']) == pytest.approx(1.0, abs=1e-10)


def test_lindblad_truncation_exit(tmp_path, write_config):
    config = write_config({'lindblad': {'rho0': 'fock:3', 'N_max': 3, 'T': 0.1}})
    assert main(['lindblad', '--config', config, '--out', str(tmp_path)]) == EXIT_TRUNCATION


def test_lindblad_bad_initial_state(tmp_path, write_config):
    config = write_config({'lindblad': {'rho0': 'squeezed'}})
    assert main(['lindblad', '--config', config, '--out', str(tmp_path)]) == EXIT_CONFIG


def test_counting_validity_exit(tmp_path, write_config, capsys):
    config = write_config({'counting': {'delta_t': 1e-15}})
    assert main(['counting', '--config', config, '--out', str(tmp_path)]) == EXIT_NUMERICAL
    assert 'omega_a * delta_t' in capsys.readouterr().err


def test_psd_run(tmp_path, write_config):
    config = write_config({'psd': {'linewidths': 10.0, 'n_th': 0.1}})
    assert main(['psd', '--config', config, '--out', str(tmp_path)]) == EXIT_OK
    df = read_csv(tmp_path / 'psd.csv')
    assert list(df.columns) == ['omega_rad_s', 'S_value']
    assert np.all(df['S_value'] >= 0)
    sidecar = _load(tmp_path / 'psd.json')
    assert sidecar['n_points'] == len(df)
    assert sidecar['parameters']['small_coupling']
    kappa_a = sidecar['parameters']['kappa_a']
    assert sidecar['fwhm_axion'] == pytest.approx(kappa_a, rel=1e-2)
    assert sidecar['axion_term_occupation'] > 0


def test_g2_run(tmp_path, write_config):
    config = write_config({'coherence': {'n_tau': 6, 'tau_max_over_tau_coh': 5.0}})
    assert main(['g2', '--config', config, '--out', str(tmp_path)]) == EXIT_OK
    df = read_csv(tmp_path / 'g2.csv')
    assert len(df) == 6
    assert df['SHM_g2'].iloc[0] == pytest.approx(2.0, abs=1e-6)
    assert df['SHMpp_g2'].iloc[0] == pytest.approx(2.0, abs=1e-6)
    np.testing.assert_array_equal(df['coherent_g2'], 1.0)
    np.testing.assert_allclose(df['tau_over_tau_coh'], np.linspace(0, 5, 6), rtol=1e-12)
    meta = _load(tmp_path / 'g2.json')
    assert meta['states']['SHM']['classification'] == 'bunched'
    assert meta['states']['coherent']['classification'] == 'coherent-like'
    assert meta['monte_carlo'] is None


def test_counting_run(tmp_path):
    assert main(['counting', '--out', str(tmp_path)]) == EXIT_OK
    result = _load(tmp_path / 'counting.json')
    assert result['P_single'] > 0
    assert all(item['satisfied'] for item in result['validity_report']['inequalities'])
    for item in result['joint']:
        assert item['ratio'] == pytest.approx(item['g2'], rel=1e-12)
        assert item['tau_s'] >= result['delta_t']
    assert result['joint'][0]['g2'] == pytest.approx(2.0, abs=5e-2)
    assert result['classification'] == 'bunched'
    assert not result['non_classical']


def test_counting_coherent(tmp_path, write_config):
    config = write_config({'counting': {'state': 'coherent', 'tau_over_tau_coh': [0.0, 1.0]}})
    assert main(['counting', '--config', config, '--out', str(tmp_path)]) == EXIT_OK
    result = _load(tmp_path / 'counting.json')
    assert [item['ratio'] for item in result['joint']] == pytest.approx([1.0, 1.0], rel=1e-12)
    assert result['classification'] == 'coherent-like'


def _sweep(out, *extra):
    return main(['sweep', '--sweep-command', 'neff', '--axis', 'axion.mass_eV',
                 '--values', '1e-22', '1e-10', '1', '--out', out] + list(extra))


def test_sweep_neff(tmp_path):
    out = str(tmp_path / 'sweep')
    assert _sweep(out) == EXIT_OK
    summary = read_csv(os.path.join(out, 'summary.csv'))
    assert list(summary['point']) == [0, 1, 2]
    assert list(summary['axion.mass_eV']) == [1e-22, 1e-10, 1.0]
    assert np.all(np.diff(summary['n_eff']) < 0)
    manifest = _load(os.path.join(out, 'manifest.json'))
    assert 'summary.csv' in manifest['outputs']
    assert os.path.join('point_001', 'neff.json') in manifest['outputs']

    single = str(tmp_path / 'single')
    assert main(['neff', '--out', single, '--config', _config_with_mass(tmp_path, 1e-10)]) == EXIT_OK
    assert _bytes(os.path.join(out, 'point_001', 'neff.json')) == _bytes(os.path.join(single, 'neff.json'))
    point_config = _load(os.path.join(out, 'point_001', 'config.json'))
    assert point_config['axion']['mass_eV'] == 1e-10


def _config_with_mass(tmp_path, mass):
    path = tmp_path / 'mass.json'
    path.write_text(json.dumps({'axion': {'mass_eV': mass}}))
    return str(path)


def test_sweep_workers_agree(tmp_path):
    serial, parallel = str(tmp_path / 'serial'), str(tmp_path / 'parallel')
    assert _sweep(serial, '--workers', '1') == EXIT_OK
    assert _sweep(parallel, '--workers', '2') == EXIT_OK
    assert _bytes(os.path.join(serial, 'summary.csv')) == _bytes(os.path.join(parallel, 'summary.csv'))
    serial_outputs = _load(os.path.join(serial, 'manifest.json'))['outputs']
    parallel_outputs = _load(os.path.join(parallel, 'manifest.json'))['outputs']
    assert sorted(serial_outputs) == sorted(parallel_outputs)
    assert os.path.join('point_002', 'neff.json') in serial_outputs
    for name, checksum in serial_outputs.items():
        if name.endswith('config.json'):
            # the echoed config carries the worker count and nothing else differs
            a, b = _load(os.path.join(serial, name)), _load(os.path.join(parallel, name))
            assert (a['numerics']['workers'], b['numerics']['workers']) == (1, 2)
            b['numerics']['workers'] = 1
            assert a == b
        else:
            assert checksum == parallel_outputs[name]


def test_sweep_rejects_string_axis(tmp_path):
    code = main(['sweep', '--axis', 'halo.variant', '--values', '1', '--out', str(tmp_path)])
    assert code == EXIT_CONFIG


def test_sweep_rejects_empty_values(tmp_path):
    assert main(['sweep', '--values', '--out', str(tmp_path)]) == EXIT_CONFIG


def test_sweep_rejects_non_numeric_value():
    with pytest.raises(SystemExit):
        main(['sweep', '--values', 'heavy'])


def test_g1_deterministic(tmp_path, write_config):
    config = write_config({'coherence': {'states': ['SHM', 'coherent'], 'n_tau': 5}})
    first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
    assert main(['g1', '--config', config, '--out', first]) == EXIT_OK
    assert main(['g1', '--config', config, '--out', second]) == EXIT_OK
    for name in ('g1.csv', 'g1.json'):
        assert _bytes(os.path.join(first, name)) == _bytes(os.path.join(second, name))
    df = pd.read_csv(os.path.join(first, 'g1.csv'), comment='#')
    assert list(df.columns) == ['tau_s', 'tau_over_tau_coh', 'SHM_re_g1', 'SHM_im_g1', 'SHM_abs_g1',
                                'coherent_re_g1', 'coherent_im_g1', 'coherent_abs_g1']


_small_runs = {
    'neff': {},
    'markov': {},
    'lindblad': {'lindblad': {'n_bar': 0.5, 'T': 0.5, 'dt': 1e-3, 'record_every': 50}},
    'psd': {'psd': {'linewidths': 10.0, 'n_th': 0.1}},
    'g2': {'coherence': {'n_tau': 6}},
    'counting': {},
}


@pytest.mark.parametrize('command', sorted(_small_runs))
def test_outputs_identical_across_runs(tmp_path, write_config, command):
    config = write_config(_small_runs[command])
    first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
    assert main([command, '--config', config, '--out', first, '--workers', '1']) == EXIT_OK
    assert main([command, '--config', config, '--out', second, '--workers', '2']) == EXIT_OK
    names = sorted(os.listdir(first))
    assert names == sorted(os.listdir(second))
    outputs = [name for name in names if name != 'manifest.json']
    assert outputs
    for name in outputs:
        assert _bytes(os.path.join(first, name)) == _bytes(os.path.join(second, name))
    assert _load(os.path.join(first, 'manifest.json'))['outputs'] == _load(os.path.join(second, 'manifest.json'))['outputs']
