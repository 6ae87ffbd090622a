import numpy as np
import pytest

from ubdmhaloscope.base import ConfigError, DomainError, TruncationError, TruncationWarning, UsageError
from ubdmhaloscope.lindblad import (DensityMatrix, LindbladParams, bose_einstein_populations, lindblad_rhs,
                                    evolve, trajectory, steady_state, analytic_moments, markov_check,
                                    markov_margin)
from ubdmhaloscope.simulation import HaloscopeSimulation

N_max = 30


def _random_state(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho))


def test_density_matrix_constructors():
    rho = DensityMatrix.fock(2, 5)
    assert rho.dim == 6
    assert rho.mean_occupation == 2.0
    assert rho.check()
    with pytest.raises(DomainError):
        DensityMatrix.fock(6, 5)
    with pytest.raises(UsageError):
        DensityMatrix(np.ones((2, 3)))


def test_density_matrix_entries_read_only():
    rho = DensityMatrix.vacuum(3)
    with pytest.raises(ValueError):
        rho.entries[0, 0] = 0.5


def test_density_matrix_check_flags_bad_trace():
    with pytest.raises(DomainError):
        DensityMatrix(np.diag([0.5, 0.2])).check()


@pytest.mark.parametrize('n_bar', [0.0, 0.3, 1.0, 3.0])
def test_thermal_state_annihilates_generator(n_bar):
    p = LindbladParams(gamma=1.0, n_eff=n_bar)
    rhs = lindblad_rhs(DensityMatrix.thermal(n_bar, N_max), p)
    assert np.max(np.abs(rhs)) < 1e-12


def test_rhs_traceless_and_hermitian(rng):
    p = LindbladParams(gamma=0.7, n_eff=0.4, env_kappa=0.2, env_nth=1.5, omega_b=3.0, rotating_frame=False)
    rhs = lindblad_rhs(_random_state(8, rng), p)
    assert abs(np.trace(rhs)) < 1e-12
    assert np.max(np.abs(rhs - rhs.conj().T)) < 1e-12


def test_rhs_dimension_mismatch(rng):
    p = LindbladParams(gamma=1.0, n_eff=0.1)
    with pytest.raises(UsageError):
        lindblad_rhs(_random_state(4, rng), p, dim=5)


@pytest.mark.parametrize('n_bar', [0.0, 0.5, 1.0])
def test_relaxation_from_vacuum(n_bar):
    p = LindbladParams(gamma=1.0, n_eff=n_bar)
    T = 10.0
    final, df = trajectory(DensityMatrix.vacuum(N_max), p, T, 1e-3, record_every=500)
    # a thermal bath keeps an initially thermal state thermal, with n(t) = n (1 - e^{-t})
    n_t = n_bar * (1 - np.exp(-T))
    np.testing.assert_allclose(final.populations, bose_einstein_populations(n_t, N_max), atol=1e-8)
    assert df['trace_error'].max() < 1e-10
    assert final.min_eigenvalue >= -1e-10
    assert final.hermiticity_error < 1e-12
    closed = analytic_moments(p, df['t'].to_numpy(), 0.0)
    np.testing.assert_allclose(df['mean_n'].to_numpy(), closed, rtol=1e-6, atol=1e-12)


def test_single_photon_decay():
    p = LindbladParams(gamma=1.0, n_eff=0.0)
    final = evolve(DensityMatrix.fock(1, 5), p, 1.0, 1e-3, on_truncation='warn')
    assert final.mean_occupation == pytest.approx(np.exp(-1.0), rel=1e-6)


def test_evolve_matches_closed_form_mean():
    p = LindbladParams(gamma=2.0, n_eff=0.5)
    rho0 = DensityMatrix.fock(2, N_max)
    final = evolve(rho0, p, 0.8, 5e-4)
    assert final.mean_occupation == pytest.approx(analytic_moments(p, 0.8, 2.0), rel=1e-6)


def test_lab_frame_rotates_coherences():
    # (|0> + |1>)/sqrt(2) in ten levels
    rho0 = DensityMatrix(np.pad(np.full((2, 2), 0.5), (0, 8)))
    rot = LindbladParams(gamma=1.0, n_eff=0.0)
    lab = LindbladParams(gamma=1.0, n_eff=0.0, omega_b=2.0, rotating_frame=False)
    T = 1.0
    a = evolve(rho0, rot, T, 1e-3)
    b = evolve(rho0, lab, T, 1e-3)
    np.testing.assert_allclose(b.populations, a.populations, atol=1e-12)
    assert b.entries[0, 1] == pytest.approx(a.entries[0, 1] * np.exp(2.0j * T), abs=1e-8)


def test_step_size_violation():
    p = LindbladParams(gamma=1.0, n_eff=0.5)
    with pytest.raises(ConfigError, match='stability'):
        evolve(DensityMatrix.vacuum(N_max), p, 1.0, 0.1)


def test_truncation_policy():
    p = LindbladParams(gamma=1.0, n_eff=0.0)
    rho0 = DensityMatrix.fock(3, 3)
    with pytest.raises(TruncationError):
        evolve(rho0, p, 0.1, 1e-3)
    with pytest.warns(TruncationWarning):
        evolve(rho0, p, 0.1, 1e-3, on_truncation='warn')
    with pytest.raises(ConfigError):
        evolve(rho0, p, 0.1, 1e-3, on_truncation='ignore')


def test_steady_state():
    p = LindbladParams(gamma=1.0, n_eff=0.5)
    rho = steady_state(p, N_max)
    np.testing.assert_allclose(rho.populations, bose_einstein_populations(0.5, N_max), atol=1e-15)
    assert np.max(np.abs(lindblad_rhs(rho, p))) < 1e-12


def test_steady_state_tail():
    p = LindbladParams(gamma=1.0, n_eff=1.0)
    with pytest.raises(TruncationError, match='analytic_moments'):
        steady_state(p, N_max)
    rho = steady_state(p, N_max, tail_tol=1e-9)
    assert rho.mean_occupation == pytest.approx(1.0, rel=1e-6)


def test_combined_baths():
    p = LindbladParams(gamma=1.0, n_eff=0.5, env_kappa=1.0, env_nth=0.1)
    assert p.total_occupation == pytest.approx(0.3)
    assert p.total_rate == 2.0
    rho = steady_state(p, N_max)
    assert np.max(np.abs(lindblad_rhs(rho, p))) < 1e-12


def test_analytic_moments_large_occupation():
    p = LindbladParams(gamma=1e-20, n_eff=1e40)
    assert analytic_moments(p, 1e20, 0.0) == pytest.approx(1e40 * (1 - np.exp(-1.0)))


@pytest.mark.parametrize('preset,bound', [('haystac', 4e14), ('admx', 1e14)])
def test_markov_bounds(preset, bound):
    sim = HaloscopeSimulation(presets=[preset])
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a, v_g=sim.config['halo']['v_g'])
    assert report.valid
    assert bound / 3 <= report.f_a_max <= 3 * bound


def test_markov_invalid_above_bound():
    sim = HaloscopeSimulation(presets=['haystac'])
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    beyond = sim.with_value('axion.f_a_GeV', 10 * report.f_a_max)
    later = markov_check(beyond.axion, beyond.haloscope, beyond.context, beyond.Q_a)
    assert not later.valid
    assert later.f_a_max == pytest.approx(report.f_a_max, rel=1e-8)


def test_markov_magnet_off():
    sim = HaloscopeSimulation(presets=['haystac']).with_value('haloscope.B0', 0.0)
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    assert report.valid
    assert report.f_a_max == np.inf


def test_markov_independent_of_quantization_volume():
    sim = HaloscopeSimulation(presets=['admx'])
    other = sim.with_value('context.V', 1e50)
    first = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    second = markov_check(other.axion, other.haloscope, other.context, other.Q_a)
    assert second.margin == pytest.approx(first.margin, rel=1e-12)


def test_params_from_physics():
    sim = HaloscopeSimulation(presets=['admx'])
    p = LindbladParams.from_physics(sim.axion, sim.haloscope, sim.halo, sim.context, env_kappa=2.0)
    assert p.gamma == pytest.approx(sim.gamma(), rel=1e-14)
    assert p.n_eff == pytest.approx(sim.n_eff(), rel=1e-12)
    assert p.omega_b == sim.haloscope.omega_b
    assert p.total_rate == pytest.approx(p.gamma + 2.0)


def test_markov_margin_at_bound():
    sim = HaloscopeSimulation(presets=['haystac'])
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    kwargs = {'mass_fa_constant': sim.axion.mass_fa_constant, 'coupling_per_fa': sim.axion.coupling_per_fa}
    H_I, tau_c = markov_margin(report.f_a_max, sim.haloscope, sim.context, sim.Q_a, **kwargs)
    assert H_I * tau_c == pytest.approx(1.0, rel=1e-8)
    H_I_now, tau_c_now = markov_margin(sim.axion.f_a, sim.haloscope, sim.context, sim.Q_a, **kwargs)
    assert (H_I_now * tau_c_now)**2 == pytest.approx(report.margin, rel=1e-12)
    with pytest.raises(ConfigError):
        markov_margin(1e12, sim.haloscope, sim.context, sim.Q_a)


def test_truncation_caught_mid_run():
    # the top level decays as e^{-3t}, far below the threshold by t = 6
    p = LindbladParams(gamma=1.0, n_eff=0.0)
    rho0 = DensityMatrix.fock(3, 3)
    with pytest.raises(TruncationError, match='highest Fock level'):
        evolve(rho0, p, 6.0, 1e-3)
    with pytest.warns(TruncationWarning) as record:
        final = evolve(rho0, p, 6.0, 1e-3, on_truncation='warn')
    assert len(record) == 1
    assert final.max_level_population < 1e-6


@pytest.mark.parametrize('preset', ['haystac', 'admx'])
def test_markov_margin_monotonic(preset):
    sim = HaloscopeSimulation(presets=[preset])
    kwargs = {'mass_fa_constant': sim.axion.mass_fa_constant, 'coupling_per_fa': sim.axion.coupling_per_fa}
    f_a = np.logspace(9, 17, 33)
    products = np.array([np.prod(markov_margin(f, sim.haloscope, sim.context, sim.Q_a, **kwargs)) for f in f_a])
    assert np.all(np.diff(products) > 0)
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    below = np.prod(markov_margin(report.f_a_max * (1 - 1e-6), sim.haloscope, sim.context, sim.Q_a, **kwargs))
    above = np.prod(markov_margin(report.f_a_max * (1 + 1e-6), sim.haloscope, sim.context, sim.Q_a, **kwargs))
    assert below < 1.0 < above


@pytest.mark.parametrize('V', [1.0, 1e40, 1e70])
def test_rates_independent_of_quantization_volume(V):
    sim = HaloscopeSimulation(presets=['admx'])
    other = sim.with_value('context.V', V)
    assert other.n_eff() == pytest.approx(sim.n_eff(), rel=1e-12)
    assert other.gamma() == pytest.approx(sim.gamma(), rel=1e-12)


@pytest.mark.parametrize('preset,physical_volume,physical_bound', [('haystac', 1.5e-3, 6.7e13),
                                                                   ('admx', 0.136, 1.0e12)])
def test_markov_bound_scales_with_coupling_volume(preset, physical_volume, physical_bound):
    sim = HaloscopeSimulation(presets=[preset])
    report = markov_check(sim.axion, sim.haloscope, sim.context, sim.Q_a)
    physical = sim.with_value('haloscope.V_prime', physical_volume)
    scaled = markov_check(physical.axion, physical.haloscope, physical.context, physical.Q_a)
    expected = report.f_a_max * sim.haloscope.V_prime / physical_volume
    assert scaled.f_a_max == pytest.approx(expected, rel=1e-9)
    assert physical_bound / 3 <= scaled.f_a_max <= 3 * physical_bound
