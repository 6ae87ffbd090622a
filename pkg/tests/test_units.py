import numpy as np
import pytest

from ubdmhaloscope.base import DomainError, EvanescentModeError, UsageError
from ubdmhaloscope.constants import CONSTANTS
from ubdmhaloscope.units import (AxionParams, HaloscopeParams, FieldQuantizationContext,
                                 compton_frequency, omega_of_k, k_of_omega, group_velocity,
                                 doppler_shifted_frequency, mass_fa_convert, coupling_g, rate_gamma)

mass = 1e-5


def test_constants_consistent():
    C = CONSTANTS
    assert C.mu0 * C.eps0 * C.c**2 == pytest.approx(1.0, rel=1e-9)
    assert C.tesla_to_eV2(1.0) == pytest.approx(195.35, rel=1e-3)
    assert C.hbar_c_eV_m == pytest.approx(1.97327e-7, rel=1e-5)


def test_compton_frequency():
    assert compton_frequency(mass) == pytest.approx(1.519e10, rel=1e-3)
    with pytest.raises(DomainError):
        compton_frequency(0.0)


def test_omega_of_k_zero_momentum():
    assert omega_of_k(0.0, mass) == compton_frequency(mass)


def test_omega_of_k_small_momentum():
    k = 1e-3 * compton_frequency(mass) / CONSTANTS.c
    assert omega_of_k(k, mass) == pytest.approx(compton_frequency(mass) * (1 + 5e-7), rel=1e-12)


def test_omega_of_k_rejects_negative():
    with pytest.raises(DomainError):
        omega_of_k(-1.0, mass)


def test_k_of_omega_round_trip():
    k_c = compton_frequency(mass) / CONSTANTS.c
    k = k_c * np.array([0.1, 0.5, 1.0, 3.0, 10.0])
    np.testing.assert_allclose(k_of_omega(omega_of_k(k, mass), mass), k, rtol=1e-12)


def test_omega_round_trip_near_gap():
    omega_c = compton_frequency(mass)
    omega = omega_c * (1 + np.array([0.0, 1e-12, 5e-7, 1e-3, 2.0]))
    np.testing.assert_allclose(omega_of_k(k_of_omega(omega, mass), mass), omega, rtol=1e-12)


def test_k_of_omega_below_gap():
    with pytest.raises(EvanescentModeError):
        k_of_omega(0.5 * compton_frequency(mass), mass)
    # still a domain error for callers that only catch those
    with pytest.raises(DomainError):
        k_of_omega(0.999 * compton_frequency(mass), mass)


def test_group_velocity_limits():
    k_c = compton_frequency(mass) / CONSTANTS.c
    assert group_velocity(0.0, mass) == 0.0
    assert group_velocity(1e-3 * k_c, mass) == pytest.approx(1e-3 * CONSTANTS.c, rel=1e-6)


def test_doppler_shift():
    omega_c = compton_frequency(mass)
    assert doppler_shifted_frequency(mass, 1e-3 * CONSTANTS.c) == pytest.approx(omega_c * (1 + 5e-7), rel=1e-14)
    assert doppler_shifted_frequency(mass, [0.0, 0.0, 1e-3 * CONSTANTS.c]) == pytest.approx(
        omega_c * (1 + 5e-7), rel=1e-14)
    with pytest.raises(DomainError):
        doppler_shifted_frequency(mass, 2 * CONSTANTS.c)


def test_mass_fa_round_trip():
    f_a = mass_fa_convert(mass_eV=mass)
    assert f_a == pytest.approx(5.7e11)
    assert mass_fa_convert(f_a_GeV=f_a) == pytest.approx(mass, rel=1e-12)
    with pytest.raises(UsageError):
        mass_fa_convert(mass_eV=mass, f_a_GeV=f_a)
    with pytest.raises(UsageError):
        mass_fa_convert()


def test_axion_params_consistency():
    axion = AxionParams.from_fa(1e12)
    assert axion.mass_eV * axion.f_a == pytest.approx(axion.mass_fa_constant, rel=1e-12)
    with pytest.raises(DomainError):
        AxionParams(mass_eV=1e-5, f_a_GeV=1e12)


def test_axion_coupling_from_fa():
    axion = AxionParams(mass_eV=mass)
    expected = CONSTANTS.alpha * 0.97 / np.pi / axion.f_a
    assert axion.g_agg_GeV == pytest.approx(expected, rel=1e-12)
    explicit = AxionParams(mass_eV=mass, g_agg=1e-15)
    assert explicit.g_agg_GeV == 1e-15


def test_haloscope_params():
    halo = HaloscopeParams.from_quality(omega_b=1e10, V_prime=0.1, B0=7.6, Q_c=1e4)
    assert halo.kappa_c == pytest.approx(1e6)
    assert halo.Q_c == pytest.approx(1e4)
    with pytest.raises(DomainError):
        HaloscopeParams(omega_b=1e10, V_prime=0.1, B0=7.6, kappa_c=2e10)
    with pytest.raises(DomainError):
        HaloscopeParams(omega_b=1e10, V_prime=-0.1, B0=7.6, kappa_c=1e6)


def test_coupling_factor_by_factor():
    # ADMX-like inputs, each factor in base SI units
    axion = AxionParams(mass_eV=2.7e-6, g_agg=1e-15)
    halo = HaloscopeParams.from_quality(omega_b=compton_frequency(2.7e-6), V_prime=0.136, B0=7.6, Q_c=8e4)
    g_agg_per_J = 1e-15 / (1e9 * 1.602176634e-19)
    H_field = 7.6 / 1.25663706212e-6                                # A/m
    root = np.sqrt(1.054571817e-34 * halo.omega_b * 0.136 * 299792458.0 / 8.8541878128e-12)
    assert coupling_g(axion, halo) == pytest.approx(g_agg_per_J * H_field * root, rel=1e-12)


def test_rate_gamma():
    axion = AxionParams(mass_eV=mass)
    omega_b = doppler_shifted_frequency(mass, 232e3)
    halo = HaloscopeParams.from_quality(omega_b=omega_b, V_prime=0.136, B0=7.6, Q_c=1e4)
    g = coupling_g(axion, halo)
    k_b = k_of_omega(omega_b, mass)
    assert rate_gamma(axion, halo) == pytest.approx((g / CONSTANTS.c)**2 * k_b / (4 * np.pi), rel=1e-12)


def test_magnet_off():
    halo = HaloscopeParams.from_quality(omega_b=1e10, V_prime=0.1, B0=0.0, Q_c=1e4)
    assert coupling_g(AxionParams(mass_eV=mass), halo) == 0.0


def test_quantization_context():
    ctx = FieldQuantizationContext.from_GeV_per_cm3(0.3)
    assert ctx.rho_DM == pytest.approx(0.3 * 1.602176634e-19 * 1e15)
    with pytest.raises(DomainError):
        FieldQuantizationContext(V=0.0)


@pytest.mark.parametrize('scale', [0.5, 2.0, 10.0])
def test_coupling_scaling(scale):
    axion = AxionParams(mass_eV=mass)
    base = HaloscopeParams.from_quality(omega_b=1e10, V_prime=0.1, B0=7.6, Q_c=1e4)
    g = coupling_g(axion, base)
    stronger = HaloscopeParams.from_quality(omega_b=1e10, V_prime=0.1, B0=7.6 * scale, Q_c=1e4)
    larger = HaloscopeParams.from_quality(omega_b=1e10, V_prime=0.1 * scale**2, B0=7.6, Q_c=1e4)
    assert coupling_g(axion, stronger) == pytest.approx(scale * g, rel=1e-12)
    assert coupling_g(axion, larger) == pytest.approx(scale * g, rel=1e-12)
    omega_b = doppler_shifted_frequency(mass, 232e3)
    gap = HaloscopeParams.from_quality(omega_b=omega_b, V_prime=0.1, B0=7.6, Q_c=1e4)
    gap_stronger = HaloscopeParams.from_quality(omega_b=omega_b, V_prime=0.1, B0=7.6 * scale, Q_c=1e4)
    assert rate_gamma(axion, gap_stronger) == pytest.approx(scale**2 * rate_gamma(axion, gap), rel=1e-12)


@pytest.mark.parametrize('mass_eV', [1e-22, 1e-5, 1.0])
def test_omega_of_k_monotonic(mass_eV):
    k_c = compton_frequency(mass_eV) / CONSTANTS.c
    k = k_c * np.logspace(-6, 6, 241)
    omega = omega_of_k(k, mass_eV)
    assert np.all(np.diff(omega) > 0)
    assert np.all(omega >= compton_frequency(mass_eV))


@pytest.mark.parametrize('ratio', [1e3, 1e4, 1e6])
def test_group_velocity_approaches_c(ratio):
    k = ratio * compton_frequency(mass) / CONSTANTS.c
    # v = c / sqrt(1 + (k_c/k)^2)
    assert group_velocity(k, mass) == pytest.approx(CONSTANTS.c, rel=1.0 / ratio**2)
    h = 1e-6 * k
    slope = (omega_of_k(k + h, mass) - omega_of_k(k - h, mass)) / (2 * h)
    assert slope == pytest.approx(CONSTANTS.c, rel=1e-6)
