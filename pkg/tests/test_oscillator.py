import numpy as np
import pytest
from scipy import integrate

from lsed.errors import DomainError, ResolutionError
from lsed.field import FrequencyGrid, PhysicalConstants, SpectralModel, power_spectrum
from lsed.oscillator import (OscillatorSpec, discrete_moments, linewidth, reduced_response_amplitude,
                             response_amplitude, stationary_moments)

K = PhysicalConstants.from_tau(1e-4)
SPEC = OscillatorSpec(1.0, K)
GRID = FrequencyGrid(0.1, 20.0, 1000)


def test_resonant_magnitude():
    w = 1.3
    spec = OscillatorSpec(w, K)
    assert abs(response_amplitude(spec, w, 2.0)) == pytest.approx(
        K.e_charge * 2.0 / (K.m * K.tau * w**3), rel=1e-12)


def test_high_frequency_free_particle_limit():
    spec = OscillatorSpec(1.0, PhysicalConstants.from_tau(1e-8))
    w = 1000.0
    e = spec.constants.e_charge
    assert response_amplitude(spec, w) == pytest.approx(-e / w**2, rel=1e-5)


def test_imaginary_part_vanishes_linearly_with_tau():
    ratios = []
    for tau in (1e-4, 1e-6, 1e-8):
        r = response_amplitude(OscillatorSpec(1.0, PhysicalConstants.from_tau(tau)), 0.7)
        ratios.append(abs(r.imag / r.real) / tau)
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-3)


def test_reduced_response_agrees_to_first_order():
    w = np.array([0.5, 2.0, 5.0])
    exact = response_amplitude(SPEC, w)
    red = reduced_response_amplitude(SPEC, w)
    np.testing.assert_allclose(red, exact, rtol=5 * K.tau * w.max() ** 2)


def test_response_rejects_nonpositive_frequency():
    with pytest.raises(DomainError):
        response_amplitude(SPEC, 0.0)


def test_zero_point_ground_state_moments():
    m = stationary_moments(SPEC, SpectralModel.zero_point(K), GRID)
    assert m.x2 == pytest.approx(0.5, rel=0.01)
    assert m.uncertainty_product == pytest.approx(0.5, rel=0.01)


def test_quadrature_matches_adaptive_oracle():
    model = SpectralModel.zero_point(K)
    m = stationary_moments(SPEC, model, GRID)

    def f(w):
        return abs(response_amplitude(SPEC, w)) ** 2 * power_spectrum(model, w)
    ref = sum(integrate.quad(f, a, b, limit=500, epsabs=0, epsrel=1e-12)[0]
              for a, b in [(0.1, 0.99), (0.99, 1.01), (1.01, 20.0)])
    assert m.x2 == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 4.0])
def test_planck_moments_follow_coth(beta):
    m = stationary_moments(SPEC, SpectralModel.planck(beta, K), GRID)
    assert m.x2 == pytest.approx(0.5 / np.tanh(beta / 2), rel=0.02)


def test_monotone_in_temperature_and_heisenberg_floor():
    betas = [8.0, 4.0, 2.0, 1.0, 0.5]
    ms = [stationary_moments(SPEC, SpectralModel.planck(b, K), GRID) for b in betas]
    x2 = [m.x2 for m in ms]
    assert all(b >= a for a, b in zip(x2, x2[1:]))
    assert min(m.uncertainty_product for m in ms) >= 0.5 * 0.99


def test_unrefined_sum_needs_resolution():
    with pytest.raises(ResolutionError) as info:
        stationary_moments(SPEC, SpectralModel.zero_point(K), GRID, refine=False)
    assert info.value.suggested_n_modes > 1000
    fine = FrequencyGrid(0.9, 1.1, 20_000)
    # 50 nodes within five linewidths
    assert 10 * linewidth(SPEC) / (0.2 / 20_000) >= 50
    stationary_moments(SPEC, SpectralModel.zero_point(K), fine, refine=False)
