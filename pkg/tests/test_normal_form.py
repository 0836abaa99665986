import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from z4lab.errors import (InvalidRegimeError, MuTooLargeError, OutsideWindowError,
                          WrongCaseError)
from z4lab.normal_form import (derived_constants, het_curve_coeffs, in_window,
                               omega_plus_coefficient, phys_to_rescaled, rescaled_to_phys,
                               sm_point_to_phys, sm_point_to_rescaled, sm_reduction,
                               sm_residual, transformed_field)
from z4lab.systems import PhysParams, RescaledParams, SMParams, SystemCoefficients, sm_field


def test_derived_constants(concrete):
    k = derived_constants(concrete, 0.02)
    assert k.A == pytest.approx(-0.25, abs=1e-15)
    assert k.B == pytest.approx(0.25, abs=1e-15)
    assert k.C == pytest.approx(1.0606601717798212, abs=1e-14)
    assert k.D == pytest.approx(0.35355339059327373, abs=1e-14)
    assert k.z0 == pytest.approx(0.28284271247461906, abs=1e-15)


def test_z0_needs_positive_mu(concrete):
    with pytest.raises(InvalidRegimeError):
        derived_constants(concrete, -0.01)


def test_phys_to_rescaled_lorenz_point(concrete):
    r = phys_to_rescaled(concrete, PhysParams(0.07, 0.16, 0.02))
    assert r.rho == pytest.approx(0.35, abs=1e-14)
    assert r.omega == pytest.approx(0.8, abs=1e-14)
    assert phys_to_rescaled(concrete, PhysParams(0.0, 0.16, 0.02)).rho == 0.0


@given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.floats(1e-6, 0.1))
def test_rescaling_round_trip(gamma, beta, mu):
    c = SystemCoefficients.concrete()
    p = rescaled_to_phys(c, phys_to_rescaled(c, PhysParams(gamma, beta, mu)))
    assert abs(p.gamma - gamma) <= 1e-14 * max(1, abs(gamma))
    assert abs(p.beta - beta) <= 1e-14 * max(1, abs(beta))


def test_rescaling_regime(concrete):
    with pytest.raises(InvalidRegimeError):
        phys_to_rescaled(concrete, PhysParams(0.1, 0.1, 0.0))
    with pytest.raises(InvalidRegimeError):
        phys_to_rescaled(concrete.replace(b1=0.25), PhysParams(0.1, 0.1, 0.01))


def test_reduction_recovers_mu1(concrete):
    mu, mu1 = 1e-4, 0.04
    k = derived_constants(concrete)
    sq = math.sqrt(mu)
    r = RescaledParams(k.C * sq, math.sqrt(1 - mu1) - k.D * sq, mu)
    red = sm_reduction(concrete, r)
    assert red.mu1 == pytest.approx(mu1, rel=1e-12)
    assert red.lam == pytest.approx(0.0, abs=1e-12)
    assert red.alpha > 0


def test_reduction_outside_window(concrete):
    with pytest.raises(OutsideWindowError):
        sm_reduction(concrete, RescaledParams(0.5, 1.0, 1e-4))


def test_inverse_lands_in_window(concrete):
    mu = 1e-4
    r = sm_point_to_rescaled(concrete, SMParams(1.0, 1.0), mu)
    assert abs(r.rho) <= 10 * math.sqrt(mu)
    assert in_window(concrete, r)
    assert r.omega > 0


@pytest.mark.parametrize("mu", [1e-3, 1e-4])
@pytest.mark.parametrize("alpha,lam", [(1.0, 1.0), (0.6, 0.3), (1.5, 1.8)])
def test_inverse_round_trip(concrete, mu, alpha, lam):
    p = sm_point_to_phys(concrete, SMParams(alpha, lam), mu)
    red = sm_reduction(concrete, phys_to_rescaled(concrete, p))
    assert abs(red.alpha - alpha) < 10 * mu
    assert abs(red.lam - lam) < 10 * mu


def test_lambda_zero_gives_c_sqrt_mu(concrete):
    mu = 1e-4
    r = sm_point_to_rescaled(concrete, SMParams(1.0, 1e-300), mu)
    assert r.rho == pytest.approx(derived_constants(concrete).C * math.sqrt(mu), rel=1e-12)


def test_mu_too_large(concrete):
    with pytest.raises(MuTooLargeError):
        sm_point_to_rescaled(concrete, SMParams(0.5, 1.0), 0.2)


def test_affine_map_round_trip(concrete):
    red = sm_reduction(concrete, sm_point_to_rescaled(concrete, SMParams(1.0, 1.0), 1e-4))
    X = np.array([0.3, -0.2, 0.5])
    np.testing.assert_allclose(red.from_rescaled(red.to_rescaled(X)), X, atol=1e-12)


def test_transformed_field_linear_part_matches(concrete):
    # at X = 0 (the point O+) both fields vanish
    r = sm_point_to_rescaled(concrete, SMParams(1.0, 1.0), 1e-4)
    F = transformed_field(concrete, r)
    np.testing.assert_allclose(F(np.zeros(3)), 0.0, atol=1e-12)
    ref = sm_field(sm_reduction(concrete, r).sm_params)
    np.testing.assert_allclose(ref(np.zeros(3)), 0.0)


def _residual(c, mu, flip=False):
    r = sm_point_to_rescaled(c, SMParams(1.0, 1.0), mu)
    if flip:
        r = RescaledParams(r.rho, -r.omega, r.mu)
    return sm_residual(c, r)


def test_residual_scales_like_sqrt_mu(concrete):
    ratio = _residual(concrete, 4e-4) / _residual(concrete, 1e-4)
    assert 1.5 <= ratio <= 2.7


def test_residual_decreases_with_mu(concrete):
    vals = [_residual(concrete, mu) for mu in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2]
    assert all(math.isfinite(v) for v in vals)


def test_residual_grows_off_window(concrete):
    assert _residual(concrete, 1e-4, flip=True) > 10 * _residual(concrete, 1e-4)


def test_het_coefficients(concrete):
    h = het_curve_coeffs(concrete)
    assert h.k2 == pytest.approx(-(math.pi ** 2 - 9) / 3, abs=1e-14)
    assert h.k2 == pytest.approx(-0.289868, abs=1e-6)
    # term-by-term evaluation of the closed form
    assert h.k1 == pytest.approx(0.3535533905932738, abs=1e-12)


def test_het_coefficients_without_b(concrete):
    # b0 real and a0 real make B vanish
    c = concrete.replace(a0=complex(-0.5, 0.0), b0=complex(0.5, 0.0))
    assert derived_constants(c).B == 0
    assert het_curve_coeffs(c).k2 == 0


def test_het_coefficients_wrong_case(concrete):
    with pytest.raises(WrongCaseError):
        het_curve_coeffs(concrete.replace(b0=complex(-0.5, 0.0)))


def test_arrival_coefficient(concrete):
    assert omega_plus_coefficient(concrete) == pytest.approx(-0.1767766952966369, abs=1e-12)
