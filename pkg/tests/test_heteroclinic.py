import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from z4lab.errors import BracketError, PreconditionError
from z4lab.heteroclinic import (arrival_angle, energy_E, find_het_rho, fold_angle,
                                fundamental_solution_residual, planar_separatrix,
                                planar_separatrix_velocity, separatrix_split, z2_asymptote)
from z4lab.systems import RescaledParams

A = -0.25
Omega_plus = {}


def test_separatrix_at_zero():
    x0, z0 = planar_separatrix(A, 0.0)
    assert x0 == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert z0 == 0.5


def test_separatrix_limits():
    x0, z0 = planar_separatrix(A, np.array([-60.0, 60.0]))
    np.testing.assert_allclose(x0, [0, 0], atol=1e-12)
    np.testing.assert_allclose(z0, [1, 0], atol=1e-12)
    assert np.all(np.isfinite(planar_separatrix(A, np.array([-1e4, 1e4]))))


def test_separatrix_solves_planar_system():
    ts = np.linspace(-10, 10, 201)
    x0, z0 = planar_separatrix(A, ts)
    dx, dz = planar_separatrix_velocity(A, ts)
    rho = 0.5
    res = np.maximum(np.abs(dx - (z0 - rho) * x0), np.abs(dz - 2 * A * x0 ** 2))
    assert res.max() < 1e-12


@given(st.floats(-10, 10))
def test_separatrix_lies_on_energy_level(t):
    x0, z0 = planar_separatrix(A, t)
    assert energy_E(x0, z0, 0.5, A) == pytest.approx(0.25, abs=1e-13)


def test_energy_values():
    assert energy_E(0.0, 1.0, 0.5, A) == 0.25
    assert energy_E(0.0, 0.3, 0.3, A) == 0.0


def test_needs_negative_a():
    with pytest.raises(PreconditionError):
        planar_separatrix(0.25, 0.0)


def test_fundamental_solutions():
    r = fundamental_solution_residual(A)
    assert r.first < 1e-10
    assert r.second < 1e-6


def test_second_solution_asymptotics():
    assert z2_asymptote(A, 20.0) == pytest.approx(-2 * abs(A), abs=1e-4)
    assert z2_asymptote(A, -20.0) == pytest.approx(2 * abs(A), abs=1e-4)


def test_planar_split_vanishes(concrete):
    assert abs(separatrix_split(concrete, RescaledParams(0.5, 0.0, 0.0)).delta) < 1e-6


def test_planar_split_changes_sign(concrete):
    lo = separatrix_split(concrete, RescaledParams(0.49, 0.0, 0.0)).delta
    hi = separatrix_split(concrete, RescaledParams(0.51, 0.0, 0.0)).delta
    assert lo > 0 > hi


def test_planar_split_slope(concrete):
    # shooting value on the z = 0 section, frozen from this implementation
    d = [separatrix_split(concrete, RescaledParams(r, 0.0, 0.0)).delta for r in (0.499, 0.501)]
    slope = (d[1] - d[0]) / 0.002
    assert slope == pytest.approx(-2.0, rel=1e-3)


def test_raw_split_has_cylinder_bias(concrete):
    res = separatrix_split(concrete, RescaledParams(0.499, 0.0, 0.0))
    assert res.delta_outer != pytest.approx(res.delta, abs=1e-6)
    assert math.hypot(res.state[0], res.state[1]) == pytest.approx(0.2, abs=1e-10)


def test_launch_offset_halving(concrete):
    r = RescaledParams(0.45, 0.01, 1e-4)
    a = separatrix_split(concrete, r, h=1e-6).delta
    b = separatrix_split(concrete, r, h=5e-7).delta
    assert abs(a - b) < 1e-8


def test_symmetric_splits_agree(concrete):
    r = RescaledParams(0.45, 0.01, 1e-4)
    a = separatrix_split(concrete, r, which="O+").delta
    b = separatrix_split(concrete, r, which="O-").delta
    assert abs(a - b) < 1e-9


def test_surface_scales_like_sqrt_mu(concrete):
    a = find_het_rho(concrete, 0.0, 1.6e-5)
    b = find_het_rho(concrete, 0.0, 4e-6)
    assert a.width < 1e-10
    assert 1.8 <= (a.rho_star - 0.5) / (b.rho_star - 0.5) <= 2.2


def test_bracket_invariant(concrete):
    s = find_het_rho(concrete, 0.0, 1e-5)
    lo = separatrix_split(concrete, RescaledParams(s.lo, 0.0, 1e-5)).delta
    hi = separatrix_split(concrete, RescaledParams(s.hi, 0.0, 1e-5)).delta
    assert lo * hi < 0


def test_surface_is_deterministic(concrete):
    a = find_het_rho(concrete, 0.001, 1e-5)
    b = find_het_rho(concrete, 0.001, 1e-5)
    assert a == b


def test_bad_bracket(concrete):
    with pytest.raises(BracketError):
        find_het_rho(concrete, 0.0, 1e-5, bracket=(0.6, 0.7))


def test_fold_angle():
    assert fold_angle(math.pi) == 0.0
    assert fold_angle(-math.pi / 2) == pytest.approx(math.pi / 2)
    assert fold_angle(3 * math.pi / 4) == pytest.approx(-math.pi / 4)


def _omega(concrete, mu):
    if mu not in Omega_plus:
        rho = find_het_rho(concrete, 0.0, mu).rho_star
        Omega_plus[mu] = (rho, arrival_angle(concrete, mu, "+", rho=rho))
    return Omega_plus[mu]


def test_arrival_angle_plus(concrete):
    _, om = _omega(concrete, 1e-4)
    assert om == pytest.approx(-0.17678 * math.sqrt(1e-4), rel=0.2)


def test_arrival_angles_orthogonal(concrete):
    rho, om_p = _omega(concrete, 1e-4)
    om_m = arrival_angle(concrete, 1e-4, "-", rho=rho)
    assert abs(abs(om_m - om_p) - math.pi / 2) < 1e-3


def test_arrival_angle_vanishes_with_mu(concrete):
    _, big = _omega(concrete, 1e-4)
    _, small = _omega(concrete, 1e-6)
    assert abs(small) < abs(big) / 5
    assert abs(small) < 5e-4


def test_arrival_angle_needs_surface(concrete):
    with pytest.raises(PreconditionError):
        arrival_angle(concrete, 1e-4, "+", rho=0.4)
