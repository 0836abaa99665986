import numpy as np
import pytest

from z4lab.classify import (ClassifyConfig, ClassLabel, Evidence, classify,
                            label_from_evidence, symmetry_distance, visit_sequence)
from z4lab.normal_form import phys_to_rescaled
from z4lab.systems import SYMMETRY, PhysParams

CFG = ClassifyConfig()


def ev(top=0.01, visits="-+-+", d=0.1):
    return Evidence(top, visits, d, 100, 0.1, 0.1, CFG.radius, CFG.d_sym)


def test_symmetric_sample_has_zero_distance(rng):
    pts = rng.uniform(-1, 1, (50, 3))
    orbit = np.vstack([pts, pts @ SYMMETRY.T, pts @ (SYMMETRY @ SYMMETRY).T,
                       pts @ (SYMMETRY @ SYMMETRY @ SYMMETRY).T])
    assert symmetry_distance(orbit) == 0.0


def test_one_sided_sample_is_far(rng):
    pts = rng.uniform(-1, 1, (200, 3))
    pts[:, 2] = rng.uniform(0.5, 1.0, 200)
    assert symmetry_distance(pts) == 1.0


def test_empty_sample():
    with pytest.raises(Exception):
        symmetry_distance(np.zeros((0, 3)))


def test_decision_tree():
    assert label_from_evidence(ev(top=1e-3), CFG)[0] is ClassLabel.STABLE
    assert label_from_evidence(ev(visits=""), CFG)[0] is ClassLabel.UNCLASSIFIED
    assert label_from_evidence(ev(visits="---"), CFG)[0] is ClassLabel.LORENZ_PAIR
    assert label_from_evidence(ev(visits="+++"), CFG)[0] is ClassLabel.UNCLASSIFIED
    assert label_from_evidence(ev(visits="+++"), CFG, "O+")[0] is ClassLabel.LORENZ_PAIR
    assert label_from_evidence(ev(d=0.05), CFG)[0] is ClassLabel.SIMO_FOUR_WING
    assert label_from_evidence(ev(d=0.9), CFG)[0] is ClassLabel.SIMO_TWO_WING_PAIR


def test_config_validation():
    with pytest.raises(ValueError):
        ClassifyConfig(transient_frac=1.0)
    with pytest.raises(ValueError):
        ClassifyConfig(radius=0.0)


def test_lorenz_pair_visits(concrete):
    r = phys_to_rescaled(concrete, PhysParams(0.07, 0.16, 0.02))
    seq = visit_sequence(concrete, r)
    assert seq and set(seq) == {"-"}


def test_four_wing_visits(concrete):
    r = phys_to_rescaled(concrete, PhysParams(0.07, 0.002, 0.02))
    assert set(visit_sequence(concrete, r)) == {"-", "+"}


def test_stable_regime_has_no_passes(concrete):
    r = phys_to_rescaled(concrete, PhysParams(0.12, 0.002, 0.02))
    assert visit_sequence(concrete, r) == ""
    label, e = classify(concrete, PhysParams(0.12, 0.002, 0.02))
    assert label is ClassLabel.STABLE


@pytest.mark.parametrize("beta", [0.16, 0.002, 0.0015])
def test_label_is_symmetric(concrete, beta):
    p = PhysParams(0.07, beta, 0.02)
    a, ea = classify(concrete, p, source="O-")
    b, eb = classify(concrete, p, source="O+")
    assert a is b
    assert ea.min_dist_plus == pytest.approx(eb.min_dist_minus, abs=1e-6)


def test_lorenz_pair_stays_away_from_other_saddle(concrete):
    label, e = classify(concrete, PhysParams(0.0475, 0.1775, 0.02))
    assert label is ClassLabel.LORENZ_PAIR
    assert e.min_dist_plus > e.radius


def test_symmetry_distance_orders_simo_regimes(concrete):
    _, four = classify(concrete, PhysParams(0.07, 0.002, 0.02))
    _, two = classify(concrete, PhysParams(0.07, 0.0015, 0.02))
    assert four.symmetry_distance < two.symmetry_distance


def test_deterministic(concrete):
    p = PhysParams(0.07, 0.002, 0.02)
    assert classify(concrete, p) == classify(concrete, p)
