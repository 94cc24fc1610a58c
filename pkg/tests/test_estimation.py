import math

import numpy as np
import pytest

from quasilab.estimation import (CertificateViolation, certified_Q_upper, estimate_Q,
                                 k0_lower_bound, local_ascent, random_pairs, structured_pairs)
from quasilab.maps import (LOG2, HomogeneousMap, defect_rows, identity_map, identity_profile,
                           kalton_peck_map, kp_constant, ribe_map)
from quasilab.spaces import PNormedSpace


def test_certified_upper():
    assert certified_Q_upper("ribe") == pytest.approx(2 * LOG2)
    assert certified_Q_upper("linear") == 0.0
    assert certified_Q_upper("kalton_peck", p=1.0, lip=2.0) == pytest.approx(20 / math.e)
    assert certified_Q_upper(ribe_map(4)) == pytest.approx(2 * LOG2)
    with pytest.raises(ValueError):
        certified_Q_upper("kalton_peck")
    with pytest.raises(ValueError):
        certified_Q_upper("mystery")


def test_k0_lower_bound_values():
    # (1/2) log n / (2 log 2) = log n / (4 log 2)
    assert k0_lower_bound("ribe", 0.5 * math.log(10)) == pytest.approx(0.830482, abs=1e-6)
    assert k0_lower_bound("ribe", 0.5 * math.log(1e6)) == pytest.approx(4.982892, abs=1e-6)
    assert k0_lower_bound("linear", 0.0) == 0.0
    with pytest.raises(ValueError):
        k0_lower_bound("linear", 1.0)


def test_pairs_shapes(rng):
    X, Y = structured_pairs(8)
    assert X.shape == Y.shape and X.shape[1] == 8
    X, Y = random_pairs(5, 100, rng)
    assert X.shape == Y.shape == (100, 5)
    assert np.all(np.isfinite(X)) and np.all(np.isfinite(Y))


def test_local_ascent_never_decreases():
    f = ribe_map(6)
    x = np.array([1.0, 0.2, 0.0, 0.0, 0.0, 0.0])
    y = np.array([0.0, 0.0, 0.7, 0.1, 0.0, 0.0])
    start = defect_rows(f, x[None], y[None])[0]
    ax, ay, val, _ = local_ascent(f, x, y, rounds=30)
    assert val >= start
    assert val == pytest.approx(defect_rows(f, ax[None], ay[None])[0], rel=1e-15)


def test_ribe_q_estimate_in_range():
    est = estimate_Q(ribe_map(16), budget=2000, seed=1)
    assert LOG2 - 1e-12 <= est.sampled_lower <= 2 * LOG2
    x, y = est.witness_pair
    assert defect_rows(ribe_map(16), x[None], y[None])[0] == est.sampled_lower


def test_linear_q_is_zero():
    est = estimate_Q(identity_map(5, 1.0), budget=500, seed=0)
    assert est.sampled_lower < 1e-14


def test_kp_q_below_certificate():
    f = kalton_peck_map(8, identity_profile(), 2.0)
    est = estimate_Q(f, budget=2000, seed=3)
    assert 0 < est.sampled_lower <= kp_constant(2.0)


def test_monotone_in_budget():
    f = ribe_map(12)
    vals = [estimate_Q(f, budget=b, seed=7, ascent_rounds=5).sampled_lower for b in (10, 300, 1500)]
    assert vals[0] <= vals[1] <= vals[2]


def test_reproducible():
    f = kalton_peck_map(6, identity_profile(), 1.0)
    a = estimate_Q(f, budget=400, seed=11)
    b = estimate_Q(f, budget=400, seed=11)
    assert a.sampled_lower == b.sampled_lower


def test_certificate_violation_raises():
    sp = PNormedSpace(2, 1.0)
    liar = HomogeneousMap(domain=sp, codomain=PNormedSpace(1, 1.0),
                          func=lambda X: np.abs(X).max(axis=1, keepdims=True),
                          q_certified_upper=0.0, label="liar")
    with pytest.raises(CertificateViolation):
        estimate_Q(liar, budget=50, seed=0)
    assert estimate_Q(liar, budget=50, seed=0, check=False).sampled_lower > 0


def test_bad_budget():
    with pytest.raises(ValueError):
        estimate_Q(ribe_map(3), budget=0)
