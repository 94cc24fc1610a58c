import math

import numpy as np
import pytest

from quasilab import asymptotics as asy
from quasilab.maps import LOG2, identity_profile, kalton_peck_map, ribe_map

GRID = [8, 32, 128, 512]


def _row(n, norm, q, dist, heur=None, q_ub=None):
    return asy.FamilyRow(n=n, norm_est=norm, q_lb=q, q_ub=q if q_ub is None else q_ub,
                         dist_lb=dist, dist_mechanism="test", dist_heuristic=heur)


def test_classify_rules():
    grid = [16, 64, 256]
    flat = [_row(n, 1.0, 0.7, 0.5) for n in grid]
    assert asy.classify(flat)[0] == asy.NOT_ACCESSIBLE
    cand = [_row(n, 1.0, 1 / math.log(n), 0.5) for n in grid]
    assert asy.classify(cand)[0] == asy.CANDIDATE
    lin = [_row(n, 1.0, 0.0, 0.0, heur=0.0) for n in grid]
    assert asy.classify(lin)[0] == asy.ULTRAPRODUCT
    unsure = [_row(n, 1.0, 0.0, 0.0, heur=None) for n in grid]
    assert asy.classify(unsure)[0] == asy.INCONCLUSIVE
    blowup = [_row(n, v, 0.01, 0.5) for n, v in zip(grid, (1.0, 3.0, 9.0))]
    assert asy.classify(blowup)[0] == asy.NOT_ACCESSIBLE


def test_ribe_family_scaling():
    fam = asy.ribe_family([4, 16])
    f = fam.builder(16)
    x = np.arange(16.0)
    assert f(x) == pytest.approx(ribe_map(16)(x) / math.log(16), rel=1e-14)
    assert f.q_certified_upper == pytest.approx(2 * LOG2 / math.log(16))
    with pytest.raises(ValueError):
        asy.ribe_family([1, 4])


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_kp_family_normalized(p):
    f = asy.kp_family([16], p).builder(16)
    w = np.full(16, 16 ** (-1 / p))
    assert f.domain.norm(f(w)) == pytest.approx(1.0, rel=1e-12)


def test_kp_family_index_cap():
    f = asy.kp_family([16], 1.0, cap="index").builder(16)
    s = np.ones(16)
    np.testing.assert_allclose(f(s), math.log(16) / 16 * s, rtol=1e-14)
    with pytest.raises(ValueError):
        asy.kp_family([16], 1.0, cap="weird")


@pytest.mark.slow
def test_reports_on_small_grid():
    expect = {
        "ribe": (asy.ribe_family(GRID), asy.CANDIDATE),
        "kp": (asy.kp_family(GRID), asy.CANDIDATE),
        "unscaled": (asy.kp_unscaled_family(GRID), asy.NOT_ACCESSIBLE),
        "linear": (asy.linear_family(GRID), asy.ULTRAPRODUCT),
    }
    for name, (fam, verdict) in expect.items():
        rep = asy.accessibility_report(fam, budget=300, seed=0)
        assert rep.classification == verdict, (name, rep.reason)
        assert [r.n for r in rep.rows] == GRID


def test_report_needs_three_points():
    with pytest.raises(ValueError):
        asy.accessibility_report(asy.ribe_family([4, 8]))


def test_truncation_family_ribe():
    fam = asy.truncation_family(ribe_map(64), [8, 32, 64], budget=200, seed=0)
    for n in fam.index_grid:
        dn = fam.meta["d"][n]
        assert dn >= 0.25 * math.log(n) / (2 * LOG2)
        assert fam.meta["q_bound"][n] == pytest.approx(1 / dn)
        f = fam.builder(n)
        assert f.domain.dim == n
        assert f.q_certified_upper <= 1 / dn + 1e-12


def test_truncation_rejects_linear():
    with pytest.raises(ValueError):
        asy.truncation_family(kalton_peck_map(8, identity_profile(), 1.0).scaled(0.0), [4, 8])


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize("n", [16, 256])
def test_leibniz_on_partial_sum(p, n):
    s2 = np.r_[1.0, 1.0, np.zeros(n - 2)]
    d = asy.leibniz_defect("homogeneous", s2, s2, n, p)
    # D(s_2) = s_2 log(2^{1/p}) / log n and the defect is -D(s_2)
    expected = (LOG2 / p) * 2 ** (1 / p) / math.log(n)
    assert d.measured == pytest.approx(expected, rel=1e-12)
    assert d.closed_form == pytest.approx(expected, rel=1e-12)


def test_leibniz_random_pairs(rng):
    for _ in range(200):
        x, y = rng.standard_normal(16), rng.standard_normal(16)
        d = asy.leibniz_defect("hom", x, y, 16, 1.5)
        assert d.measured == pytest.approx(d.closed_form, rel=1e-9, abs=1e-15)
        assert asy.leibniz_defect("variant", x, y, 16, 1.5).measured <= 1e-12


def test_leibniz_bad_kind():
    with pytest.raises(ValueError):
        asy.leibniz_defect("other", np.ones(3), np.ones(3), 4, 1.0)
    with pytest.raises(ValueError):
        asy.kp_derivation(np.ones(3), 1, 1.0)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_idempotent_decay(p):
    for n, m in [(16, 1), (16, 4), (256, 16), (256, 256)]:
        assert asy.idempotent_decay(n, m, p) == pytest.approx(math.log(m) / (p * math.log(n)), abs=1e-12)
    with pytest.raises(ValueError):
        asy.idempotent_decay(4, 5, 1.0)
