import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from quasilab.maps import identity_map, identity_profile, kalton_peck_map, linear_map
from quasilab.spaces import (PNormedSpace, aoki_rolewicz_exponent, hom_map_norm_estimate,
                             p_quasinorm, partial_sum, unit_vector)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, 6, elements=finite)
exponents = st.sampled_from([0.25, 0.5, 0.8, 1.0, 1.5, 2.0, 4.0])


@pytest.mark.parametrize("p", [0.3, 1.0, 2.0, 7.0])
def test_unit_vector_norm(p):
    assert p_quasinorm(unit_vector(5, 3), p) == 1.0


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 10, 64])
def test_partial_sum_norm(p, n):
    assert p_quasinorm(partial_sum(n, n), p) == pytest.approx(n ** (1 / p), rel=1e-14)


def test_three_four_five():
    assert p_quasinorm([3.0, 4.0], 2) == 5.0


def test_zero_and_nonfinite():
    assert p_quasinorm(np.zeros(4), 0.5) == 0.0
    with pytest.raises(ValueError):
        p_quasinorm([1.0, np.nan], 1)
    with pytest.raises(ValueError):
        p_quasinorm([1.0, np.inf], 1)
    with pytest.raises(ValueError):
        p_quasinorm([1.0], -1)


def test_aoki_rolewicz():
    assert aoki_rolewicz_exponent(1) == 1.0
    # oracle: root of (2 delta)^p = 2
    d = math.sqrt(2)
    root = brentq(lambda p: (2 * d) ** p - 2, 1e-6, 5, xtol=1e-15)
    assert aoki_rolewicz_exponent(d) == pytest.approx(root, abs=1e-12)
    assert aoki_rolewicz_exponent(d) == pytest.approx(2 / 3, abs=1e-12)
    assert aoki_rolewicz_exponent(2 ** (1 / 0.5 - 1)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        aoki_rolewicz_exponent(0.9)


def test_concavity_modulus():
    assert PNormedSpace(3, 2.0).concavity_modulus() == 1.0
    assert PNormedSpace(3, 0.5).concavity_modulus() == 2.0
    with pytest.raises(ValueError):
        PNormedSpace(0, 1.0)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, exponents)
def test_p_triangle(x, y, p):
    r = min(p, 1.0)
    lhs = p_quasinorm(x + y, p) ** r
    rhs = p_quasinorm(x, p) ** r + p_quasinorm(y, p) ** r
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


@settings(max_examples=200, deadline=None)
@given(vectors, exponents, st.floats(-10, 10, allow_nan=False))
def test_homogeneity(x, p, t):
    assert p_quasinorm(t * x, p) == pytest.approx(abs(t) * p_quasinorm(x, p), rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, exponents)
def test_modulus(x, y, p):
    sp = PNormedSpace(6, p)
    den = sp.norm(x) + sp.norm(y)
    if den > 0:
        assert sp.norm(x + y) / den <= sp.concavity_modulus() * (1 + 1e-12)


def test_sphere_samples_are_unit(rng):
    sp = PNormedSpace(9, 0.6)
    S = sp.sample_sphere(rng, 100)
    np.testing.assert_allclose(sp.norm(S), 1.0, rtol=1e-12)


def test_norm_estimate_examples():
    assert hom_map_norm_estimate(identity_map(5, 1.5), 50, 0) == pytest.approx(1.0, rel=1e-12)
    zero = linear_map(np.zeros((4, 4)), 1.0)
    assert hom_map_norm_estimate(zero, 50, 0) == 0.0
    n, p = 64, 1.0
    f = kalton_peck_map(n, identity_profile(), p)
    w = n ** (-1 / p) * np.ones(n)
    assert hom_map_norm_estimate(f, 0, 0, witnesses=[w]) == pytest.approx(math.log(n) / p, abs=1e-12)


def test_norm_estimate_monotone_in_samples():
    f = kalton_peck_map(8, identity_profile(), 1.0)
    a = hom_map_norm_estimate(f, 10, 5)
    b = hom_map_norm_estimate(f, 10, 5, witnesses=[np.ones(8)])
    assert b >= a
