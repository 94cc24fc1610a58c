import math
import os
import subprocess
import sys

import numpy as np
import pytest

from quasilab import _fallback, kernels


def _omega_py(t):
    return 0.0 if t == 0 else t * math.log(abs(t))


def _brute_lemma_w(lo, step, count):
    g = [lo + step * k for k in range(count)]
    best = 0.0
    for s in g:
        for t in g:
            den = abs(s) + abs(t)
            if den:
                best = max(best, abs(_omega_py(s + t) - _omega_py(s) - _omega_py(t)) / den)
    return best


def test_backend_name():
    assert kernels.BACKEND in ("cython", "numpy")


def test_pnorm_rows(impl, rng):
    X = rng.standard_normal((50, 7))
    for p in (0.5, 1.0, 2.0, 3.5):
        expected = [sum(abs(v) ** p for v in row) ** (1 / p) for row in X]
        np.testing.assert_allclose(impl.pnorm_rows(X, p), expected, rtol=1e-13)


def test_ribe_rows(impl, rng):
    X = rng.standard_normal((40, 5))
    X[0] = 0.0
    X[1] = [1.0, -1.0, 0.0, 0.0, 0.0]
    expected = [_omega_py(sum(r)) - sum(_omega_py(v) for v in r) for r in X]
    np.testing.assert_allclose(impl.ribe_rows(X), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("nonhom", [False, True])
@pytest.mark.parametrize("cap", [1.0, 2.5, np.inf])
def test_kp_rows(impl, rng, nonhom, cap):
    X = rng.standard_normal((30, 6)) * np.exp(rng.uniform(-4, 2, (30, 1)))
    X[0, 2:] = 0.0
    p = 1.5
    out = impl.kp_rows(X, p, cap, nonhom)
    for row, got in zip(X, out):
        nrm = sum(abs(v) ** p for v in row) ** (1 / p)
        for v, g in zip(row, got):
            if v == 0:
                assert g == 0
                continue
            arg = -math.log(abs(v)) if nonhom else math.log(nrm / abs(v))
            assert g == pytest.approx(v * min(max(arg, 0.0), cap), rel=1e-12, abs=1e-300)


def test_lemma_w_grid_matches_brute_force(impl):
    best, s, t, over = impl.lemma_w_grid(-2.0, 0.1, 41)
    assert best == pytest.approx(_brute_lemma_w(-2.0, 0.1, 41), rel=1e-14)
    assert over == 0


def test_lemma_w_degenerate(impl):
    assert impl.lemma_w_grid(0.0, 1e-3, 1) == (0.0, 0.0, 0.0, 0)


@pytest.mark.skipif("cython" not in kernels.implementations(), reason="extension not built")
def test_cython_matches_numpy(rng):
    ext = kernels.implementations()["cython"]
    X = rng.standard_normal((200, 33))
    for p in (0.7, 1.0, 2.0):
        np.testing.assert_allclose(ext.pnorm_rows(X, p), _fallback.pnorm_rows(X, p), rtol=1e-13)
        np.testing.assert_allclose(ext.kp_rows(X, p, 3.0, False),
                                   _fallback.kp_rows(X, p, 3.0, False), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(ext.ribe_rows(X), _fallback.ribe_rows(X), rtol=1e-11, atol=1e-13)
    a = ext.lemma_w_grid(-2.0, 0.01, 401)
    b = _fallback.lemma_w_grid(-2.0, 0.01, 401)
    assert a[0] == pytest.approx(b[0], rel=1e-14)
    assert a[3] == b[3] == 0


def test_env_var_forces_fallback():
    env = dict(os.environ, QUASILAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import quasilab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
