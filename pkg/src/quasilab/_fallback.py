"""Pure numpy implementations of the batch kernels.

Same signatures as the compiled ``_ext`` module; selected by
:mod:`quasilab.kernels` when the extension is missing or disabled.
"""
import math

import numpy as np

_CHUNK = 512


def pnorm_rows(X, p):
    A = np.abs(X)
    if p == 1.0:
        return A.sum(axis=1)
    # scaled by the row maximum so |x|^p neither underflows nor overflows
    big = A.max(axis=1) if A.shape[1] else np.zeros(A.shape[0])
    safe = np.where(big > 0, big, 1.0)
    B = A / safe[:, None]
    if p == 2.0:
        return big * np.sqrt(np.einsum("ij,ij->i", B, B))
    return big * np.power(np.power(B, p).sum(axis=1), 1.0 / p)


def _omega(t):
    a = np.abs(t)
    out = np.zeros_like(t)
    nz = a > 0
    out[nz] = t[nz] * np.log(a[nz])
    return out


def ribe_rows(X):
    return _omega(X.sum(axis=1)) - _omega(X).sum(axis=1)


def kp_rows(X, p, cap, nonhom):
    A = np.abs(X)
    nz = A > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if nonhom:
            L = -np.log(A)
        else:
            nrm = pnorm_rows(X, p)[:, None]
            L = np.log(nrm / A)
            # subnormal entries can overflow the ratio
            L = np.where(np.isinf(L), np.log(nrm) - np.log(A), L)
        T = np.clip(L, 0.0, cap)
        return np.where(nz, X * T, 0.0)


def lemma_w_grid(lo, step, count):
    """Scan the square grid ``lo + step*k`` (k < count) for the worst
    ratio |ω(s+t)-ω(s)-ω(t)| / (|s|+|t|).

    Returns (max_ratio, s_at, t_at, n_over) where n_over counts points
    exceeding log 2 + 1e-12.
    """
    g = lo + step * np.arange(count, dtype=float)
    wg = _omega(g)
    ag = np.abs(g)
    ceiling = math.log(2.0) + 1e-12
    best, bs, bt, over = 0.0, 0.0, 0.0, 0
    for i0 in range(0, count, _CHUNK):
        S = g[i0:i0 + _CHUNK, None]
        total = S + g[None, :]
        num = np.abs(_omega(total) - wg[i0:i0 + _CHUNK, None] - wg[None, :])
        den = ag[i0:i0 + _CHUNK, None] + ag[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num / den, 0.0)
        over += int(np.count_nonzero(r > ceiling))
        k = int(np.argmax(r))
        if r.flat[k] > best:
            i, j = divmod(k, count)
            best, bs, bt = float(r.flat[k]), float(g[i0 + i]), float(g[j])
    return best, bs, bt, over
