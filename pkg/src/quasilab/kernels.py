"""Batch kernel dispatch.

The compiled extension is used when it imports; set ``QUASILAB_PURE_PYTHON=1``
to force the numpy fallback. ``BACKEND`` names the active implementation.
"""
import os

import numpy as np

from . import _fallback

_ext = None
if os.environ.get("QUASILAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ext
    except ImportError:
        _ext = None

_impl = _ext if _ext is not None else _fallback
BACKEND = "cython" if _ext is not None else "numpy"


def _rows(X):
    return np.ascontiguousarray(X, dtype=float)


def pnorm_rows(X, p):
    return _impl.pnorm_rows(_rows(X), float(p))


def ribe_rows(X):
    return _impl.ribe_rows(_rows(X))


def kp_rows(X, p, cap=np.inf, nonhom=False):
    return _impl.kp_rows(_rows(X), float(p), float(cap), bool(nonhom))


def lemma_w_grid(lo, step, count):
    return _impl.lemma_w_grid(float(lo), float(step), int(count))


def implementations():
    """Both kernel modules keyed by name (``cython`` only if built)."""
    out = {"numpy": _fallback}
    if _ext is not None:
        out["cython"] = _ext
    else:
        try:
            from . import _ext as ext
            out["cython"] = ext
        except ImportError:
            pass
    return out
