"""Finite-dimensional sequence spaces l_p^n and their quasinorms.

Vectors are plain 1-D float arrays; batches are 2-D arrays with one vector
per row. Every random routine takes an integer seed.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels


def check_p(p):
    p = float(p)
    if not math.isfinite(p) or p <= 0:
        raise ValueError(f"exponent p must be a positive finite real, got {p!r}")
    return p


def as_vec(x):
    """Coerce to a finite float array (1-D vector or 2-D batch)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError(f"expected a vector or a batch of vectors, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def p_quasinorm(x, p):
    """(sum_k |x(k)|^p)^(1/p); row-wise for 2-D input."""
    p = check_p(p)
    arr = as_vec(x)
    if arr.ndim == 1:
        return float(kernels.pnorm_rows(arr[None, :], p)[0])
    return kernels.pnorm_rows(arr, p)


def aoki_rolewicz_exponent(delta):
    """Exponent p with 2 = (2*delta)^p, so a quasinorm with modulus delta
    is equivalent to a p-norm."""
    delta = float(delta)
    if not delta >= 1:
        raise ValueError(f"modulus of concavity must be >= 1, got {delta!r}")
    return math.log(2.0) / math.log(2.0 * delta)


def unit_vector(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def partial_sum(n, k):
    """s_k = e_1 + ... + e_k inside R^n."""
    s = np.zeros(n)
    s[:k] = 1.0
    return s


@dataclass(frozen=True)
class PNormedSpace:
    dim: int
    p: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", check_p(self.p))

    def concavity_modulus(self):
        return max(1.0, 2.0 ** (1.0 / self.p - 1.0))

    @property
    def is_normed(self):
        return self.p >= 1.0

    def norm(self, x):
        return p_quasinorm(x, self.p)

    def sample_sphere(self, rng, count):
        """Gaussian directions rescaled onto the l_p unit sphere."""
        X = rng.standard_normal((count, self.dim))
        return X / kernels.pnorm_rows(X, self.p)[:, None]

    def __str__(self):
        return f"l_{self.p:g}^{self.dim}"


def sphere_samples(space, count, seed):
    return space.sample_sphere(np.random.default_rng(seed), count)


def hom_map_norm_estimate(f, budget=1000, seed=0, witnesses=(), sampler=None,
                          return_argmax=False):
    """Lower estimate of ||f|| = sup_{||x||=1} ||f(x)||.

    Takes the maximum over `budget` sampled directions plus the designated
    `witnesses` (normalized here, zeros skipped). `sampler(rng, count)` may
    supply non-normalized points; the default is Gaussian on the l_p sphere.
    """
    dom = f.domain
    pts = [np.asarray(w, dtype=float) for w in witnesses]
    pts = [w / dom.norm(w) for w in pts if np.any(w != 0)]
    rng = np.random.default_rng(seed)
    if budget > 0:
        S = sampler(rng, budget) if sampler is not None else dom.sample_sphere(rng, budget)
        S = np.asarray(S, dtype=float)
        nrm = kernels.pnorm_rows(S, dom.p)
        keep = nrm > 0
        pts.extend(S[keep] / nrm[keep][:, None])
    if not pts:
        return (0.0, None) if return_argmax else 0.0
    X = np.vstack(pts)
    vals = f.codomain.norm(f.eval_rows(X))
    k = int(np.argmax(vals))
    best = float(vals[k])
    if return_argmax:
        return best, X[k]
    return best
