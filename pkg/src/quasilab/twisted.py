"""Twisted sums Y (+)_phi X with the quasinorm ||y - phi(x)|| + ||x||."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distance import best_dist_lower_bound
from .estimation import random_pairs, structured_pairs
from .maps import HomogeneousMap
from .spaces import PNormedSpace


@dataclass(frozen=True)
class TwistedSumElement:
    y: np.ndarray
    x: np.ndarray


@dataclass(frozen=True)
class TwistedSumSpace:
    X: PNormedSpace
    Y: PNormedSpace
    phi: HomogeneousMap

    def __post_init__(self):
        if self.phi.domain.dim != self.X.dim or self.phi.codomain.dim != self.Y.dim:
            raise ValueError("phi must map X into Y")
        if np.any(self.phi.eval_rows(np.zeros((1, self.X.dim))) != 0):
            raise ValueError("phi(0) must be 0")

    @classmethod
    def over(cls, phi):
        return cls(X=phi.domain, Y=phi.codomain, phi=phi)

    def _check(self, z):
        y, x = np.atleast_1d(np.asarray(z.y, float)), np.atleast_1d(np.asarray(z.x, float))
        if y.shape[-1] != self.Y.dim or x.shape[-1] != self.X.dim:
            raise ValueError(f"element of shape ({y.shape}, {x.shape}) does not fit {self}")
        return y, x

    def norm_rows(self, Yb, Xb):
        return self.Y.norm(Yb - self.phi.eval_rows(Xb)) + self.X.norm(Xb)

    def norm(self, z):
        y, x = self._check(z)
        return float(self.norm_rows(y[None, :], x[None, :])[0])

    def inclusion(self, y):
        y = np.atleast_1d(np.asarray(y, float))
        return self._wrap(y, np.zeros(self.X.dim))

    def quotient(self, z):
        # exactness of 0 -> Y -> Y+X -> X -> 0 forces (y, x) -> x
        return self._check(z)[1].copy()

    def section(self, x):
        x = np.atleast_1d(np.asarray(x, float))
        return self._wrap(self.phi.eval_rows(x[None, :])[0], x)

    def _wrap(self, y, x):
        z = TwistedSumElement(y=y, x=x)
        self._check(z)
        return z

    def __str__(self):
        return f"{self.Y} (+)_{self.phi.label} {self.X}"


def twisted_norm(z, space):
    return space.norm(z)


def inclusion(y, space):
    return space.inclusion(y)


def quotient(z, space):
    return space.quotient(z)


def section(x, space):
    return space.section(x)


@dataclass(frozen=True)
class ModulusReport:
    delta: float
    ceiling: Optional[float]
    witness: tuple
    samples: int
    seed: int


def quasinorm_modulus_report(space, budget=10000, seed=0):
    """Largest sampled ||z1+z2|| / (||z1|| + ||z2||) in the twisted sum.

    Samples sections (phi(x), x), perturbed sections and free pairs. The
    ceiling 1 + Q_ub[phi] is reported only when X and Y are normed.
    """
    phi, n = space.phi, space.X.dim
    rng = np.random.default_rng(seed)
    SX1, SX2 = structured_pairs(n)
    RX1, RX2 = random_pairs(n, budget, rng) if budget > 0 else (np.empty((0, n)),) * 2
    X1, X2 = np.vstack([SX1, RX1]), np.vstack([SX2, RX2])
    k = X1.shape[0]
    # y = phi(x) + eta*r, eta = 0 on structured rows and on a third of the rest
    eta = np.zeros((k, 2))
    r = rng.random((RX1.shape[0], 2))
    eta[SX1.shape[0]:] = np.where(r < 1 / 3, 0.0, 10.0 ** rng.uniform(-3, 1, size=r.shape))
    Y1 = phi.eval_rows(X1) + eta[:, :1] * rng.standard_normal((k, space.Y.dim))
    Y2 = phi.eval_rows(X2) + eta[:, 1:] * rng.standard_normal((k, space.Y.dim))
    num = space.norm_rows(Y1 + Y2, X1 + X2)
    den = space.norm_rows(Y1, X1) + space.norm_rows(Y2, X2)
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    i = int(np.argmax(ratio))
    ceiling = None
    if space.X.is_normed and space.Y.is_normed and phi.q_certified_upper is not None:
        ceiling = 1.0 + phi.q_certified_upper
    witness = (TwistedSumElement(Y1[i], X1[i]), TwistedSumElement(Y2[i], X2[i]))
    return ModulusReport(delta=float(ratio[i]), ceiling=ceiling, witness=witness,
                         samples=int(k), seed=int(seed))


def splitting_gap(space, n_grid):
    """Per n: best certified dist(phi|first n coordinates, L). Returns rows
    (n, dist_lb, mechanism)."""
    rows = []
    for n in n_grid:
        value, how = best_dist_lower_bound(space.phi.restrict(int(n)))
        rows.append((int(n), value, how))
    return rows
