"""Concrete homogeneous maps on l_p^n: Ribe's function and functional,
Kalton-Peck maps, homogenization and the quasilinearity defect."""
from dataclasses import dataclass, field, replace
import math
from typing import Callable, Optional

import numpy as np

from . import kernels
from .spaces import PNormedSpace, as_vec, check_p

LOG2 = math.log(2.0)
INV_E = math.exp(-1.0)


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True)
class LipschitzProfile:
    """A Lipschitz function theta vanishing on (-inf, 0].

    ``sup_norm`` is ``math.inf`` for unbounded profiles. When ``cap`` is set
    the profile is exactly ``min(max(t, 0), cap)`` and the compiled kernels
    are used.
    """
    theta: Callable
    lip_const: float
    sup_norm: float
    increasing: bool = True
    cap: Optional[float] = None
    name: str = "theta"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t > 0, self.theta(np.maximum(t, 0.0)), 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def bounded(self):
        return math.isfinite(self.sup_norm)

    def require_bounded(self):
        if not self.bounded:
            raise ValueError(f"profile {self.name} is unbounded; a finite sup norm is required")
        return self.sup_norm


def clamp_profile(cap):
    """theta(t) = min(max(t, 0), cap); cap = inf gives the identity profile."""
    cap = float(cap)
    if not cap > 0:
        raise ValueError("cap must be positive")
    name = "identity" if math.isinf(cap) else f"clamp[{cap:g}]"
    return LipschitzProfile(theta=lambda t: np.minimum(t, cap), lip_const=1.0,
                            sup_norm=cap, increasing=True, cap=cap, name=name)


def identity_profile():
    return clamp_profile(math.inf)


def theta_n(n):
    """The truncations theta_n(t) = min(t, n) on the positive axis."""
    return clamp_profile(n)


# -------------------------------------------------------------- scalar maps

def omega(t):
    """t log|t|, with omega(0) = 0."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, t * np.log(np.where(a > 0, a, 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def omega_theta(t, theta):
    """t * theta(-log|t|), zero at t = 0."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    with np.errstate(divide="ignore"):
        arg = -np.log(np.where(a > 0, a, 1.0))
    out = np.where(a > 0, t * theta(arg), 0.0)
    return float(out) if out.ndim == 0 else out


# -------------------------------------------------------- homogeneous maps

@dataclass(frozen=True)
class HomogeneousMap:
    """A homogeneous map between finite-dimensional p-normed spaces.

    ``func`` evaluates a batch: rows of an (B, domain.dim) array to rows of
    a (B, codomain.dim) array. Functionals have ``scalar=True`` and a
    one-dimensional codomain; calling them on a single vector gives a float.
    """
    domain: PNormedSpace
    codomain: PNormedSpace
    func: Callable
    q_certified_upper: Optional[float] = None
    commutes_with_signed_perms: bool = False
    scalar: bool = False
    label: str = "f"
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    restrictor: Optional[Callable] = None
    matrix: Optional[np.ndarray] = None

    def eval_rows(self, X):
        X = np.asarray(X, dtype=float)
        out = np.asarray(self.func(X), dtype=float)
        return out.reshape(X.shape[0], self.codomain.dim)

    def __call__(self, x):
        x = as_vec(x)
        if x.ndim == 2:
            return self.eval_rows(x)
        out = self.eval_rows(x[None, :])[0]
        return float(out[0]) if self.scalar else out

    def scaled(self, c, label=None):
        c = float(c)
        q = None if self.q_certified_upper is None else abs(c) * self.q_certified_upper
        restrict = None
        if self.restrictor is not None:
            restrict = lambda k: self.restrictor(k).scaled(c)
        mat = None if self.matrix is None else c * self.matrix
        return replace(self, func=lambda X: c * self.eval_rows(X), q_certified_upper=q,
                       label=label or f"{c:g}*{self.label}", restrictor=restrict, matrix=mat,
                       params={**self.params, "scale": c * self.params.get("scale", 1.0)})

    def minus_linear(self, M, label=None):
        """f - M, where M is a (codomain.dim, domain.dim) matrix."""
        M = np.asarray(M, dtype=float).reshape(self.codomain.dim, self.domain.dim)
        mat = None if self.matrix is None else self.matrix - M
        return replace(self, func=lambda X: self.eval_rows(X) - np.asarray(X) @ M.T,
                       commutes_with_signed_perms=False, restrictor=None, matrix=mat,
                       label=label or f"{self.label}-linear")

    def restrict(self, k):
        """Restriction to the first k coordinates of the domain."""
        if not 1 <= k <= self.domain.dim:
            raise ValueError(f"cannot restrict a map on {self.domain} to {k} coordinates")
        if self.restrictor is not None:
            return self.restrictor(k)
        n = self.domain.dim

        def func(X):
            X = np.asarray(X, dtype=float)
            pad = np.zeros((X.shape[0], n))
            pad[:, :k] = X
            return self.eval_rows(pad)

        mat = None if self.matrix is None else self.matrix[:, :k]
        return replace(self, domain=PNormedSpace(k, self.domain.p), func=func,
                       commutes_with_signed_perms=False, restrictor=None, matrix=mat,
                       label=f"{self.label}|{k}")


def ribe_rows(X):
    return kernels.ribe_rows(X)


def ribe(x):
    """Ribe's functional via omega(s(x)) - sum_k omega(x(k)), s(x) = sum_k x(k)."""
    x = as_vec(x)
    if x.ndim == 2:
        return kernels.ribe_rows(x)
    return float(kernels.ribe_rows(x[None, :])[0])


def ribe_map(n):
    return HomogeneousMap(domain=PNormedSpace(n, 1.0), codomain=PNormedSpace(1, 1.0),
                          func=kernels.ribe_rows, q_certified_upper=2 * LOG2, scalar=True,
                          label=f"ribe[{n}]", kind="ribe", params={"n": n},
                          restrictor=ribe_map)


def kp_constant(p):
    """10^(1/p)/e, the quasilinearity factor multiplying L(theta)."""
    return 10.0 ** (1.0 / check_p(p)) * INV_E


def _kp_generic(X, theta, p, nonhom):
    A = np.abs(X)
    nz = A > 0
    safe = np.where(nz, A, 1.0)
    if nonhom:
        arg = -np.log(safe)
    else:
        nrm = kernels.pnorm_rows(X, p)[:, None]
        with np.errstate(over="ignore"):
            arg = np.log(nrm / safe)
        arg = np.where(np.isinf(arg), np.log(np.where(nrm > 0, nrm, 1.0)) - np.log(safe), arg)
    return np.where(nz, X * theta(arg), 0.0)


def kp_rows(X, theta, p, nonhom=False):
    X = np.asarray(X, dtype=float)
    if theta.cap is not None:
        return kernels.kp_rows(X, p, theta.cap, nonhom)
    return _kp_generic(X, theta, p, nonhom)


def kalton_peck(x, theta, p):
    """x * theta(log(||x||_p / |x|)) coordinatewise, 0 where x(k) = 0."""
    p = check_p(p)
    x = as_vec(x)
    if x.ndim == 2:
        return kp_rows(x, theta, p)
    return kp_rows(x[None, :], theta, p)[0]


def kalton_peck_nonhom(x, theta):
    """x * theta(-log|x|) coordinatewise; omega_theta applied to each entry."""
    x = as_vec(x)
    if x.ndim == 2:
        return kp_rows(x, theta, 1.0, nonhom=True)
    return kp_rows(x[None, :], theta, 1.0, nonhom=True)[0]


def kalton_peck_map(n, theta, p, scale=1.0):
    p = check_p(p)
    sp = PNormedSpace(n, p)

    def func(X):
        out = kp_rows(X, theta, p)
        return out if scale == 1.0 else scale * out

    return HomogeneousMap(domain=sp, codomain=sp, func=func,
                          q_certified_upper=abs(scale) * kp_constant(p) * theta.lip_const,
                          commutes_with_signed_perms=True,
                          label=f"kp[{theta.name},p={p:g},n={n}]", kind="kalton_peck",
                          params={"n": n, "p": p, "theta": theta, "scale": scale},
                          restrictor=lambda k: kalton_peck_map(k, theta, p, scale))


def linear_map(M, p_in=1.0, p_out=None, scalar=False, label="linear"):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    m, n = M.shape
    p_out = p_in if p_out is None else p_out
    commutes = m == n and np.allclose(M, M[0, 0] * np.eye(n), rtol=0, atol=0)
    return HomogeneousMap(domain=PNormedSpace(n, p_in), codomain=PNormedSpace(m, p_out),
                          func=lambda X: np.asarray(X) @ M.T, q_certified_upper=0.0,
                          commutes_with_signed_perms=bool(commutes), scalar=scalar and m == 1,
                          label=label, kind="linear", matrix=M)


def identity_map(n, p):
    return linear_map(np.eye(n), p, label=f"id[{n}]")


# ----------------------------------------------------------- homogenization

def homogenize(u, domain, codomain=None, scalar=False):
    """The homogeneous map x -> (||x||/2)(u(x/||x||) - u(-x/||x||)), 0 at 0.

    `u` acts on single vectors (1-D arrays) and may return a scalar.
    """
    codomain = codomain or domain

    def func(X):
        X = np.asarray(X, dtype=float)
        out = np.zeros((X.shape[0], codomain.dim))
        nrm = domain.norm(X)
        for i in np.flatnonzero(nrm > 0):
            x = X[i] / nrm[i]
            diff = np.atleast_1d(np.asarray(u(x), dtype=float) - np.asarray(u(-x), dtype=float))
            out[i] = 0.5 * nrm[i] * diff
        return out

    return HomogeneousMap(domain=domain, codomain=codomain, func=func, scalar=scalar,
                          label="homogenized", kind="homogenized")


# ------------------------------------------------------- quasilinear defect

def defect_rows(f, X, Y):
    """Row-wise ||f(x+y)-f(x)-f(y)|| / (||x||+||y||); rows with x=y=0 give 0."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    d = f.eval_rows(X + Y) - f.eval_rows(X) - f.eval_rows(Y)
    num = f.codomain.norm(d)
    den = f.domain.norm(X) + f.domain.norm(Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def quasilinearity_defect(f, x, y, p=1.0):
    """||f(x+y)-f(x)-f(y)|| / (||x||+||y||) for one pair.

    `f` is a HomogeneousMap, or any callable on vectors/scalars, in which
    case both norms are l_p with the given `p` (|.| for scalars).
    """
    x = as_vec(np.atleast_1d(np.asarray(x, dtype=float)))
    y = as_vec(np.atleast_1d(np.asarray(y, dtype=float)))
    if isinstance(f, HomogeneousMap):
        nx, ny = f.domain.norm(x), f.domain.norm(y)
        norm_out = f.codomain.norm
        fx, fy, fxy = (np.atleast_1d(f(v)) for v in (x, y, x + y))
    else:
        sp = PNormedSpace(max(x.size, 1), p)
        nx, ny = sp.norm(x), sp.norm(y)
        norm_out = lambda v: PNormedSpace(v.size, p).norm(v)
        fx, fy, fxy = (np.atleast_1d(np.asarray(f(v if v.size > 1 else v[0]), dtype=float))
                       for v in (x, y, x + y))
    if nx + ny == 0:
        raise ValueError("defect is undefined at x = y = 0")
    return float(norm_out(fxy - fx - fy) / (nx + ny))
