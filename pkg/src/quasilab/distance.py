"""Lower bounds on the distance from a homogeneous map to the linear maps.

Two certified mechanisms: witness combinations (a linear identity among
sample points that every linear map respects) and symmetrization over the
signed-permutation group, which reduces the problem to multiples of the
identity. ``best_linear_heuristic`` is a plain minimax solver and carries
no bound in either direction.
"""
from dataclasses import dataclass
import itertools
import math

import numpy as np

from .spaces import PNormedSpace

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_BATCH = 256


@dataclass(frozen=True)
class WitnessCertificate:
    points: np.ndarray
    coefficients: np.ndarray
    target: np.ndarray
    value: float
    power: float = 1.0  # exponent of the triangle inequality used

    def recompute(self, f):
        return _certificate_value(f, self.points, self.coefficients, self.target)[0]


def _eval_batched(f, P):
    return np.vstack([f.eval_rows(P[i:i + _BATCH]) for i in range(0, P.shape[0], _BATCH)])


def _certificate_value(f, P, c, X):
    FX = f.eval_rows(X[None, :])[0]
    FP = _eval_batched(f, P)
    num = f.codomain.norm(FX - c @ FP)
    nX = f.domain.norm(X)
    nP = f.domain.norm(P)
    q = min(f.codomain.p, 1.0)
    den = (nX ** q + np.sum((np.abs(c) * nP) ** q)) ** (1.0 / q)
    return (float(num / den) if den > 0 else 0.0), q


def witness_certificate(f, points, coefficients, target=None, atol=1e-9):
    """Certified lower bound on dist(f, L) from target = sum_j c_j x_j.

    For any linear l, f(X) - sum c_j f(x_j) = (f-l)(X) - sum c_j (f-l)(x_j),
    so ||f - l|| >= |f(X) - sum c_j f(x_j)| / (||X|| + sum |c_j| ||x_j||).
    A q-normed codomain (q < 1) uses the q-th power triangle inequality.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    c = np.asarray(coefficients, dtype=float).ravel()
    if P.shape[0] != c.size:
        raise ValueError(f"{P.shape[0]} points but {c.size} coefficients")
    if P.shape[1] != f.domain.dim:
        raise ValueError(f"points have dimension {P.shape[1]}, map domain is {f.domain}")
    combo = c @ P
    if target is None:
        X = combo
    else:
        X = np.asarray(target, dtype=float)
        err = float(np.max(np.abs(combo - X)))
        if err > atol:
            raise ValueError(f"sum c_j x_j misses the target by {err:.3g}")
    value, q = _certificate_value(f, P, c, X)
    return WitnessCertificate(points=P, coefficients=c, target=X, value=value, power=q)


def unit_sum_certificate(f):
    """The certificate e_1 + ... + e_n = s_n."""
    n = f.domain.dim
    return witness_certificate(f, np.eye(n), np.ones(n), np.ones(n))


def ribe_distance_lower_bound(n):
    """Closed form (1/2) log n of ``unit_sum_certificate(ribe_map(n))``."""
    if n < 1:
        raise ValueError("n must be positive")
    return 0.5 * math.log(n)


# --------------------------------------------------- signed permutations

def signed_permutations(n):
    """All (perm, signs) with u(x)[perm[i]] = signs[i] * x[i]; 2^n n! items."""
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1.0, -1.0), repeat=n):
            yield np.array(perm), np.array(signs)


def signed_permutation_matrix(perm, signs):
    n = len(perm)
    U = np.zeros((n, n))
    U[perm, np.arange(n)] = signs
    return U


def random_signed_permutation(rng, n):
    return rng.permutation(n), rng.choice([-1.0, 1.0], size=n)


def apply_signed_permutation(X, perm, signs):
    X = np.atleast_2d(X)
    out = np.empty_like(X)
    out[:, perm] = X * signs
    return out


def symmetrize_linear(M):
    """alpha with (1/|U|) sum_u u^{-1} M u = alpha * I, i.e. trace(M)/n."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"symmetrization needs a square matrix, got shape {M.shape}")
    return float(np.trace(M)) / M.shape[0]


def group_average(M):
    """Brute-force average of u^{-1} M u over every signed permutation."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    acc = np.zeros_like(M)
    count = 0
    for perm, signs in signed_permutations(n):
        U = signed_permutation_matrix(perm, signs)
        acc += U.T @ M @ U
        count += 1
    return acc / count


def commutes_with_signed_perms(f, trials=32, seed=0, rtol=1e-9):
    """Sampled check of f(u x) = u f(x) on `trials` random signed permutations."""
    n = f.domain.dim
    if f.codomain.dim != n:
        return False
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((4, n))
    X[1] = np.abs(X[1])
    X[2, n // 2:] = 0.0
    FX = f.eval_rows(X)
    scale = 1.0 + np.max(np.abs(FX))
    for _ in range(trials):
        perm, signs = random_signed_permutation(rng, n)
        lhs = f.eval_rows(apply_signed_permutation(X, perm, signs))
        rhs = apply_signed_permutation(FX, perm, signs)
        if np.max(np.abs(lhs - rhs)) > rtol * scale:
            return False
    return True


# ------------------------------------------------------ symmetric bound

@dataclass(frozen=True)
class SymmetricDistanceBound:
    value: float
    alpha: float
    certified: bool
    note: str = ""

    def __float__(self):
        return self.value


def _golden_min(h, a, b, tol, max_iter=400):
    """Golden-section search; returns (a, b) bracketing a minimizer with b-a <= tol."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = h(x1), h(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = h(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = h(x2)
        it += 1
    return a, b


def dist_lb_symmetric(f, witnesses, tol=1e-9, allow_heuristic=False, seed=0):
    """min_alpha max_j ||f(x_j) - alpha x_j|| / ||x_j||, minus `tol`.

    When f commutes with the signed permutations of a normed l_p^n, the
    group average of any linear l is trace(l)/n times the identity and is
    no farther from f than l, so this is a lower bound on dist(f, L).
    Each term is convex and 1-Lipschitz in alpha; golden-section narrows
    the minimizer to a bracket of width <= tol, which `tol` then covers.
    """
    W = np.atleast_2d(np.asarray(witnesses, dtype=float))
    if W.shape[0] == 0 or W.size == 0:
        raise ValueError("empty witness list")
    nW = f.domain.norm(W)
    if np.any(nW == 0):
        raise ValueError("witnesses must be nonzero")
    notes = []
    certified = True
    if not commutes_with_signed_perms(f, seed=seed):
        if not allow_heuristic:
            raise ValueError(f"{f.label} does not commute with signed permutations")
        certified = False
        notes.append("commutation check failed")
    if not f.codomain.is_normed:
        if not allow_heuristic:
            raise ValueError("the averaging argument needs a normed codomain (p >= 1)")
        certified = False
        notes.append("p < 1: averaging argument unavailable")
    FW = f.eval_rows(W)
    cod = f.codomain

    def h(alpha):
        return float(np.max(cod.norm(FW - alpha * W) / nW))

    bound = float(np.max(cod.norm(FW) / nW))
    if bound == 0:
        return SymmetricDistanceBound(0.0, 0.0, certified, "; ".join(notes))
    a, b = -2.0 * bound, 2.0 * bound
    if not cod.is_normed:
        grid = np.linspace(a, b, 2001)
        k = int(np.argmin([h(t) for t in grid]))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    a, b = _golden_min(h, a, b, tol)
    alpha = 0.5 * (a + b)
    value = max(0.0, h(alpha) - tol)
    return SymmetricDistanceBound(value, alpha, certified, "; ".join(notes))


# ------------------------------------------------------------- heuristic

def _minimax_objective(F, S, nS, M, q):
    R = F - S @ M.T
    return PNormedSpace(F.shape[1], q).norm(R) / nS, R


def best_linear_heuristic(f, samples, iters=500, seed=0, restarts=3, scalar_only=False):
    """Heuristic minimizer of max_j ||f(x_j) - l(x_j)|| / ||x_j|| over matrices l.

    Subgradient descent with diminishing steps, started from the
    least-squares fit and from random perturbations of it. With
    `scalar_only` the search runs over alpha * I. The returned objective is
    a sampled value, not a bound on dist(f, L).
    """
    S = np.atleast_2d(np.asarray(samples, dtype=float))
    if S.shape[0] == 0:
        raise ValueError("empty sample set")
    nS = f.domain.norm(S)
    keep = nS > 0
    S, nS = S[keep], nS[keep]
    F = f.eval_rows(S)
    q = f.codomain.p
    m, n = f.codomain.dim, f.domain.dim

    if scalar_only:
        if m != n:
            raise ValueError("scalar_only needs a square map")
        I = np.eye(n)

        def h(alpha):
            return float(np.max(_minimax_objective(F, S, nS, alpha * I, q)[0]))

        bound = float(np.max(PNormedSpace(m, q).norm(F) / nS))
        if bound == 0:
            return np.zeros((n, n)), 0.0
        a, b = _golden_min(h, -2 * bound, 2 * bound, 1e-12)
        alpha = 0.5 * (a + b)
        return alpha * I, h(alpha)

    rng = np.random.default_rng(seed)
    M0 = np.linalg.lstsq(S, F, rcond=None)[0].T
    best_M, best = M0, float(np.max(_minimax_objective(F, S, nS, M0, q)[0]))
    for r in range(max(restarts, 1)):
        M = M0 if r == 0 else M0 + rng.standard_normal(M0.shape) * (best + 1e-3) / math.sqrt(n)
        obj, R = _minimax_objective(F, S, nS, M, q)
        step0 = max(float(np.max(obj)), 1e-12)
        for k in range(iters):
            cur = float(np.max(obj))
            if cur < best:
                best, best_M = cur, M.copy()
            if cur <= 1e-15:
                break
            active = np.flatnonzero(obj >= cur * (1 - 1e-9))
            G = np.zeros_like(M)
            for j in active:
                rj = R[j]
                nr = PNormedSpace(m, q).norm(rj)
                if nr == 0:
                    continue
                if q == 1.0:
                    dr = np.sign(rj)
                else:
                    dr = np.sign(rj) * (np.abs(rj) / nr) ** (q - 1)
                G -= np.outer(dr, S[j]) / nS[j]
            G /= active.size
            gn = np.linalg.norm(G)
            if gn == 0:
                break
            M = M - (step0 / math.sqrt(k + 1)) * G / gn
            obj, R = _minimax_objective(F, S, nS, M, q)
        cur = float(np.max(obj))
        if cur < best:
            best, best_M = cur, M.copy()
    return best_M, best


# ------------------------------------------------------------ dispatcher

def best_dist_lower_bound(f, tol=1e-9, seed=0):
    """Largest certified lower bound on dist(f, L) available for f.

    Returns (value, mechanism).
    """
    n = f.domain.dim
    best, how = unit_sum_certificate(f).value, "witness(e_i->s_n)"
    if (n >= 2 and f.codomain.dim == n and f.codomain.is_normed
            and f.commutes_with_signed_perms):
        W = np.vstack([np.eye(n)[0], np.ones(n)])
        sym = dist_lb_symmetric(f, W, tol=tol, allow_heuristic=True, seed=seed)
        if sym.certified and sym.value > best:
            best, how = sym.value, "symmetric(e_1,s_n)"
    return best, how
