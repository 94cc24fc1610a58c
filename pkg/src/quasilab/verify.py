"""Sampled invariant checks across all modules, used by ``quasilab verify``.

Each check takes (rng, budget, tol) and returns (ok, witness-text).
``tol`` holds ``abs``, ``rel`` and ``exact`` tolerances.
"""
from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import distance as dist
from .estimation import estimate_Q
from .maps import (INV_E, LOG2, clamp_profile, defect_rows, identity_profile,
                   kalton_peck, kalton_peck_map, kalton_peck_nonhom, kp_constant, omega,
                   omega_theta, ribe, ribe_map)
from .spaces import PNormedSpace, p_quasinorm
from .twisted import TwistedSumSpace, quasinorm_modulus_report
from . import kernels

DEFAULT_TOL = {"abs": 1e-9, "rel": 1e-9, "exact": 1e-12}


@dataclass(frozen=True)
class Check:
    module: str
    name: str
    run: Callable


CHECKS = []


def check(module, name):
    def deco(fn):
        CHECKS.append(Check(module, name, fn))
        return fn
    return deco


def _vecs(rng, count, n):
    X = rng.standard_normal((count, n))
    X[: count // 4] *= rng.random((count // 4, n)) < 0.3
    X[np.all(X == 0, axis=1), 0] = 1.0
    return X * np.exp(rng.uniform(-3, 3, size=(count, 1)))


# ------------------------------------------------------------------ spaces

@check("spaces", "p-triangle")
def _p_triangle(rng, budget, tol):
    for p in (0.3, 0.5, 1.0, 2.0, 3.0):
        X, Y = _vecs(rng, budget, 8), _vecs(rng, budget, 8)
        r = min(p, 1.0)
        lhs = p_quasinorm(X + Y, p) ** r
        rhs = p_quasinorm(X, p) ** r + p_quasinorm(Y, p) ** r
        bad = np.flatnonzero(lhs > rhs * (1 + tol["exact"]))
        if bad.size:
            return False, f"p={p} x={X[bad[0]]} y={Y[bad[0]]}"
    return True, ""


@check("spaces", "homogeneity")
def _homogeneity(rng, budget, tol):
    for p in (0.5, 1.0, 2.0):
        X = _vecs(rng, budget, 8)
        t = rng.uniform(-10, 10, size=budget)
        lhs = p_quasinorm(t[:, None] * X, p)
        rhs = np.abs(t) * p_quasinorm(X, p)
        err = np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)
        k = int(np.argmax(err))
        if err[k] > tol["rel"]:
            return False, f"p={p} relative error {err[k]:.3g} at t={t[k]:.6g}"
    return True, ""


@check("spaces", "concavity-modulus")
def _modulus(rng, budget, tol):
    for p in (0.3, 0.5, 1.0, 2.0):
        sp = PNormedSpace(6, p)
        X, Y = _vecs(rng, budget, 6), _vecs(rng, budget, 6)
        ratio = sp.norm(X + Y) / (sp.norm(X) + sp.norm(Y))
        if ratio.max() > sp.concavity_modulus() * (1 + tol["exact"]):
            return False, f"p={p} ratio {ratio.max():.15g}"
    return True, ""


# -------------------------------------------------------------------- maps

@check("maps", "ribe-omega-identity")
def _ribe_identity(rng, budget, tol):
    X = _vecs(rng, budget, 7)
    s = X.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(X != 0, X * np.log(np.abs(s)[:, None] / np.abs(X)), 0.0)
    direct = terms.sum(axis=1)
    err = np.abs(ribe(X) - direct)
    k = int(np.argmax(err))
    ok = err[k] <= tol["abs"] * max(1.0, np.abs(X[k]).sum())
    return ok, "" if ok else f"x={X[k]} error {err[k]:.3g}"


@check("maps", "lemma-w")
def _lemma_w(rng, budget, tol):
    count = 401
    best, s, t, over = kernels.lemma_w_grid(-2.0, 0.01, count)
    ok = over == 0 and abs(best - LOG2) <= 1e-3
    return ok, "" if ok else f"max {best!r} at ({s}, {t}), {over} points above log 2"


@check("maps", "omega-theta-bound")
def _omega_theta(rng, budget, tol):
    for theta in (clamp_profile(1.0), clamp_profile(3.0), identity_profile()):
        s = rng.standard_normal(budget) * np.exp(rng.uniform(-5, 3, budget))
        t = rng.standard_normal(budget) * np.exp(rng.uniform(-5, 3, budget))
        lhs = np.abs(omega_theta(t + s, theta) - omega_theta(t, theta) - omega_theta(s, theta))
        rhs = 2 * theta.lip_const * INV_E * (np.abs(t) + np.abs(s))
        k = int(np.argmax(lhs - rhs))
        if lhs[k] > rhs[k] * (1 + tol["exact"]) + tol["exact"]:
            return False, f"{theta.name} s={s[k]!r} t={t[k]!r}"
    return True, ""


@check("maps", "pointwise-nonhom-bound")
def _phi0(rng, budget, tol):
    theta = clamp_profile(2.0)
    X, Y = _vecs(rng, budget, 5), _vecs(rng, budget, 5)
    lhs = np.abs(kalton_peck_nonhom(X + Y, theta) - kalton_peck_nonhom(X, theta)
                 - kalton_peck_nonhom(Y, theta))
    rhs = 2 * INV_E * (np.abs(X) + np.abs(Y))
    ok = bool(np.all(lhs <= rhs * (1 + tol["exact"]) + tol["exact"]))
    return ok, ""


@check("maps", "hom-vs-nonhom")
def _estimate(rng, budget, tol):
    for p in (0.5, 1.0, 2.0):
        theta = clamp_profile(2.0)
        X = _vecs(rng, budget, 6)
        nx = p_quasinorm(X, p)
        gap = p_quasinorm(kalton_peck(X, theta, p) - kalton_peck_nonhom(X, theta), p)
        bound = nx * np.abs(np.log(nx))
        if np.any(gap > bound * (1 + tol["exact"]) + tol["exact"]):
            return False, f"p={p}"
        inside = nx <= 1
        if np.any(gap[inside] > INV_E * (1 + tol["exact"])):
            return False, f"p={p} unit-ball bound"
    return True, ""


@check("maps", "homogeneity")
def _map_homogeneity(rng, budget, tol):
    X = _vecs(rng, budget, 6)
    t = rng.uniform(-10, 10, size=(budget, 1))
    for f in (ribe_map(6), kalton_peck_map(6, clamp_profile(2.0), 0.7)):
        lhs, rhs = f.eval_rows(t * X), t * f.eval_rows(X)
        scale = np.maximum(np.abs(rhs).max(axis=1), np.abs(t[:, 0]) * np.abs(X).max(axis=1))
        err = np.abs(lhs - rhs).max(axis=1) / scale
        if err.max() > tol["rel"]:
            return False, f"{f.label} relative error {err.max():.3g}"
    return True, ""


@check("maps", "kp-commutes")
def _commutes(rng, budget, tol):
    f = kalton_peck_map(7, clamp_profile(1.5), 1.5)
    X = _vecs(rng, 64, 7)
    for _ in range(32):
        perm, signs = dist.random_signed_permutation(rng, 7)
        lhs = f.eval_rows(dist.apply_signed_permutation(X, perm, signs))
        rhs = dist.apply_signed_permutation(f.eval_rows(X), perm, signs)
        if np.max(np.abs(lhs - rhs)) > tol["exact"] * (1 + np.abs(rhs).max()):
            return False, f"perm={perm} signs={signs}"
    return True, ""


@check("maps", "sampled-defects-certified")
def _defect_caps(rng, budget, tol):
    X, Y = _vecs(rng, budget, 6), _vecs(rng, budget, 6)
    if defect_rows(ribe_map(6), X, Y).max() > 2 * LOG2 * (1 + tol["exact"]):
        return False, "ribe"
    for p in (0.5, 1.0, 2.0):
        f = kalton_peck_map(6, clamp_profile(1.0), p)
        if defect_rows(f, X, Y).max() > kp_constant(p) * (1 + tol["exact"]):
            return False, f"kalton-peck p={p}"
    return True, ""


# -------------------------------------------------------------- estimation

@check("estimation", "soundness")
def _soundness(rng, budget, tol):
    for i in range(6):
        n = int(rng.integers(2, 9))
        p = float(rng.choice([0.5, 1.0, 2.0]))
        f = ribe_map(n) if i % 2 == 0 else kalton_peck_map(n, clamp_profile(2.0), p)
        q = estimate_Q(f, budget=max(budget // 4, 1), seed=i, check=False)
        if q.sampled_lower > q.certified_upper * (1 + tol["exact"]):
            return False, f"{f.label}: {q.sampled_lower} > {q.certified_upper}"
    return True, ""


@check("estimation", "monotone-in-budget")
def _monotone(rng, budget, tol):
    f = kalton_peck_map(5, clamp_profile(1.0), 1.0)
    a = estimate_Q(f, budget=200, seed=3).sampled_lower
    b = estimate_Q(f, budget=1500, seed=3).sampled_lower
    return b >= a, f"{a} then {b}"


@check("estimation", "k0-ribe-increasing")
def _k0(rng, budget, tol):
    from .estimation import k0_lower_bound
    vals = [k0_lower_bound(ribe_map(n), dist.ribe_distance_lower_bound(n))
            for n in (10, 100, 1000, 10000)]
    return all(b > a for a, b in zip(vals, vals[1:])), f"{vals}"


# ---------------------------------------------------------------- distance

@check("distance", "certificate-soundness")
def _cert_sound(rng, budget, tol):
    n = 6
    for f in (ribe_map(n), kalton_peck_map(n, clamp_profile(2.0), 1.0)):
        cert = dist.unit_sum_certificate(f)
        for _ in range(100):
            M = rng.standard_normal((f.codomain.dim, n))
            g = f.minus_linear(M)
            P = np.vstack([cert.points, cert.target])
            val = np.max(f.codomain.norm(g.eval_rows(P)) / f.domain.norm(P))
            if val < cert.value * (1 - tol["exact"]):
                return False, f"{f.label}: {val} < {cert.value}"
    return True, ""


@check("distance", "group-average-oracle")
def _group(rng, budget, tol):
    for n in (2, 3):
        M = rng.standard_normal((n, n))
        avg = dist.group_average(M)
        if np.max(np.abs(avg - dist.symmetrize_linear(M) * np.eye(n))) > tol["exact"]:
            return False, f"n={n}"
    return True, ""


@check("distance", "averaging-contraction")
def _contract(rng, budget, tol):
    n = 3
    f = kalton_peck_map(n, clamp_profile(2.0), 1.0)
    group = [dist.signed_permutation_matrix(*g) for g in dist.signed_permutations(n)]
    for _ in range(20):
        M = rng.standard_normal((n, n))
        alpha = dist.symmetrize_linear(M)
        x = rng.standard_normal(n)
        lhs = p_quasinorm(f(x) - alpha * x, 1.0) / p_quasinorm(x, 1.0)
        rhs = max(p_quasinorm(f(U @ x) - M @ (U @ x), 1.0) / p_quasinorm(U @ x, 1.0)
                  for U in group)
        if lhs > rhs * (1 + tol["exact"]) + tol["exact"]:
            return False, f"x={x}"
    return True, ""


@check("distance", "symmetric-monotone")
def _sym_mono(rng, budget, tol):
    n = 16
    f = kalton_peck_map(n, clamp_profile(2.0), 1.0)
    W = [np.eye(n)[0], np.ones(n), np.r_[np.ones(4), np.zeros(n - 4)], rng.standard_normal(n)]
    vals = [dist.dist_lb_symmetric(f, W[:k]).value for k in range(1, len(W) + 1)]
    ok = all(b >= a - 2e-9 for a, b in zip(vals, vals[1:]))
    return ok, f"{vals}"


# ----------------------------------------------------------------- twisted

@check("twisted", "isometries-and-exactness")
def _twisted(rng, budget, tol):
    n = 8
    space = TwistedSumSpace.over(ribe_map(n))
    for _ in range(50):
        y = rng.standard_normal(1)
        x = rng.standard_normal(n)
        if abs(space.norm(space.inclusion(y)) - abs(y[0])) > tol["exact"]:
            return False, "inclusion"
        if abs(space.norm(space.section(x)) - p_quasinorm(x, 1.0)) > tol["exact"] * (1 + abs(x).sum()):
            return False, "section"
        if not np.array_equal(space.quotient(space.section(x)), x):
            return False, "quotient o section"
        if np.any(space.quotient(space.inclusion(y)) != 0):
            return False, "quotient o inclusion"
        from .twisted import TwistedSumElement
        z = TwistedSumElement(rng.standard_normal(1), x)
        if p_quasinorm(space.quotient(z), 1.0) > space.norm(z) * (1 + tol["exact"]):
            return False, "quotient contraction"
    return True, ""


@check("twisted", "modulus-ceiling")
def _ceiling(rng, budget, tol):
    rep = quasinorm_modulus_report(TwistedSumSpace.over(ribe_map(8)), budget, seed=int(rng.integers(1 << 30)))
    return rep.delta <= rep.ceiling * (1 + tol["exact"]), f"delta {rep.delta}"


# ------------------------------------------------------------- asymptotics

@check("asymptotics", "ribe-family")
def _ribe_fam(rng, budget, tol):
    grid = [16, 64, 256]
    fam = asy.ribe_family(grid)
    qs = [fam.builder(n).q_certified_upper for n in grid]
    ds = [dist.unit_sum_certificate(fam.builder(n)).value for n in grid]
    ok = all(b < a for a, b in zip(qs, qs[1:])) and min(ds) >= 0.5 - tol["abs"]
    return ok, f"q_ub={qs} dist={ds}"


@check("asymptotics", "kp-family")
def _kp_fam(rng, budget, tol):
    grid = [16, 64, 256]
    fam = asy.kp_family(grid, 1.0)
    qs = [fam.builder(n).q_certified_upper for n in grid]
    from .spaces import hom_map_norm_estimate
    norms = [hom_map_norm_estimate(fam.builder(n), budget // 4, 0) for n in grid]
    ok = all(b < a for a, b in zip(qs, qs[1:])) and max(norms) <= 1 + tol["abs"]
    return ok, f"q_ub={qs} norms={norms}"


@check("asymptotics", "leibniz-oracle")
def _leibniz(rng, budget, tol):
    for n in (16, 256):
        for _ in range(budget // 10):
            x, y = rng.standard_normal(n), rng.standard_normal(n)
            d = asy.leibniz_defect("homogeneous", x, y, n, 1.0)
            if abs(d.measured - d.closed_form) > tol["rel"] * d.closed_form:
                return False, f"n={n}: {d}"
            v = asy.leibniz_defect("variant", x, y, n, 1.0)
            if v.measured > tol["exact"]:
                return False, f"variant n={n}: {v.measured}"
    return True, ""


@check("asymptotics", "derivation-gap")
def _dgap(rng, budget, tol):
    n = 32
    for p in (1.0, 2.0):
        for _ in range(100):
            x = rng.standard_normal(n) * math.exp(rng.uniform(-3, 3))
            gap = p_quasinorm(asy.kp_derivation(x, n, p) - asy.kp_derivation0(x, n), p)
            nx = p_quasinorm(x, p)
            if gap > nx * abs(math.log(nx)) / math.log(n) * (1 + tol["exact"]) + tol["exact"]:
                return False, f"p={p} x-norm {nx}"
    return True, ""


@check("asymptotics", "truncation-normalized")
def _trunc(rng, budget, tol):
    fam = asy.truncation_family(ribe_map(64), [8, 16, 32], budget=budget // 4, seed=1)
    from .spaces import hom_map_norm_estimate
    for n in fam.index_grid:
        nrm = hom_map_norm_estimate(fam.builder(n), budget // 4, 1, witnesses=fam.meta["witnesses"][n])
        if abs(nrm - 1) > 1e-6:
            return False, f"n={n} norm {nrm}"
    return True, ""


def run_checks(seed=0, budget=2000, tol=None):
    """Run every check; returns a list of (check, ok, detail)."""
    tol = {**DEFAULT_TOL, **(tol or {})}
    results = []
    for i, chk in enumerate(CHECKS):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        try:
            ok, detail = chk.run(rng, budget, tol)
        except Exception as exc:  # a crash is a failed invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((chk, bool(ok), detail))
    return results
