"""Indexed families n -> f_n on l_p^n, their finite-n accessibility
classification, the truncation construction and the Kalton-Peck derivation.
"""
from dataclasses import dataclass, field
import math
from typing import Callable, Optional

import numpy as np

from .distance import best_dist_lower_bound, best_linear_heuristic
from .estimation import estimate_Q
from .maps import (HomogeneousMap, clamp_profile, identity_map, identity_profile,
                   kalton_peck, kalton_peck_map, omega, ribe_map)
from .spaces import as_vec, check_p, hom_map_norm_estimate, p_quasinorm, sphere_samples

ULTRAPRODUCT = "ultraproduct-of-operators"
CANDIDATE = "accessible-non-ultraproduct-candidate"
NOT_ACCESSIBLE = "not-accessible"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Thresholds:
    tau_q: float = 0.05
    tau_d: float = 0.05
    tau_sep: float = 0.25
    # q is also treated as vanishing when it decreases like (log n)^-beta, beta >= decay_min
    decay_min: float = 0.5
    # "bounded" norms stay below norm_growth times the first row
    norm_growth: float = 1.5


@dataclass
class MapFamily:
    index_grid: list
    builder: Callable[[int], HomogeneousMap]
    label: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index_grid = sorted(int(n) for n in self.index_grid)


@dataclass(frozen=True)
class FamilyRow:
    n: int
    norm_est: float
    q_lb: float
    q_ub: Optional[float]
    dist_lb: float
    dist_mechanism: str
    dist_heuristic: Optional[float] = None
    notes: str = ""


@dataclass(frozen=True)
class AccessibilityReport:
    label: str
    rows: list
    classification: str
    seed: int
    thresholds: Thresholds
    reason: str = ""


# -------------------------------------------------------------- families

def _check_grid(n_grid, least):
    grid = [int(n) for n in n_grid]
    bad = [n for n in grid if n < least]
    if bad:
        raise ValueError(f"indices must be >= {least}, got {bad}")
    return grid


def ribe_family(n_grid):
    """(log n)^-1 * Ribe's functional on l_1^n."""
    grid = _check_grid(n_grid, 2)
    return MapFamily(grid, lambda n: ribe_map(n).scaled(1 / math.log(n), label=f"ribe[{n}]/log n"),
                     "ribe")


def kp_family(n_grid, p=1.0, cap="log"):
    """Normalized Kalton-Peck maps x * theta_n(log(||x||/|x|)) / ||theta_n||_inf.

    ``cap="log"``: theta_n = min(t, log(n)/p), the largest level the profile
    argument reaches on l_p^n (at n^{-1/p} s_n). ``cap="index"``: theta_n =
    min(t, n) divided by n; on l_p^n its norm is at most log(n)/(p n).
    """
    p = check_p(p)
    if cap == "log":
        grid = _check_grid(n_grid, 2)
        level = lambda n: math.log(n) / p
    elif cap == "index":
        grid = _check_grid(n_grid, 1)
        level = float
    else:
        raise ValueError(f"unknown cap {cap!r}")

    def build(n):
        c = level(n)
        return kalton_peck_map(n, clamp_profile(c), p, scale=1.0 / c)

    return MapFamily(grid, build, f"kp[p={p:g},cap={cap}]", {"p": p, "cap": cap})


def kp_unscaled_family(n_grid, p=1.0):
    p = check_p(p)
    grid = _check_grid(n_grid, 1)
    return MapFamily(grid, lambda n: kalton_peck_map(n, identity_profile(), p),
                     f"kp-unscaled[p={p:g}]", {"p": p})


def linear_family(n_grid, p=1.0):
    p = check_p(p)
    grid = _check_grid(n_grid, 1)
    return MapFamily(grid, lambda n: identity_map(n, p), f"identity[p={p:g}]", {"p": p})


def _structured_witnesses(n, p):
    e1 = np.zeros(n)
    e1[0] = 1.0
    ws = [e1, np.full(n, n ** (-1.0 / p))]
    for k in (2, n // 2):
        if 1 < k < n:
            ws.append(np.r_[np.ones(k), np.zeros(n - k)])
    return ws


def truncation_family(phi, n_grid, budget=1000, seed=0, heuristic_iters=300):
    """phi_n = (phi|E_n - l_n) / d_n on the first-n-coordinates subspaces.

    phi is first divided by its certified Q bound. l_n comes from
    ``best_linear_heuristic`` and d_n is the sampled norm of phi|E_n - l_n,
    so Q[phi_n] <= 1/d_n. The maps are built eagerly; per-n data lands in
    ``meta``.
    """
    q = phi.q_certified_upper
    if q is None:
        raise ValueError("truncation needs a certified quasilinearity bound")
    base = phi if q <= 0 else phi.scaled(1.0 / q, label=f"{phi.label}/Q")
    grid = _check_grid(n_grid, 1)
    maps, d, witnesses = {}, {}, {}
    for n in grid:
        f = base.restrict(n)
        ws = np.vstack([np.eye(n), np.ones((1, n))])
        samples = np.vstack([ws, sphere_samples(f.domain, budget, seed)])
        square_sym = (f.commutes_with_signed_perms and f.codomain.dim == n
                      and f.codomain.is_normed)
        M, _ = best_linear_heuristic(f, samples, iters=heuristic_iters, seed=seed,
                                     scalar_only=square_sym)
        g = f.minus_linear(M)
        dn = hom_map_norm_estimate(g, budget, seed, witnesses=ws)
        if dn <= 1e-9:
            raise ValueError(f"phi is linear on E_{n} (d_n = {dn:.3g}); truncation is undefined")
        fn = g.scaled(1.0 / dn, label=f"trunc[{phi.label}]_{n}")
        maps[n], d[n], witnesses[n] = fn, dn, ws
    meta = {"d": d, "q_bound": {n: 1.0 / d[n] for n in grid}, "witnesses": witnesses,
            "seed": seed, "budget": budget}
    return MapFamily(grid, maps.__getitem__, f"truncation:{phi.kind}", meta)


# ------------------------------------------------------------ classifier

def _vanishing(values, grid, t):
    v = np.asarray(values, dtype=float)
    if v[-1] < t.tau_q:
        return True
    if np.any(v <= 0) or np.any(np.diff(v) > 1e-12 * v[:-1]):
        return False
    ll = np.log(np.log(np.asarray(grid, dtype=float)))
    if np.ptp(ll) == 0:
        return False
    slope = np.polyfit(ll, np.log(v), 1)[0]
    return -slope >= t.decay_min


def _norm_diverges(norms):
    """Superlinear growth in rank: increasing increments and a doubling."""
    v = np.asarray(norms, dtype=float)
    inc = np.diff(v)
    if np.any(inc <= 0) or inc.size < 2:
        return False
    return bool(np.all(np.diff(inc) > 0) and v[-1] > 2 * v[0])


def classify(rows, grid=None, thresholds=None):
    """Finite-grid verdict from report rows; returns (classification, reason)."""
    t = thresholds or Thresholds()
    grid = grid or [r.n for r in rows]
    q_lb = [r.q_lb for r in rows]
    norms = [r.norm_est for r in rows]
    last = rows[-1]
    if not _vanishing(q_lb, grid, t):
        return NOT_ACCESSIBLE, "sampled Q does not vanish"
    if _norm_diverges(norms):
        return NOT_ACCESSIBLE, "norms diverge"
    if last.dist_lb < t.tau_d:
        if last.dist_heuristic is not None and last.dist_heuristic < t.tau_d:
            return ULTRAPRODUCT, "distance to linear maps vanishes (heuristic l_n)"
        return INCONCLUSIVE, "no linear approximant found for small dist_lb"
    q_ub = [r.q_ub for r in rows]
    bounded = norms[-1] <= t.norm_growth * norms[0] + 1e-12
    if (all(q is not None for q in q_ub) and _vanishing(q_ub, grid, t) and bounded
            and all(r.dist_lb >= t.tau_sep for r in rows)):
        return CANDIDATE, "certified Q -> 0, bounded norms, dist_lb >= tau_sep"
    return INCONCLUSIVE, "no rule applies"


def _heuristic_distance(f, budget, seed):
    n, m = f.domain.dim, f.codomain.dim
    samples = np.vstack(_structured_witnesses(n, f.domain.p) +
                        [sphere_samples(f.domain, max(budget, 64), seed)])
    if f.commutes_with_signed_perms and m == n and f.codomain.is_normed:
        M, _ = best_linear_heuristic(f, samples, scalar_only=True)
    elif m * n <= 64 * 64:
        M, _ = best_linear_heuristic(f, samples, iters=200, seed=seed)
    else:
        return None
    return hom_map_norm_estimate(f.minus_linear(M), budget, seed + 1,
                                 witnesses=_structured_witnesses(n, f.domain.p))


def accessibility_report(family, budget=2000, seed=0, thresholds=None):
    t = thresholds or Thresholds()
    grid = family.index_grid
    if len(grid) < 3:
        raise ValueError("accessibility needs at least 3 grid points")
    rows = []
    for n in grid:
        try:
            f = family.builder(n)
        except Exception as exc:
            raise RuntimeError(f"{family.label}: builder failed at n={n}: {exc}") from exc
        if f.domain.dim != n:
            raise RuntimeError(f"{family.label}: builder({n}) has domain {f.domain}")
        ws = _structured_witnesses(n, f.domain.p)
        norm = hom_map_norm_estimate(f, budget, seed, witnesses=ws)
        q = estimate_Q(f, budget, seed)
        dist, how = best_dist_lower_bound(f, seed=seed)
        heur, notes = None, [how]
        if dist < t.tau_d:
            heur = _heuristic_distance(f, budget, seed)
            notes.append("heuristic l_n" if heur is not None else "heuristic skipped")
        if "q_bound" in family.meta:
            notes.append(f"Q<=1/d_n={family.meta['q_bound'][n]:.6g}")
        rows.append(FamilyRow(n=n, norm_est=norm, q_lb=q.sampled_lower,
                              q_ub=q.certified_upper, dist_lb=dist, dist_mechanism=how,
                              dist_heuristic=heur, notes="; ".join(notes)))
    verdict, reason = classify(rows, grid, t)
    return AccessibilityReport(family.label, rows, verdict, int(seed), t, reason)


# ------------------------------------------------------------ derivation

@dataclass(frozen=True)
class LeibnizDefect:
    measured: float
    closed_form: float


def _check_n(n):
    if n < 2:
        raise ValueError("the derivation needs n >= 2")
    return math.log(n)


def kp_derivation(x, n, p):
    """D_n(x) = x log(||x||_p/|x|) / log n, 0 where x(k) = 0."""
    return kalton_peck(x, identity_profile(), p) / _check_n(n)


def kp_derivation0(x, n, p=None):
    """The variant x log(1/|x|) / log n."""
    return -omega(as_vec(x)) / _check_n(n)


def leibniz_defect(kind, x, y, n, p):
    """||D(xy) - x D(y) - y D(x)||_p with the coordinatewise product.

    Homogeneous kind: the closed form |log(||xy||/(||x|| ||y||))| ||xy|| / log n
    comes back as the oracle; the variant satisfies Leibniz exactly.
    """
    x, y = as_vec(x), as_vec(y)
    if kind in ("homogeneous", "hom"):
        D = lambda v: kp_derivation(v, n, p)
    elif kind in ("variant", "log1"):
        D = lambda v: kp_derivation0(v, n)
    else:
        raise ValueError(f"unknown derivation kind {kind!r}")
    xy = x * y
    measured = p_quasinorm(D(xy) - x * D(y) - y * D(x), p)
    if kind in ("variant", "log1"):
        return LeibnizDefect(measured, 0.0)
    nxy = p_quasinorm(xy, p)
    if nxy == 0:
        return LeibnizDefect(measured, 0.0)
    ratio = nxy / (p_quasinorm(x, p) * p_quasinorm(y, p))
    return LeibnizDefect(measured, abs(math.log(ratio)) * nxy / math.log(n))


def idempotent_decay(n, m, p):
    """||D_n(e)|| / ||e|| for the idempotent e = s_m in l_p^n."""
    if not 1 <= m <= n:
        raise ValueError("support size must satisfy 1 <= m <= n")
    e = np.r_[np.ones(m), np.zeros(n - m)]
    return p_quasinorm(kp_derivation(e, n, p), p) / p_quasinorm(e, p)
