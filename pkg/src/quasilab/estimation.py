"""Sampled lower bounds for quasilinearity constants, paired with the
certified upper bounds available for the built-in maps."""
from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .maps import LOG2, HomogeneousMap, defect_rows, kp_constant

CHUNK = 1024


class CertificateViolation(AssertionError):
    """A sampled lower bound exceeded a certified upper bound."""


@dataclass(frozen=True)
class QEstimate:
    sampled_lower: float
    certified_upper: Optional[float]
    witness_pair: tuple
    samples_used: int
    seed: int


def certified_Q_upper(map_kind, p=None, lip=1.0):
    if isinstance(map_kind, HomogeneousMap):
        if map_kind.q_certified_upper is None:
            raise ValueError(f"no certified quasilinearity bound for {map_kind.label}")
        return map_kind.q_certified_upper
    if map_kind == "ribe":
        return 2 * LOG2
    if map_kind == "kalton_peck":
        if p is None:
            raise ValueError("kalton_peck certificate needs p")
        return kp_constant(p) * float(lip)
    if map_kind == "linear":
        return 0.0
    raise ValueError(f"unknown map kind {map_kind!r}")


def k0_lower_bound(f, dist_lb):
    """dist_lb / Q_ub[f]: no constant C below this value can satisfy
    ||f - l|| <= C Q[f] for this instance."""
    q = f.q_certified_upper if isinstance(f, HomogeneousMap) else certified_Q_upper(f)
    if q is None:
        raise ValueError("k0_lower_bound needs a certified quasilinearity bound")
    if dist_lb == 0:
        return 0.0
    if q <= 0:
        raise ValueError("positive distance to linear maps with a zero quasilinearity bound")
    return float(dist_lb) / q


# ------------------------------------------------------------------ pairs

def _geometric(n):
    ks = {1, 2, 3, n}
    k = 4
    while k < n:
        ks.add(k)
        k *= 2
    return sorted(k for k in ks if k <= n)


def structured_pairs(n):
    """Unit vectors, partial sums s_k and their disjoint/signed combinations,
    at a few relative scales."""
    e = np.eye(n)
    pairs = [(e[0], e[0])]
    if n >= 2:
        pairs += [(e[0], e[1]), (e[0], -e[1]), (e[0], 0.5 * e[1])]
    ks = _geometric(n)
    s = {k: np.r_[np.ones(k), np.zeros(n - k)] for k in ks}
    for k in ks:
        pairs += [(s[k], e[0]), (s[k], -e[0]), (s[k], e[n - 1])]
        if 2 * k <= n:
            block = np.roll(s[k], k)
            pairs += [(s[k], block), (s[k], -block)]
        for m in ks:
            if m > k:
                pairs += [(s[k], s[m]), (s[k], -s[m]), (s[k], s[m] - s[k]),
                          (s[k], -(s[m] - s[k]) / 2)]
    out = []
    for x, y in pairs:
        for t in (1.0, 0.1, 10.0):
            out.append((x, t * y))
    X = np.array([a for a, _ in out])
    Y = np.array([b for _, b in out])
    return X, Y


def random_pairs(n, count, rng):
    """Mixture of dense Gaussian, sparse, one-signed and log-scaled pairs."""
    X = rng.standard_normal((count, n))
    Y = rng.standard_normal((count, n))
    kind = rng.integers(0, 4, size=count)
    # sparse supports
    sp = kind == 1
    if sp.any():
        k = rng.integers(1, n + 1, size=(sp.sum(), 1))
        keep = rng.random((sp.sum(), n)).argsort(axis=1) < k
        X[sp] *= keep
        keep = rng.random((sp.sum(), n)).argsort(axis=1) < rng.integers(1, n + 1, size=(sp.sum(), 1))
        Y[sp] *= keep
    pos = kind == 2
    X[pos] = np.abs(X[pos])
    Y[pos] = np.abs(Y[pos]) * rng.choice([-1.0, 1.0], size=(pos.sum(), 1))
    lg = kind == 3
    if lg.any():
        X[lg] = np.sign(X[lg]) * np.exp(rng.uniform(-8, 2, size=(lg.sum(), n)))
        Y[lg] = np.sign(Y[lg]) * np.exp(rng.uniform(-8, 2, size=(lg.sum(), n)))
    Y *= 10.0 ** rng.uniform(-2, 2, size=(count, 1))
    return X, Y


def _chunk_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


# ----------------------------------------------------------------- ascent

def local_ascent(f, x, y, rounds=50, delta=0.5, max_coords=64):
    """Best-improvement multiplicative coordinate search on the pair (x, y).

    Each round tries z_j*(1+delta) and z_j*(1-delta) on up to `max_coords`
    of the largest nonzero coordinates of z = (x, y); delta halves when
    no candidate improves. Deterministic in its inputs.
    """
    n = x.size
    z = np.r_[x, y].astype(float)
    best = float(defect_rows(f, z[None, :n], z[None, n:])[0])
    evals = 1
    for _ in range(rounds):
        nz = np.flatnonzero(z)
        if nz.size == 0:
            break
        if nz.size > max_coords:
            nz = nz[np.argsort(-np.abs(z[nz]), kind="stable")[:max_coords]]
        C = np.repeat(z[None, :], 2 * nz.size, axis=0)
        rows = np.arange(nz.size)
        C[rows, nz] *= 1 + delta
        C[nz.size + rows, nz] *= 1 - delta
        vals = defect_rows(f, C[:, :n], C[:, n:])
        evals += C.shape[0]
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, z = float(vals[k]), C[k]
        else:
            delta *= 0.5
    return z[:n].copy(), z[n:].copy(), best, evals


# --------------------------------------------------------------- estimate

def estimate_Q(f, budget=1000, seed=0, ascent_rounds=50, structured=True, check=True,
               structured_starts=4):
    """Sampled lower bound for Q[f].

    Evaluates the structured pairs, then `budget` random pairs drawn in
    prefix-stable chunks. Local ascent starts from the best
    `structured_starts` structured pairs (a budget-independent set) and from
    every random pair that set a new running maximum, so larger budgets with
    the same seed never lower the result.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = f.domain.dim
    if structured:
        SX, SY = structured_pairs(n)
    else:
        SX, SY = np.empty((0, n)), np.empty((0, n))
    starts = []
    running = -math.inf

    def scan(X, Y):
        nonlocal running
        vals = defect_rows(f, X, Y)
        prior = np.maximum.accumulate(np.r_[running, vals])[:-1]
        for i in np.flatnonzero(vals > prior):
            starts.append((X[i], Y[i], float(vals[i])))
        running = max(running, float(vals.max()))

    if SX.shape[0]:
        vals = defect_rows(f, SX, SY)
        order = np.argsort(-vals, kind="stable")[:max(structured_starts, 1)]
        starts.extend((SX[i], SY[i], float(vals[i])) for i in order)
        running = float(vals[order[0]])
    done, c = 0, 0
    while done < budget:
        X, Y = random_pairs(n, CHUNK, _chunk_rng(seed, c))
        take = min(CHUNK, budget - done)
        scan(X[:take], Y[:take])
        done += take
        c += 1

    used = SX.shape[0] + budget
    if not starts:
        return QEstimate(0.0, f.q_certified_upper, (np.zeros(n), np.zeros(n)), used, int(seed))
    best = (starts[0][0], starts[0][1], starts[0][2])
    for x, y, v in starts:
        if v > best[2]:
            best = (x, y, v)
        if ascent_rounds > 0:
            ax, ay, av, ev = local_ascent(f, x, y, rounds=ascent_rounds)
            used += ev
            if av > best[2]:
                best = (ax, ay, av)
    wx, wy = best[0].copy(), best[1].copy()
    value = float(defect_rows(f, wx[None, :], wy[None, :])[0])
    ub = f.q_certified_upper
    if check and ub is not None and value > ub * (1 + 1e-9) + 1e-12:
        raise CertificateViolation(
            f"sampled Q lower bound {value!r} exceeds certificate {ub!r} for {f.label}")
    return QEstimate(sampled_lower=value, certified_upper=ub, witness_pair=(wx, wy),
                     samples_used=int(used), seed=int(seed))
