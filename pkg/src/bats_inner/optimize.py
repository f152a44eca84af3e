"""Integer recoding policies: centralized box search, PA and per-hop PS."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytics import PathProfile, alpha_beta, efficiency, eigenvalues
from .bound import BoundResult, solve_upper_bound

MAX_ENUM_HOPS = 24


@dataclass(frozen=True)
class BoundsBox:
    d: tuple[int, ...]
    u: tuple[int, ...]

    def __post_init__(self):
        if len(self.d) != len(self.u):
            raise ValueError("floor and ceiling vectors differ in length")
        for lo, hi in zip(self.d, self.u):
            if not (1 <= lo <= hi <= lo + 1):
                raise ValueError(f"invalid box edge ({lo}, {hi})")

    def vertices(self):
        """All vertices, lexicographically ascending."""
        return itertools.product(*[sorted({lo, hi}) for lo, hi in zip(self.d, self.u)])

    @property
    def size(self) -> int:
        return math.prod(1 + (hi > lo) for lo, hi in zip(self.d, self.u))


@dataclass(frozen=True)
class SolveReport:
    policy: tuple[int, ...]
    objective: float
    bound: float
    gap: float
    evaluations: int


def box_around(t_real: Sequence[float]) -> BoundsBox:
    d = tuple(max(1, math.floor(x)) for x in t_real)
    u = tuple(max(1, math.ceil(x)) for x in t_real)
    return BoundsBox(d, u)


def bounds_box(profile: PathProfile, bound: BoundResult | None = None) -> tuple[BoundsBox, BoundResult]:
    """Floor/ceiling box around the continuous optimum, with the bound it came from."""
    if bound is None:
        bound = solve_upper_bound(profile)
    return box_around(bound.t_star), bound


def _report(policy, objective, bound: BoundResult, evaluations) -> SolveReport:
    gap = (bound.value - objective) / bound.value if bound.value > 0 else 0.0
    return SolveReport(tuple(int(x) for x in policy), float(objective), float(bound.value),
                       float(gap), int(evaluations))


def solve_centralized(profile: PathProfile, bound: BoundResult | None = None) -> SolveReport:
    """Best exact-efficiency vertex of the box around the continuous optimum.

    Up to ``MAX_ENUM_HOPS`` hops every vertex is tried; beyond that a
    coordinate descent over the box stands in for enumeration.
    """
    box, bound = bounds_box(profile, bound)
    if profile.l <= MAX_ENUM_HOPS:
        best = _enumerate_box(profile, box)
        return _report(best, efficiency(profile, best), bound, box.size)
    return _box_descent(profile, box, bound)


def _enumerate_box(profile: PathProfile, box: BoundsBox, chunk: int = 1 << 15) -> tuple[int, ...]:
    """Exact efficiency at every vertex, vectorized; first maximum in lexicographic order."""
    M, q = profile.M, profile.q
    eps = np.asarray(profile.eps, dtype=float)
    coef = np.asarray(alpha_beta(M, q)[0]) * np.asarray(alpha_beta(M, q)[1])
    d = np.array(box.d, dtype=float)
    u = np.array(box.u, dtype=float)
    lam_d = np.array([eigenvalues(int(t), e, M, q) for t, e in zip(box.d, profile.eps)])
    lam_u = np.array([eigenvalues(int(t), e, M, q) for t, e in zip(box.u, profile.eps)])
    free = [k for k in range(profile.l) if box.u[k] > box.d[k]]
    m = len(free)
    best_val, best_idx = -math.inf, 0
    for lo in range(0, 1 << m, chunk):
        idx = np.arange(lo, min(lo + chunk, 1 << m), dtype=np.int64)
        up = np.zeros((len(idx), profile.l), dtype=bool)
        for j, k in enumerate(free):
            up[:, k] = (idx >> (m - 1 - j)) & 1  # first free hop is the most significant bit
        T = np.where(up, u, d)
        prod = np.ones((len(idx), M + 1))
        for k in range(profile.l):
            prod *= np.where(up[:, k:k + 1], lam_u[k], lam_d[k])
        surv = np.cumprod(1.0 - np.power(eps, T), axis=1)
        den = T[:, 0] + (surv[:, :-1] * T[:, 1:]).sum(axis=1)
        val = (prod @ coef) / den
        i = int(np.argmax(val))
        if val[i] > best_val:
            best_val, best_idx = float(val[i]), int(idx[i])
    return tuple(int(box.u[k] if k in free and (best_idx >> (m - 1 - free.index(k))) & 1 else box.d[k])
                 for k in range(profile.l))


def _box_descent(profile: PathProfile, box: BoundsBox, bound: BoundResult) -> SolveReport:
    x = list(box.d)
    fx = efficiency(profile, x)
    n = 1
    improved = True
    while improved:
        improved = False
        for k in range(profile.l):
            if box.u[k] == box.d[k]:
                continue
            y = list(x)
            y[k] = box.u[k] if x[k] == box.d[k] else box.d[k]
            fy = efficiency(profile, y)
            n += 1
            # a move up must strictly pay; a move down may also win ties
            if fy > fx or (fy == fx and y[k] < x[k]):
                x, fx, improved = y, fy, True
    return _report(x, fx, bound, n)


# -- decentralized ------------------------------------------------------------

def pa_objective(profile: PathProfile, policy: Sequence[int]) -> float:
    """Mean sink rank divided by the raw packet count ``sum_k t_k``."""
    alpha, beta = alpha_beta(profile.M, profile.q)
    prod = np.ones(profile.M + 1)
    for tk, ek in zip(policy, profile.eps):
        prod = prod * eigenvalues(tk, ek, profile.M, profile.q)
    return float(np.dot(alpha * beta, prod)) / float(sum(policy))


def solve_pa(profile: PathProfile, start: Sequence[int] | None = None,
             max_sweeps: int = 10_000) -> tuple[int, ...]:
    """Integer coordinate ascent on the PA objective.

    Hops with equal loss rates share one variable.  Starts from ``t = M``
    (or ``start``) and walks by +-1, first along each shared variable and then
    along all of them at once, until a full sweep changes nothing.
    """
    M, q = profile.M, profile.q
    groups: dict[float, list[int]] = {}
    for k, e in enumerate(profile.eps):
        groups.setdefault(e, []).append(k)
    keys = list(groups)
    counts = np.array([len(groups[e]) for e in keys], dtype=float)
    coef = np.asarray(alpha_beta(M, q)[0]) * np.asarray(alpha_beta(M, q)[1])

    def f(tv):
        with np.errstate(under="ignore"):
            prod = np.ones(M + 1)
            for e, c, tk in zip(keys, counts, tv):
                prod = prod * np.power(eigenvalues(tk, e, M, q), c)
        return float(np.dot(coef, prod)) / float(np.dot(counts, tv))

    tv = [M] * len(keys) if start is None else [int(start[groups[e][0]]) for e in keys]
    fx = f(tv)
    ones = [1] * len(keys)
    for _ in range(max_sweeps):
        moved = False
        # one variable at a time, then every variable together: single-variable
        # steps alone stall on the ridge where all counts should grow at once
        directions = [[int(i == g) for i in range(len(keys))] for g in range(len(keys))] + [ones]
        for d in directions:
            for sign in (1, -1):
                while all(x + sign * di >= 1 for x, di in zip(tv, d)):
                    cand = [x + sign * di for x, di in zip(tv, d)]
                    fc = f(cand)
                    if fc > fx:
                        tv, fx, moved = cand, fc, True
                    else:
                        break
        if not moved:
            break
    out = [0] * profile.l
    for e, tk in zip(keys, tv):
        for k in groups[e]:
            out[k] = tk
    return tuple(out)


def ps_t_max(eps: float, M: int) -> int:
    return max(4 * M, math.ceil(2 * M / (1.0 - eps) - 1e-9))  # tolerance keeps 2M/0.1 at 20M


def ps_objective_curve(eps: float, hops: Sequence[int], M: int, q: int, t_max: int) -> np.ndarray:
    """PS objective for each ``l`` in ``hops`` (rows) and ``t = 1..t_max`` (columns)."""
    alpha, beta = alpha_beta(M, q)
    coef = np.asarray(alpha) * np.asarray(beta)
    lam = np.array([eigenvalues(t, eps, M, q) for t in range(1, t_max + 1)])
    ts = np.arange(1, t_max + 1, dtype=float)
    out = np.empty((len(hops), t_max))
    with np.errstate(under="ignore"):
        for i, l in enumerate(hops):
            out[i] = (np.power(lam, l) @ coef) / (l * ts)
    return out


def solve_ps_row(eps: float, hops: Sequence[int], M: int, q: int) -> list[int]:
    """``solve_ps`` for several hop counts sharing one loss rate."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"loss rate must lie in [0, 1), got {eps}")
    if any(l < 1 for l in hops):
        raise ValueError("hop counts must be >= 1")
    t_max = ps_t_max(eps, M)
    while True:
        curve = ps_objective_curve(eps, hops, M, q, t_max)
        best = curve.argmax(axis=1)  # first maximum, so ties go to the smaller t
        if np.all(best < t_max - 1):
            return [int(b) + 1 for b in best]
        warnings.warn(f"PS maximum at the scan limit t={t_max} (eps={eps}); extending", RuntimeWarning)
        t_max *= 2


def solve_ps(eps: float, l: int, M: int, q: int) -> int:
    """Best common packet count for ``l`` identical hops, by exhaustive scan."""
    return solve_ps_row(eps, [l], M, q)[0]
