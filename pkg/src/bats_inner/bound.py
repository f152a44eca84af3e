"""Large-field approximation of the rank chain and the continuous upper bound.

As ``q`` grows, a received packet is innovative unless the batch has already
reached full rank, so the mean sink rank becomes a sum over ranks of products
of binomial tails.  Writing the tails as regularized incomplete beta functions
makes them smooth in the packet counts; maximizing the resulting efficiency
over positive reals bounds every integer policy from above.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .analytics import PathProfile, arrival_pmf_vector, check_policy, source_distribution

_CF_MAX_ITER = 10_000
_CF_EPS = 1e-16
_TINY = 1e-300


def _beta_cf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"I_x(a, b) needs a > 0 and b > 0, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast only on the near side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, max(0.0, front * _beta_cf(x, a, b) / a))
    return min(1.0, max(0.0, 1.0 - front * _beta_cf(1.0 - x, b, a) / b))


def pu_term(r: int, t: float, eps: float) -> float:
    """``I_{1-eps}(r, t-r+1)``, taken as 0 once ``t <= r - 1``."""
    if r < 1:
        raise ValueError("rank index starts at 1")
    if t <= r - 1:
        return 0.0
    return reg_inc_beta(1.0 - eps, float(r), t - r + 1.0)


def pu_terms(t, eps, M: int) -> np.ndarray:
    """All ``pu_term(r, t_j, eps_j)`` for ``r = 1..M`` at once.

    Uses ``I_x(1, t) = 1 - (1-x)^t`` and the downward recurrence
    ``I_x(r+1, t-r) = I_x(r, t-r+1) - C(t, r) x^r (1-x)^(t-r)`` with
    gamma-function binomial coefficients, which is exact for real ``t``.
    ``t`` and ``eps`` broadcast together; the result has a trailing axis of
    length ``M``.
    """
    t, eps = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(eps, dtype=float))
    n = np.arange(M, dtype=float)
    tt = t[..., None]
    ee = eps[..., None]
    tn = tt - n
    alive = tn > 0.0  # term n exists while t - n + 1 > 1
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = gammaln(tt + 1.0) - gammaln(n + 1.0) - gammaln(np.where(alive, tn, 1.0) + 1.0)
        log_x = np.log1p(-ee)
        log_1mx = np.log(ee)
        logterm = logc + n * log_x + np.where(alive, tn, 0.0) * log_1mx
        terms = np.where(alive, np.exp(logterm), 0.0)
    # exact edge values where logs are singular
    terms = np.where((ee <= 0.0) & alive, 0.0, terms)
    terms = np.where((ee >= 1.0) & alive, np.where(n == 0, 1.0, 0.0), terms)
    out = 1.0 - np.cumsum(terms, axis=-1)
    out = np.where(tt > n, out, 0.0)  # r = n + 1 needs t > r - 1
    return np.clip(out, 0.0, 1.0)


def approx_transition_matrix(t: int, eps: float, M: int) -> np.ndarray:
    """Large-field transition matrix: every received packet below full rank is innovative."""
    f = arrival_pmf_vector(t, eps)
    fpad = np.zeros(M + 1)
    fpad[: min(t, M) + 1] = f[: min(t, M) + 1]
    P = np.zeros((M + 1, M + 1))
    for m in range(M + 1):
        P[m, :m] = fpad[:m]
        P[m, m] = f[m:].sum() if m <= t else 0.0
    return P


def approx_rank_distribution(profile: PathProfile, policy: Sequence[int]) -> np.ndarray:
    t = check_policy(policy, profile.l)
    h = source_distribution(profile.M)
    for tk, ek in zip(t, profile.eps):
        h = h @ approx_transition_matrix(tk, ek, profile.M)
    return h


def approx_average_rank(profile: PathProfile, t: Sequence[float]) -> float:
    """``sum_r prod_j I_{1-eps_j}(r, t_j - r + 1)`` for real ``t_j > 0``."""
    tt = _check_real_policy(t, profile.l)
    return float(pu_terms(tt, profile.eps, profile.M).prod(axis=0).sum())


def _check_real_policy(t, l: int) -> np.ndarray:
    tt = np.asarray(t, dtype=float)
    if tt.shape != (l,):
        raise ValueError(f"expected {l} packet counts, got shape {tt.shape}")
    if np.any(tt <= 0.0):
        raise ValueError("packet counts must be positive")
    return tt


def pu_objective_batch(T: np.ndarray, eps, M: int) -> np.ndarray:
    """Objective at each row of ``T`` (shape ``(K, l)``)."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    e = np.asarray(eps, dtype=float)
    num = pu_terms(T, e[None, :], M).prod(axis=1).sum(axis=-1)
    return num / _denominators(T, e)


def pu_objective(profile: PathProfile, t: Sequence[float]) -> float:
    tt = _check_real_policy(t, profile.l)
    return float(pu_objective_batch(tt[None, :], profile.eps, profile.M)[0])


@dataclass(frozen=True)
class BoundResult:
    t_star: tuple[float, ...]
    value: float
    iterations: int
    converged: bool


def search_box(profile: PathProfile) -> tuple[np.ndarray, np.ndarray]:
    M = profile.M
    hi = [max(4.0 * M, 2.0 * M / (1.0 - e)) for e in profile.eps]
    return np.ones(profile.l), np.array(hi)


def _denominators(T: np.ndarray, eps: np.ndarray) -> np.ndarray:
    surv = np.cumprod(1.0 - np.power(eps[None, :], T), axis=1)
    return T[:, 0] + (surv[:, :-1] * T[:, 1:]).sum(axis=1)


def _pattern_search(x0, lo, hi, eps, M, step0, min_step, max_iter):
    """Compass search with a shrinking step.

    Each poll changes one coordinate, so only that hop's terms are recomputed;
    the product over the other hops comes from prefix/suffix products.
    """
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    l = len(x)
    terms = pu_terms(x, eps, M)  # (l, M)
    fx = float(terms.prod(axis=0).sum() / _denominators(x[None, :], eps)[0])
    step = step0
    it = 0
    eye = np.eye(l)
    while step >= min_step:
        if it >= max_iter:
            return x, fx, it, False
        it += 1
        ones = np.ones((1, M))
        prefix = np.cumprod(np.vstack([ones, terms[:-1]]), axis=0)
        suffix = np.cumprod(np.vstack([terms[1:], ones])[::-1], axis=0)[::-1]
        excl = prefix * suffix  # product over every hop but k
        xu, xd = np.clip(x + step, lo, hi), np.clip(x - step, lo, hi)
        new = pu_terms(np.concatenate([xu, xd]), np.concatenate([eps, eps]), M)
        nums = (np.vstack([excl, excl]) * new).sum(axis=1)
        cand = np.vstack([np.where(eye > 0, xu, x), np.where(eye > 0, xd, x)])
        vals = nums / _denominators(cand, eps)
        up, down = vals[:l], vals[l:]
        best_dir = np.where(up >= down, 1.0, -1.0)
        improving = np.maximum(up, down) > fx
        if not improving.any():
            step *= 0.5
            continue
        i = int(np.argmax(vals))
        single, fsingle = cand[i], float(vals[i])
        if improving.sum() > 1:
            joint = np.clip(x + step * best_dir * improving, lo, hi)
            fjoint = float(pu_objective_batch(joint[None, :], eps, M)[0])
            if fjoint > fsingle:
                single, fsingle = joint, fjoint
        x, fx = single, fsingle
        terms = pu_terms(x, eps, M)
    return x, fx, it, True


def solve_upper_bound(profile: PathProfile, starts: int = 8, seed: int = 0,
                      ps_start: bool = True, min_step: float = 1e-4,
                      max_iter: int = 20_000) -> BoundResult:
    """Maximize the continuous objective by multistart pattern search.

    Starts: every hop at ``M``, the per-hop look-up-table policy (if
    ``ps_start``), then uniform random points in the search box.
    """
    M, eps = profile.M, np.asarray(profile.eps, dtype=float)
    lo, hi = search_box(profile)
    if profile.l == 1:
        return _solve_1d(profile, lo[0], hi[0])
    x0s = [np.full(profile.l, float(M))]
    if ps_start:
        from .optimize import solve_ps

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # a start point only; scan-limit notices are noise
            x0s.append(np.array([float(solve_ps(e, profile.l, M, profile.q)) for e in profile.eps]))
    rng = np.random.default_rng(seed)
    while len(x0s) < starts:
        x0s.append(rng.uniform(lo, hi))
    best = None
    total_it = 0
    all_converged = True
    for x0 in x0s[:max(starts, 1)]:
        x, fx, it, ok = _pattern_search(x0, lo, hi, eps, M, M / 4.0, min_step, max_iter)
        total_it += it
        all_converged &= ok
        if best is None or fx > best[1]:
            best = (x, fx)
    return BoundResult(tuple(float(v) for v in best[0]), float(best[1]), total_it, all_converged)


def _solve_1d(profile: PathProfile, lo: float, hi: float) -> BoundResult:
    from scipy.optimize import minimize_scalar

    eps, M = profile.eps, profile.M
    grid = np.arange(lo, hi + 1e-12, 0.01)
    vals = pu_objective_batch(grid[:, None], eps, M)
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: -pu_objective_batch(np.array([[x]]), eps, M)[0],
                          bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    x, fx = float(res.x), float(-res.fun)
    if fx < vals[i]:
        x, fx = float(grid[i]), float(vals[i])
    return BoundResult((x,), fx, int(res.nfev) + len(grid), bool(res.success))
