"""Exact rank-distribution propagation along a lossy line network.

A batch leaves the source with a full-rank ``M x M`` transfer matrix.  At hop
``k`` the node sends ``t_k`` random combinations of what it holds, each lost
independently with probability ``eps_k``.  The rank of the transfer matrix is a
Markov chain on ``0..M`` whose transition matrices share one lower-triangular
eigenvector matrix ``Q``; only the eigenvalues depend on ``(t_k, eps_k)``.

Floating-point routines work in log space so that products of many factors
close to one stay accurate.  Functions taking ``exact=True`` return
``fractions.Fraction`` values and are meant for small fields and oracle checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .gf import FieldSpec, prime_power

EXACT_BINOMIAL_MAX_T = 60


@dataclass(frozen=True)
class PathProfile:
    """A line network of ``l = len(eps)`` hops carrying batches of size ``M`` over GF(q)."""

    eps: tuple[float, ...]
    M: int
    q: int = 256

    def __post_init__(self):
        eps = tuple(self.eps)
        object.__setattr__(self, "eps", eps)
        if not eps:
            raise ValueError("a path needs at least one hop")
        if any(not 0.0 <= e < 1.0 for e in eps):
            raise ValueError(f"loss rates must lie in [0, 1), got {eps}")
        if self.M < 1:
            raise ValueError(f"batch size must be >= 1, got {self.M}")
        prime_power(self.q)

    @property
    def l(self) -> int:
        return len(self.eps)

    @property
    def field(self) -> FieldSpec:
        return FieldSpec.of_order(self.q)


def check_policy(t: Sequence[int], l: int | None = None) -> tuple[int, ...]:
    """Validate a per-hop packet-count vector."""
    out = tuple(int(x) for x in t)
    if any(x != y for x, y in zip(out, t)):
        raise ValueError(f"policy entries must be integers, got {t}")
    if any(x < 1 for x in out):
        raise ValueError(f"every hop must send at least one packet, got {out}")
    if l is not None and len(out) != l:
        raise ValueError(f"policy has {len(out)} entries for a {l}-hop path")
    return out


def source_distribution(M: int) -> np.ndarray:
    h = np.zeros(M + 1)
    h[M] = 1.0
    return h


# -- zeta factors -------------------------------------------------------------

def zeta_n(r: int, n: int, q: int, exact: bool = False):
    """``prod_{i<r} (1 - q^(i-n))``: the chance that ``r`` uniform vectors in GF(q)^n are independent."""
    if r < 0 or n < 0:
        raise ValueError("r and n must be nonnegative")
    if r > n:
        raise ValueError(f"zeta_n needs r <= n, got r={r}, n={n}")
    if exact:
        out = Fraction(1)
        for i in range(r):
            out *= 1 - Fraction(1, q ** (n - i))
        return out
    return math.exp(sum(math.log1p(-float(q) ** (i - n)) for i in range(r)))


def zeta_nm(r: int, n: int, m: int, q: int, exact: bool = False):
    """Probability that a uniformly random ``n x m`` matrix over GF(q) has rank ``r``."""
    if r < 0 or r > min(n, m):
        raise ValueError(f"rank {r} impossible for a {n}x{m} matrix")
    if exact:
        return (zeta_n(r, n, q, True) * zeta_n(r, m, q, True)
                / (zeta_n(r, r, q, True) * Fraction(q) ** ((n - r) * (m - r))))
    log_val = (_log_zeta(r, n, q) + _log_zeta(r, m, q) - _log_zeta(r, r, q)
               - (n - r) * (m - r) * math.log(q))
    return math.exp(log_val)


def _log_zeta(r: int, n: int, q: int) -> float:
    return sum(math.log1p(-float(q) ** (i - n)) for i in range(r))


@lru_cache(maxsize=256)
def _log_partial(N: int, q: int) -> np.ndarray:
    """``S[k] = sum_{j=1..k} log(1 - q^-j)`` for ``k = 0..N``."""
    j = np.arange(1, N + 1, dtype=float)
    S = np.zeros(N + 1)
    S[1:] = np.cumsum(np.log1p(-np.power(float(q), -j)))
    S.setflags(write=False)
    return S


def zeta_table(N: int, q: int) -> np.ndarray:
    """``Z[r, n] = zeta_r^n`` for ``0 <= r, n <= N`` (zero where ``r > n``)."""
    S = _log_partial(N, q)
    r = np.arange(N + 1)[:, None]
    n = np.arange(N + 1)[None, :]
    valid = r <= n
    Z = np.where(valid, np.exp(S[n] - S[np.where(valid, n - r, 0)]), 0.0)
    return Z


def rank_prob_table(R: int, N1: int, N2: int, q: int) -> np.ndarray:
    """``Z[r, a, b] = zeta_r^{a,b}`` for ``r <= R``, ``a <= N1``, ``b <= N2``."""
    N = max(R, N1, N2)
    S = _log_partial(N, q)
    r = np.arange(R + 1)[:, None, None]
    a = np.arange(N1 + 1)[None, :, None]
    b = np.arange(N2 + 1)[None, None, :]
    valid = (r <= a) & (r <= b)
    ar = np.where(valid, a - r, 0)
    br = np.where(valid, b - r, 0)
    logv = (S[a] - S[ar]) + (S[b] - S[br]) - S[np.broadcast_to(r, valid.shape)] \
        - (ar * br) * math.log(q)
    return np.where(valid, np.exp(np.where(valid, logv, 0.0)), 0.0)


# -- packet arrivals ----------------------------------------------------------

def arrival_pmf(t: int, eps, n: int, exact: bool = False):
    """Probability that exactly ``n`` of ``t`` packets survive a hop with loss rate ``eps``."""
    if not 0 <= n <= t:
        raise ValueError(f"need 0 <= n <= t, got n={n}, t={t}")
    if exact:
        e = Fraction(eps)
        return math.comb(t, n) * (1 - e) ** n * e ** (t - n)
    return float(arrival_pmf_vector(t, float(eps))[n])


def arrival_pmf_vector(t: int, eps: float) -> np.ndarray:
    """Binomial(t, 1 - eps) pmf over ``n = 0..t``."""
    t = int(t)
    n = np.arange(t + 1)
    if eps <= 0.0:
        out = np.zeros(t + 1)
        out[t] = 1.0
        return out
    if eps >= 1.0:
        out = np.zeros(t + 1)
        out[0] = 1.0
        return out
    if t <= EXACT_BINOMIAL_MAX_T:
        coeff = np.array([math.comb(t, k) for k in range(t + 1)], dtype=float)
        return coeff * np.power(1.0 - eps, n) * np.power(eps, t - n)
    from scipy.special import gammaln

    logc = gammaln(t + 1) - gammaln(n + 1) - gammaln(t - n + 1)
    return np.exp(logc + n * math.log1p(-eps) + (t - n) * math.log(eps))


# -- transition matrix and eigensystem ---------------------------------------

def transition_matrix(t: int, eps: float, M: int, q: int) -> np.ndarray:
    """``P[m, j]``: probability that rank ``m`` becomes rank ``j`` across one hop."""
    f = arrival_pmf_vector(t, eps)
    Z = rank_prob_table(M, M, t, q)  # Z[j, m, n]
    return np.einsum("jmn,n->mj", Z, f)


def transition_matrix_exact(t: int, eps, M: int, q: int) -> list[list[Fraction]]:
    f = [arrival_pmf(t, eps, n, exact=True) for n in range(t + 1)]
    return [[sum((f[n] * zeta_nm(j, m, n, q, True) for n in range(j, t + 1)), Fraction(0))
             if j <= m else Fraction(0) for j in range(M + 1)] for m in range(M + 1)]


@lru_cache(maxsize=64)
def q_matrix(M: int, q: int) -> np.ndarray:
    """Common eigenvector matrix: ``Q[i, 0] = 1``, ``Q[i, j] = zeta_j^i`` for ``j <= i``."""
    Q = np.tril(zeta_table(M, q).T)
    Q[:, 0] = 1.0
    Q.setflags(write=False)
    return Q


@lru_cache(maxsize=64)
def alpha_beta(M: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """``alpha = h_1^T Q`` and ``beta = Q^{-1} e`` with ``e = (0, 1, ..., M)``."""
    Q = q_matrix(M, q)
    alpha = Q[M].copy()
    beta = solve_triangular(Q, np.arange(M + 1, dtype=float), lower=True)
    beta[0] = 0.0  # exact: Q[0, 0] = 1 and e[0] = 0
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return alpha, beta


def eigenvalues(t: int, eps: float, M: int, q: int) -> np.ndarray:
    """Diagonal of ``P`` for one hop: ``lam[j] = sum_n f(n) zeta_j^n``; ``lam[0] = 1``."""
    return _eigenvalues_cached(int(t), float(eps), int(M), int(q))


@lru_cache(maxsize=1 << 16)
def _eigenvalues_cached(t: int, eps: float, M: int, q: int) -> np.ndarray:
    f = arrival_pmf_vector(t, eps)
    N = max(M, t)
    Z = zeta_table(N, q)[: M + 1, : t + 1]
    lam = Z @ f
    lam[0] = 1.0
    lam.setflags(write=False)
    return lam


@dataclass(frozen=True)
class EigenSystem:
    Q: np.ndarray
    Q_inv: np.ndarray
    lam: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.Q @ np.diag(self.lam) @ self.Q_inv


def eigensystem(profile: PathProfile, policy: Sequence[int], k: int) -> EigenSystem:
    """Eigendecomposition of hop ``k``'s transition matrix (``k`` is 1-based)."""
    t = check_policy(policy, profile.l)
    if not 1 <= k <= profile.l:
        raise ValueError(f"hop index {k} outside 1..{profile.l}")
    M, q = profile.M, profile.q
    Q = np.array(q_matrix(M, q))
    diag = np.diag(Q)
    if np.any(diag == 0.0):
        raise ArithmeticError("eigenvector matrix is singular")
    Q_inv = solve_triangular(Q, np.eye(M + 1), lower=True)
    alpha, beta = alpha_beta(M, q)
    lam = np.array(eigenvalues(t[k - 1], profile.eps[k - 1], M, q))
    return EigenSystem(Q, Q_inv, lam, np.array(alpha), np.array(beta))


# -- propagation --------------------------------------------------------------

def propagate_recursion(profile: PathProfile, policy: Sequence[int]) -> np.ndarray:
    t = check_policy(policy, profile.l)
    h = source_distribution(profile.M)
    for tk, ek in zip(t, profile.eps):
        h = h @ transition_matrix(tk, ek, profile.M, profile.q)
    return h


def propagate_eigen(profile: PathProfile, policy: Sequence[int]) -> np.ndarray:
    t = check_policy(policy, profile.l)
    M, q = profile.M, profile.q
    alpha, _ = alpha_beta(M, q)
    v = np.array(alpha)
    for tk, ek in zip(t, profile.eps):
        v = v * eigenvalues(tk, ek, M, q)
    # h Q = v  <=>  Q^T h^T = v^T
    return solve_triangular(q_matrix(M, q).T, v, lower=False)


def propagate(profile: PathProfile, policy: Sequence[int], method: str = "recursion") -> np.ndarray:
    """Rank distribution at the sink.

    ``method`` is ``"recursion"`` (hop-by-hop transition matrices),
    ``"eigen"`` (shared eigenbasis) or ``"both"``, which computes the two and
    raises if they disagree by more than 1e-9.
    """
    if method == "recursion":
        return propagate_recursion(profile, policy)
    if method == "eigen":
        return propagate_eigen(profile, policy)
    if method == "both":
        a = propagate_recursion(profile, policy)
        b = propagate_eigen(profile, policy)
        if np.max(np.abs(a - b)) > 1e-9:
            raise ArithmeticError(f"recursion and eigen routes disagree by {np.max(np.abs(a - b)):.3g}")
        return a
    raise ValueError(f"unknown method {method!r}")


def propagate_exact(eps: Sequence, t: Sequence[int], M: int, q: int) -> list[Fraction]:
    """Hop-by-hop recursion in rational arithmetic (for small ``M``, ``t``, ``q``)."""
    h = [Fraction(0)] * M + [Fraction(1)]
    for tk, ek in zip(check_policy(t), eps):
        P = transition_matrix_exact(tk, Fraction(ek), M, q)
        h = [sum((h[m] * P[m][j] for m in range(M + 1)), Fraction(0)) for j in range(M + 1)]
    return h


def average_rank(h) -> float:
    h = np.asarray(h, dtype=float)
    return float(np.dot(np.arange(len(h)), h))


# -- efficiency ---------------------------------------------------------------

def delivery_weights(eps: Sequence[float], t: Sequence) -> np.ndarray:
    """Cumulative products ``prod_{i<=k} (1 - eps_i^{t_i})`` for ``k = 1..l``."""
    e = np.asarray(eps, dtype=float)
    tt = np.asarray(t, dtype=float)
    return np.cumprod(1.0 - np.power(e, tt))


def sending_weights(eps: Sequence[float], t: Sequence) -> np.ndarray:
    """Fraction of source batches that node ``k`` transmits: ``prod_{i<k} (1 - eps_i^{t_i})``."""
    w = delivery_weights(eps, t)
    return np.concatenate(([1.0], w[:-1]))


def expected_packets(eps: Sequence[float], t: Sequence) -> float:
    """Expected packets sent along the path per source batch.

    Node ``k`` only forwards batches that reached it, so hop ``k`` costs
    ``t_k`` times the probability that the batch survived hops ``1..k-1``.
    """
    return float(np.dot(sending_weights(eps, t), np.asarray(t, dtype=float)))


def sink_average_rank(profile: PathProfile, policy: Sequence[int]) -> float:
    """``sum_r alpha_r beta_r prod_k lam_r(t_k, eps_k)``, i.e. the mean sink rank."""
    t = check_policy(policy, profile.l)
    alpha, beta = alpha_beta(profile.M, profile.q)
    prod = np.ones(profile.M + 1)
    for tk, ek in zip(t, profile.eps):
        prod = prod * eigenvalues(tk, ek, profile.M, profile.q)
    return float(np.dot(alpha * beta, prod))


def efficiency(profile: PathProfile, policy: Sequence[int]) -> float:
    """Mean sink rank per expected transmitted packet."""
    t = check_policy(policy, profile.l)
    return sink_average_rank(profile, t) / expected_packets(profile.eps, t)


def total_transmissions(n1: float, profile: PathProfile, policy: Sequence[int]) -> tuple[float, list[float]]:
    """Expected total transmissions for ``n1`` source batches, and batches sent by each node.

    Returns ``(T_total, [n_1, ..., n_l])`` where ``n_k = n_1 prod_{i<k} (1 - eps_i^{t_i})``
    and ``T_total = sum_k n_k t_k``.
    """
    if n1 < 1:
        raise ValueError("need at least one batch")
    t = check_policy(policy, profile.l)
    n_k = [float(n1 * x) for x in sending_weights(profile.eps, t)]
    total = float(sum(n * tk for n, tk in zip(n_k, t)))
    return total, n_k
