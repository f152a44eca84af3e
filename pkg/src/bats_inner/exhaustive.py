"""Exact sink rank distribution by enumerating every coding and erasure outcome.

Independent of the closed-form recursion: nothing here uses rank-probability
formulas.  Two facts keep the enumeration small, both elementary:

* the columns of ``H Phi`` are i.i.d. copies of ``H phi`` with ``phi`` uniform,
  so an erasure pattern only matters through how many columns survive, and
  the surviving columns can be enumerated as a multiset;
* the future of a batch depends on ``H`` only through the law of ``H phi``,
  which we compute by brute force over all ``phi`` and use as the state key.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import gf

Vector = tuple[int, ...]
Law = frozenset  # of (vector, probability) pairs


def _combine(F, cols: Sequence[Vector], phi: Sequence[int], M: int) -> Vector:
    out = [0] * M
    for c, a in zip(cols, phi):
        if a:
            for i in range(M):
                out[i] = F.add(out[i], F.mul(a, c[i]))
    return tuple(out)


@lru_cache(maxsize=None)
def _law(q: int, M: int, cols: tuple[Vector, ...]) -> Law:
    """Distribution of ``H phi`` over all ``phi`` in GF(q)^len(cols)."""
    F = gf.gf(q)
    counts: dict[Vector, int] = defaultdict(int)
    for phi in itertools.product(range(q), repeat=len(cols)):
        counts[_combine(F, cols, phi, M)] += 1
    total = q ** len(cols)
    return frozenset((v, Fraction(c, total)) for v, c in counts.items())


@lru_cache(maxsize=None)
def _rank(q: int, M: int, cols: tuple[Vector, ...]) -> int:
    if not cols:
        return 0
    A = [[c[i] for c in cols] for i in range(M)]
    return gf.rank(A, gf.FieldSpec.of_order(q))


def _multisets(law: Law, n: int):
    """Each multiset of ``n`` i.i.d. draws with its exact probability."""
    items = sorted(law)
    for combo in itertools.combinations_with_replacement(range(len(items)), n):
        prob = Fraction(math.factorial(n))
        for idx, run in itertools.groupby(combo):
            m = len(list(run))
            prob *= items[idx][1] ** m / math.factorial(m)
        yield tuple(items[i][0] for i in combo), prob


def _erasure_counts(t: int, eps: Fraction):
    """Probability that exactly ``n`` of ``t`` packets survive, summed over all 2^t patterns."""
    out = defaultdict(Fraction)
    for pattern in itertools.product((0, 1), repeat=t):
        n = sum(pattern)
        out[n] += (1 - eps) ** n * eps ** (t - n)
    return out


def sink_rank_distribution(eps: Sequence, t: Sequence[int], M: int, q: int) -> list[Fraction]:
    """Exact ``Pr{rank(H_{l+1}) = r}`` for ``r = 0..M``; loss rates should be ``Fraction``s."""
    eps = [Fraction(e) for e in eps]
    if len(eps) != len(t) or not eps:
        raise ValueError("need one loss rate per hop")
    identity = tuple(tuple(1 if i == j else 0 for i in range(M)) for j in range(M))
    states: dict[Law, Fraction] = {_law(q, M, identity): Fraction(1)}
    dead = Fraction(0)  # batches with no surviving column
    last = len(t) - 1
    result = [Fraction(0)] * (M + 1)
    for k, (tk, ek) in enumerate(zip(t, eps)):
        survive = _erasure_counts(tk, ek)
        nxt: dict[Law, Fraction] = defaultdict(Fraction)
        for law, p in states.items():
            for n, pn in survive.items():
                if n == 0:
                    dead += p * pn
                    continue
                for cols, pc in _multisets(law, n):
                    w = p * pn * pc
                    key = tuple(sorted(cols))
                    if k == last:
                        result[_rank(q, M, key)] += w
                    else:
                        nxt[_law(q, M, key)] += w
        states = nxt
    result[0] += dead
    return result
