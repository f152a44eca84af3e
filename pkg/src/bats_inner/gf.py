"""Finite-field arithmetic over GF(p^m) and small exact matrix routines.

Elements are integers in ``[0, q)``.  For extension fields the base-``p``
digits of an element are the coefficients of its polynomial representative
(lowest degree first), reduced modulo a fixed monic irreducible polynomial.
Matrices are plain ``numpy`` integer arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .rng import Rng

MAX_ORDER = 1 << 16

# x^4 + x + 1 and x^8 + x^4 + x^3 + x + 1, lowest degree first
_STANDARD_POLYS = {
    (2, 4): (1, 1, 0, 0, 1),
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0, 1),
}


class FieldError(ValueError):
    """Invalid field parameters or an arithmetic domain error."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q`` into ``(p, m)`` with ``q == p**m``."""
    if q < 2:
        raise FieldError(f"field order must be >= 2, got {q}")
    for p in range(2, q + 1):
        if q % p == 0:
            m, r = 0, q
            while r % p == 0:
                r //= p
                m += 1
            if r != 1 or not is_prime(p):
                raise FieldError(f"{q} is not a prime power")
            return p, m
    raise FieldError(f"{q} is not a prime power")  # pragma: no cover


# -- polynomials over GF(p), coefficient tuples lowest degree first ----------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    a = _trim(list(a))
    b = _trim(list(b))
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _trim(a)
    return a


def is_irreducible(poly: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    m = len(poly) - 1
    if m < 1 or poly[-1] % p == 0:
        return False
    for d in range(1, m // 2 + 1):
        for low in product(range(p), repeat=d):
            if not _poly_rem(poly, list(low) + [1], p):
                return False
    return True


def default_polynomial(p: int, m: int) -> tuple[int, ...]:
    if m == 1:
        return (0, 1)
    if (p, m) in _STANDARD_POLYS:
        return _STANDARD_POLYS[(p, m)]
    for low in product(range(p), repeat=m):
        cand = tuple(reversed(low)) + (1,)
        if cand[0] != 0 and is_irreducible(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {m} over GF({p})")  # pragma: no cover


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int = 1
    reduction_polynomial: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.m < 1:
            raise FieldError("extension degree must be >= 1")
        if self.q > MAX_ORDER:
            raise FieldError(f"field order {self.q} exceeds {MAX_ORDER}")
        poly = tuple(self.reduction_polynomial) or default_polynomial(self.p, self.m)
        object.__setattr__(self, "reduction_polynomial", poly)
        if self.m > 1:
            if len(poly) != self.m + 1 or poly[-1] != 1:
                raise FieldError(f"reduction polynomial must be monic of degree {self.m}")
            if any(not 0 <= c < self.p for c in poly):
                raise FieldError("polynomial coefficients must lie in [0, p)")
            if not is_irreducible(poly, self.p):
                raise FieldError(f"{poly} is reducible over GF({self.p})")

    @property
    def q(self) -> int:
        return self.p ** self.m

    @classmethod
    def of_order(cls, q: int) -> "FieldSpec":
        p, m = prime_power(q)
        return cls(p, m)


class Field:
    """Arithmetic context for one ``FieldSpec``.

    Multiplication goes through discrete log / antilog tables built from a
    primitive element; addition is XOR in characteristic 2, integer addition
    mod ``p`` for prime fields and digit-wise otherwise.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p, self.m, self.q = spec.p, spec.m, spec.q
        self._poly_mask = sum(c << i for i, c in enumerate(spec.reduction_polynomial))
        self._build_tables()

    # raw polynomial-basis product, used only to bootstrap the tables
    def _slow_mul(self, a: int, b: int) -> int:
        p, m, q = self.p, self.m, self.q
        if m == 1:
            return (a * b) % p
        if p == 2:
            r = 0
            while b:
                if b & 1:
                    r ^= a
                b >>= 1
                a <<= 1
                if a & q:
                    a ^= self._poly_mask
            return r
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        return self._undigits(_poly_rem(prod, list(self.spec.reduction_polynomial), p))

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.m):
            a, d = divmod(a, self.p)
            out.append(d)
        return out

    def _undigits(self, ds) -> int:
        v = 0
        for d in reversed(list(ds)):
            v = v * self.p + d
        return v

    def _build_tables(self):
        q = self.q
        order = q - 1
        factors = _prime_factors(order) if order > 1 else []

        def power(x, e):
            r = 1
            while e:
                if e & 1:
                    r = self._slow_mul(r, x)
                x = self._slow_mul(x, x)
                e >>= 1
            return r

        gen = 1
        for cand in range(2 if q > 2 else 1, q):
            if all(power(cand, order // f) != 1 for f in factors):
                gen = cand
                break
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._slow_mul(x, gen)
        exp[order:] = exp[:order]
        self.generator = gen
        self.exp, self.log = exp, log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()
        self.minus_one = self.neg(1)

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.m == 1:
            return (a + b) % self.p
        return self._undigits((x + y) % self.p for x, y in zip(self._digits(a), self._digits(b)))

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.m == 1:
            return (-a) % self.p
        return self._undigits((-x) % self.p for x in self._digits(a))

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return self._exp_list[(self.q - 1 - self._log_list[a]) % (self.q - 1)]

    def kernel_zech(self) -> np.ndarray:
        """``z[n]`` with ``1 + g^n = g^z[n]``, or -1 where ``1 + g^n = 0``."""
        cached = getattr(self, "_zech", None)
        if cached is not None:
            return cached
        order = self.q - 1
        z = np.empty(order, dtype=np.int64)
        for n in range(order):
            s = self.add(1, self._exp_list[n])
            z[n] = -1 if s == 0 else self._log_list[s]
        self._zech = z
        return z


@lru_cache(maxsize=None)
def field_ops(spec: FieldSpec) -> Field:
    return Field(spec)


def gf(q: int) -> Field:
    """Arithmetic context for the default field of order ``q``."""
    return field_ops(FieldSpec.of_order(q))


def _check(A, spec: FieldSpec) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if A.size and (A.min() < 0 or A.max() >= spec.q):
        raise ValueError(f"matrix entries must lie in [0, {spec.q})")
    return A


def _rank_gf2(A: np.ndarray) -> int:
    # rows packed into Python ints; pivot on the lowest set bit
    basis: dict[int, int] = {}
    for row in A:
        v = int("".join("1" if x else "0" for x in row[::-1]) or "0", 2)
        while v:
            low = v & -v
            b = basis.get(low)
            if b is None:
                basis[low] = v
                break
            v ^= b
    return len(basis)


def rank_generic(A, spec: FieldSpec) -> int:
    """Rank by row reduction using only the field operations."""
    F = field_ops(spec)
    rows = [list(map(int, r)) for r in _check(A, spec)]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][c])
        rows[r] = [F.mul(inv, x) for x in rows[r]]
        for i in range(r + 1, n_rows):
            f = rows[i][c]
            if f:
                rows[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == n_rows:
            break
    return r


def rank(A, spec: FieldSpec) -> int:
    A = _check(A, spec)
    if A.size == 0:
        return 0
    if spec.q == 2:
        return _rank_gf2(A)
    return rank_generic(A, spec)


def random_matrix(rows: int, cols: int, spec: FieldSpec, rng: Rng) -> np.ndarray:
    """Entries i.i.d. uniform on the field, drawn row-major from ``rng``."""
    q = spec.q
    data = [rng.below(q) for _ in range(rows * cols)]
    return np.array(data, dtype=np.int64).reshape(rows, cols)


def matmul(A, B, spec: FieldSpec) -> np.ndarray:
    A, B = _check(A, spec), _check(B, spec)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"inner dimensions differ: {A.shape} x {B.shape}")
    if spec.m == 1:
        # exact in int64 for q <= 2^16 as long as the inner dimension is modest
        if A.shape[1] * (spec.q - 1) ** 2 < 2**62:
            return (A @ B) % spec.q
    F = field_ops(spec)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            acc = 0
            for k in range(A.shape[1]):
                acc = F.add(acc, F.mul(int(A[i, k]), int(B[k, j])))
            out[i, j] = acc
    return out


def bernoulli_diag(t: int, eps: float, rng: Rng) -> np.ndarray:
    """``t x t`` diagonal erasure matrix: each diagonal entry is 0 with probability ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"loss rate must be in [0, 1], got {eps}")
    diag = [0 if rng.bernoulli(eps) else 1 for _ in range(t)]
    return np.diag(np.array(diag, dtype=np.int64)).reshape(t, t)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)
