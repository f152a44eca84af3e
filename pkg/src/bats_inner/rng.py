"""Counter-based random streams.

Every unit of random work (a batch, a trial) gets its own stream whose seed is
``derive_seed(master, *keys)``.  Streams are SplitMix64 sequences, which the
compiled kernel reproduces bit-for-bit, so results never depend on which
backend ran or how the work was split across processes.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_32 = 1 << 32
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Hash ``master`` and an index path into an independent 64-bit seed."""
    h = mix64(master ^ 0x6A09E667F3BCC909)
    for k in keys:
        h = mix64((h + mix64((k + GOLDEN) & MASK64)) & MASK64)
    return h


class Rng:
    """A SplitMix64 stream.

    ``below(n)`` is exactly uniform (rejection on the upper 32 bits) and
    ``bernoulli(p)`` compares a 53-bit uniform against ``p``; the kernel uses
    the same arithmetic.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        if n <= 0 or n > _TWO_POW_32:
            raise ValueError(f"bound must be in [1, 2^32], got {n}")
        limit = _TWO_POW_32 - (_TWO_POW_32 % n)
        while True:
            u = self.next_u64() >> 32
            if u < limit:
                return u % n

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def spawn(self, *keys: int) -> "Rng":
        return Rng(derive_seed(self.state, *keys))
