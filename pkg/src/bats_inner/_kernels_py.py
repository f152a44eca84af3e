"""Pure-Python reference for the compiled kernels in ``_kernels.pyx``.

Same algorithms, same random streams, same outputs; only slower.
"""
from __future__ import annotations

from .rng import Rng, derive_seed

BACKEND = "python"


def _echelon(rows: list[list[int]], F) -> list[list[int]]:
    """Row-reduce in place; return the nonzero rows (a row-space basis)."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = -1
        for i in range(r, n_rows):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = F.inv(rows[r][c])
        prow = [F.mul(inv, x) for x in rows[r]]
        rows[r] = prow
        for i in range(r + 1, n_rows):
            f = rows[i][c]
            if f:
                nf = F.neg(f)
                rows[i] = [F.add(x, F.mul(nf, y)) for x, y in zip(rows[i], prow)]
        r += 1
    return rows[:r]


def gf_rank(mat, F) -> int:
    rows = [list(map(int, row)) for row in mat]
    if not rows or not rows[0]:
        return 0
    return len(_echelon(rows, F))


def simulate_block(F, t, eps, M: int, master: int, start: int, count: int):
    """Simulate batches ``start .. start+count-1``.

    Returns ``(ranks, reached)``: the sink rank of each batch and the number
    of hops it survived (``reached == l`` means it arrived at the sink).
    """
    t = [int(x) for x in t]
    eps = [float(x) for x in eps]
    q = F.q
    ranks = [0] * count
    reached = [0] * count
    for b in range(count):
        idx = start + b
        loss = Rng(derive_seed(master, idx, 0))
        code = Rng(derive_seed(master, idx, 1))
        basis = [[1 if i == j else 0 for j in range(M)] for i in range(M)]
        r = M
        hops = 0
        for tk, ek in zip(t, eps):
            received = [j for j in range(tk) if not loss.uniform() < ek]
            n = len(received)
            if n == 0:
                r = 0
                break
            hops += 1
            if r == 0:
                continue
            c = len(basis[0])
            # recoding matrix: one row per packet held by the node, one column per packet sent
            phi = [[code.below(q) for _ in range(tk)] for _ in range(c)]
            new = []
            for row in basis:
                out = []
                for j in received:
                    acc = 0
                    for s in range(c):
                        a = row[s]
                        if a:
                            acc = F.add(acc, F.mul(a, phi[s][j]))
                    out.append(acc)
                new.append(out)
            basis = _echelon(new, F)
            r = len(basis)
        ranks[b] = r
        reached[b] = hops
    return ranks, reached
