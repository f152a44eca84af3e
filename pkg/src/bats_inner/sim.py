"""Monte Carlo simulation of batches crossing a lossy line network over GF(q).

Each batch starts with transfer matrix ``H_1 = I_M``.  Hop ``k`` multiplies by
a totally random ``t_{k-1} x t_k`` recoding matrix and a Bernoulli erasure
diagonal, so the sink sees ``H_{l+1} = H_1 Phi_1 D_1 ... Phi_l D_l``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gf
from ._backend import kernels
from .analytics import PathProfile, average_rank, check_policy, propagate
from .rng import Rng

SCHEMA_VERSION = 1
CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    profile: PathProfile
    policy: tuple[int, ...]
    batches: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "policy", check_policy(self.policy, self.profile.l))
        if self.batches < 1:
            raise ValueError("need at least one batch")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass(frozen=True)
class Comparison:
    tv: float
    chi2: float | None
    dof: int


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    rank_counts: tuple[int, ...]
    empirical_h: tuple[float, ...]
    avg_rank: float
    batches_received: tuple[int, ...]  # nodes v_1 .. v_{l+1}
    packets_sent: tuple[int, ...]  # nodes v_1 .. v_l
    total_packets: int
    empirical_efficiency: float
    tv_distance_to_analytic: float
    analytic_h: tuple[float, ...]

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "schema_version": SCHEMA_VERSION,
            "config": {"q": cfg.profile.q, "M": cfg.profile.M, "eps": list(cfg.profile.eps),
                       "t": list(cfg.policy), "batches": cfg.batches, "seed": cfg.seed},
            "rank_counts": list(self.rank_counts),
            "empirical_h": list(self.empirical_h),
            "analytic_h": list(self.analytic_h),
            "avg_rank": self.avg_rank,
            "batches_received": list(self.batches_received),
            "packets_sent": list(self.packets_sent),
            "total_packets": self.total_packets,
            "empirical_efficiency": self.empirical_efficiency,
            "tv_distance_to_analytic": self.tv_distance_to_analytic,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "count", "empirical", "analytic"])
        for r, (c, e, a) in enumerate(zip(self.rank_counts, self.empirical_h, self.analytic_h)):
            w.writerow([r, c, repr(e), repr(a)])
        return buf.getvalue()


def simulate_batch(profile: PathProfile, policy: Sequence[int], rng: Rng) -> int:
    """Rank of one batch's sink transfer matrix, built by explicit matrix products.

    This is the slow, literal route; ``run_simulation`` uses the row-basis
    kernels instead.  Loss draws and coding draws use separate substreams.
    """
    t = check_policy(policy, profile.l)
    spec = profile.field
    loss, code = rng.spawn(0), rng.spawn(1)
    H = gf.identity(profile.M)
    for tk, ek in zip(t, profile.eps):
        D = gf.bernoulli_diag(tk, ek, loss)
        if not D.any():
            return 0
        Phi = gf.random_matrix(H.shape[1], tk, spec, code)
        H = gf.matmul(gf.matmul(H, Phi, spec), D, spec)
    return gf.rank(H, spec)


def _field(profile: PathProfile):
    return gf.field_ops(profile.field)


def simulate_ranks(config: SimConfig, jobs: int = 1, chunk: int = CHUNK) -> tuple[np.ndarray, np.ndarray]:
    """Per-batch sink ranks and hops survived, in batch order.

    Chunks are fixed by batch index, so the output does not depend on ``jobs``.
    """
    F = _field(config.profile)
    t = np.asarray(config.policy, dtype=np.int64)
    eps = np.asarray(config.profile.eps, dtype=np.float64)
    starts = list(range(0, config.batches, chunk))

    def work(s):
        n = min(chunk, config.batches - s)
        r, h = kernels.simulate_block(F, t, eps, config.profile.M, config.seed, s, n)
        return np.asarray(r, dtype=np.int64), np.asarray(h, dtype=np.int64)

    if jobs > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def run_simulation(config: SimConfig, jobs: int = 1) -> SimReport:
    prof, l = config.profile, config.profile.l
    ranks, reached = simulate_ranks(config, jobs)
    counts = np.bincount(ranks, minlength=prof.M + 1)
    h = counts / config.batches
    received = [config.batches] + [int(np.count_nonzero(reached >= k)) for k in range(1, l + 1)]
    sent = [int(tk) * received[k] for k, tk in enumerate(config.policy)]
    total = int(sum(sent))
    avg = average_rank(h)
    analytic = propagate(prof, config.policy)
    cmp = compare_distributions(counts, analytic)
    return SimReport(
        config=config,
        rank_counts=tuple(int(c) for c in counts),
        empirical_h=tuple(float(x) for x in h),
        avg_rank=avg,
        batches_received=tuple(received),
        packets_sent=tuple(sent),
        total_packets=total,
        empirical_efficiency=avg * config.batches / total,
        tv_distance_to_analytic=cmp.tv,
        analytic_h=tuple(float(x) for x in analytic),
    )


def compare_distributions(empirical, analytic, n: int | None = None, min_expected: float = 5.0) -> Comparison:
    """Total variation distance and Pearson chi-square.

    ``empirical`` may be counts (then ``n`` is their sum) or probabilities
    (then chi-square needs ``n``).  Cells whose expected count is below
    ``min_expected``, including zero-probability cells, are pooled into one.
    """
    e = np.asarray(empirical, dtype=float)
    a = np.asarray(analytic, dtype=float)
    if e.shape != a.shape:
        raise ValueError(f"distributions differ in length: {e.shape} vs {a.shape}")
    total = e.sum()
    if total > 1.0 + 1e-9:
        n = int(round(total))
        p = e / total
    else:
        p = e
    tv = 0.5 * float(np.abs(p - a).sum())
    if n is None:
        return Comparison(tv, None, 0)
    obs = p * n
    exp = a * n
    big = exp >= min_expected
    o = list(obs[big])
    x = list(exp[big])
    if (~big).any():
        o.append(obs[~big].sum())
        x.append(exp[~big].sum())
    chi2 = 0.0
    for oi, xi in zip(o, x):
        if xi > 0:
            chi2 += float((oi - xi) ** 2 / xi)
        elif oi > 0:
            chi2 = math.inf
    return Comparison(tv, float(chi2), max(len(o) - 1, 0))


def write_report(report: SimReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
