"""Regenerate the published tables, the two-hop example and the l-sweep campaigns."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .analytics import PathProfile, efficiency, sink_average_rank
from .bound import solve_upper_bound
from .optimize import solve_centralized, solve_pa
from .rng import Rng, derive_seed
from .tables import EpsGrid, LookupTable, build_clt, query_table, refine_table, to_csv

TABLE1_GRID = EpsGrid(0.10, 0.01, 11)
TABLE1_HOPS = tuple(range(2, 21))
FIG3_CASES = ((0.2, 0.2), (0.2, 0.1))
CAMPAIGN_EPS = (0.05, 0.35)
CAMPAIGN_HOPS = tuple(range(2, 21))
CAMPAIGN_M = (12, 16, 20, 24)
METHODS = ("pa", "clt", "rlt", "obats")


def table1(jobs: int = 1) -> LookupTable:
    return build_clt(256, 16, TABLE1_GRID, TABLE1_HOPS, jobs=jobs)


def table2(jobs: int = 1) -> LookupTable:
    return refine_table(table1(jobs))


def fig3() -> list[dict]:
    rows = []
    for eps in FIG3_CASES:
        p = PathProfile(eps, 16, 256)
        rep = solve_centralized(p)
        rows.append({"eps": eps, "t": rep.policy, "eta": rep.objective,
                     "packets_per_rank": 1.0 / rep.objective, "bound": rep.bound, "gap": rep.gap})
    return rows


def fig3_csv() -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps1", "eps2", "t1", "t2", "eta", "packets_per_rank", "bound", "gap"])
    for r in fig3():
        w.writerow([*r["eps"], *r["t"], repr(r["eta"]), repr(r["packets_per_rank"]),
                    repr(r["bound"]), repr(r["gap"])])
    return buf.getvalue()


def random_profile(seed: int, M: int, l: int, trial: int, q: int = 256,
                   lo: float = CAMPAIGN_EPS[0], hi: float = CAMPAIGN_EPS[1]) -> PathProfile:
    rng = Rng(derive_seed(seed, M, l, trial))
    return PathProfile(tuple(lo + (hi - lo) * rng.uniform() for _ in range(l)), M, q)


@dataclass(frozen=True)
class CurvePoint:
    M: int
    l: int
    trials: int
    eta: dict  # method -> mean efficiency
    gap: dict  # method -> mean relative gap to the bound (empty without the bound)
    rank: dict  # method -> mean sink average rank


def campaign(Ms: Iterable[int] = CAMPAIGN_M, hops: Sequence[int] = CAMPAIGN_HOPS, trials: int = 200,
             seed: int = 0, q: int = 256, with_bound: bool = True) -> list[CurvePoint]:
    """Mean efficiency, gap to the bound and sink rank over random loss-rate draws.

    The look-up tables cover loss rates 0.05..0.35 in steps of 0.01 and the
    swept hop counts; each node looks up its own outgoing loss rate.
    """
    out = []
    for M in Ms:
        clt = build_clt(q, M, EpsGrid.span(*CAMPAIGN_EPS), tuple(hops))
        rlt = refine_table(clt, [h for h in (2, 4, 7, 11, 16, 20) if h in clt.hops] or clt.hops)
        for l in hops:
            eta = {m: [] for m in METHODS + ("upper",)}
            rank = {m: [] for m in METHODS}
            gap = {m: [] for m in METHODS}
            for i in range(trials):
                p = random_profile(seed, M, l, i, q)
                policies = {
                    "pa": solve_pa(p),
                    "clt": tuple(query_table(clt, e, l) for e in p.eps),
                    "rlt": tuple(query_table(rlt, e, l) for e in p.eps),
                    "obats": (M,) * l,
                }
                ub = solve_upper_bound(p).value if with_bound else None
                if ub is not None:
                    eta["upper"].append(ub)
                for m, t in policies.items():
                    e = efficiency(p, t)
                    eta[m].append(e)
                    rank[m].append(sink_average_rank(p, t))
                    if ub is not None:
                        gap[m].append((ub - e) / ub)
            out.append(CurvePoint(
                M, l, trials,
                {m: float(np.mean(v)) for m, v in eta.items() if v},
                {m: float(np.mean(v)) for m, v in gap.items() if v},
                {m: float(np.mean(v)) for m, v in rank.items()},
            ))
    return out


def efficiency_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["M", "l", "trials", "eta_upper", *(f"eta_{m}" for m in METHODS),
                *(f"gap_{m}" for m in METHODS), "obats_reduction"])
    for pt in points:
        red = (pt.eta["upper"] - pt.eta["obats"]) / pt.eta["obats"]
        w.writerow([pt.M, pt.l, pt.trials, repr(pt.eta["upper"]), *(repr(pt.eta[m]) for m in METHODS),
                    *(repr(pt.gap[m]) for m in METHODS), repr(red)])
    return buf.getvalue()


def avg_rank_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["M", "l", "trials", *(f"rank_{m}" for m in METHODS)])
    for pt in points:
        w.writerow([pt.M, pt.l, pt.trials, *(repr(pt.rank[m]) for m in METHODS)])
    return buf.getvalue()


def table_csv(target: str, jobs: int = 1) -> str:
    return to_csv(table1(jobs) if target == "table1" else table2(jobs))
