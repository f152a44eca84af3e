"""Command-line front end: ``bats-inner <command> ...``.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 file problem.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from typing import Any

from . import __version__
from .analytics import (PathProfile, average_rank, efficiency, expected_packets, propagate,
                        total_transmissions)
from .bound import approx_average_rank, approx_rank_distribution, pu_objective, solve_upper_bound
from .optimize import pa_objective, solve_centralized, solve_pa, solve_ps
from .sim import SimConfig, run_simulation
from .tables import (REFINED_HOPS, EpsGrid, LookupTable, TableError, build_clt, compress_table, decompress_table,
                     load_table, lookup, refine_table, save_table, to_csv)
from . import reproduce as rep

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 2, 3, 4
DEFAULT_TRIALS = 10_000
DEFAULT_REPRODUCE_TRIALS = 200


class UsageError(Exception):
    pass


class FileProblem(Exception):
    pass


# -- argument helpers -----------------------------------------------------------

def _floats(s: str) -> list[float]:
    try:
        return [float(x) for x in s.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _ints(s: str) -> list[int]:
    out = []
    try:
        for part in s.replace(" ", "").split(","):
            if not part:
                continue
            if "-" in part:
                a, b = part.split("-")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers or ranges like 2-20, got {s!r}")
    return out


def _default_seed() -> int:
    env = os.environ.get("BATS_SEED")
    if env is None:
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"BATS_SEED must be an integer, got {env!r}")


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileProblem(f"{path}: not valid JSON ({exc})") from exc


def _load_table(path: str):
    try:
        return load_table(path)
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from exc
    except TableError as exc:
        msg = str(exc)
        raise FileProblem(msg if msg.startswith(str(path)) else f"{path}: {msg}") from exc


def resolve_scenario(args) -> dict:
    """Merge the scenario file (if any) with flags; flags win."""
    sc: dict = {}
    if getattr(args, "scenario", None):
        data = _load_json(args.scenario)
        if not isinstance(data, dict):
            raise FileProblem(f"{args.scenario}: scenario must be a JSON object")
        unknown = set(data) - {"q", "M", "eps", "t", "n1", "seed", "trials"}
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        sc.update(data)
    for key in ("q", "M", "eps", "t", "n1", "seed", "trials"):
        v = getattr(args, key, None)
        if v is not None:
            sc[key] = v
    sc.setdefault("q", 256)
    sc.setdefault("M", 16)
    sc.setdefault("n1", 1)
    sc.setdefault("trials", DEFAULT_TRIALS)
    if "seed" not in sc:
        sc["seed"] = _default_seed()
    if isinstance(sc.get("eps"), (int, float)):
        sc["eps"] = [sc["eps"]]
    if "t" in sc and isinstance(sc["t"], int):
        sc["t"] = [sc["t"]]
    if "eps" not in sc:
        raise UsageError("loss rates are required (--eps or a scenario file)")
    if "t" in sc and len(sc["t"]) != len(sc["eps"]):
        raise ValueError(f"{len(sc['t'])} packet counts given for {len(sc['eps'])} hops")
    return sc


def _profile(sc: dict) -> PathProfile:
    return PathProfile(tuple(float(e) for e in sc["eps"]), int(sc["M"]), int(sc["q"]))


def _need_t(sc: dict) -> tuple[int, ...]:
    if "t" not in sc:
        raise UsageError("packet counts are required (--t or a scenario file)")
    return tuple(int(x) for x in sc["t"])


# -- output -----------------------------------------------------------------------

def _fmt(args) -> str:
    if args.format:
        return args.format
    return "text" if sys.stdout.isatty() and not args.out else "json"


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        elif isinstance(v, (list, tuple)):
            sep = "; " if v and all(isinstance(x, str) for x in v) else " "
            lines.append(f"{pad}{k}: " + sep.join(_short(x) for x in v))
        else:
            lines.append(f"{pad}{k}: {_short(v)}")
    return "\n".join(lines)


def _short(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return "(" + ",".join(_short(y) for y in x) + ")"
    return str(x)


def _csv_rows(obj: dict) -> str:
    flat = {k: v for k, v in obj.items() if not isinstance(v, dict)}
    keys = list(flat)
    vals = [";".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v) for v in flat.values()]
    return ",".join(keys) + "\n" + ",".join(vals) + "\n"


def emit(args, payload: dict, csv_text: str | None = None) -> None:
    fmt = _fmt(args)
    if fmt == "json":
        text = json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=1) + "\n"
    elif fmt == "csv":
        text = csv_text if csv_text is not None else _csv_rows(payload)
    else:
        text = _text(payload) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise FileProblem(f"{args.out}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _config(sc: dict, keys=("q", "M", "eps", "t"), **extra) -> dict:
    cfg = {k: sc[k] for k in keys if k in sc}
    cfg.update(extra)
    return cfg


# -- commands -----------------------------------------------------------------------

def cmd_analyze(args) -> int:
    sc = resolve_scenario(args)
    p, t = _profile(sc), _need_t(sc)
    total, n_k = total_transmissions(float(sc["n1"]), p, t)
    if args.approx:
        h = approx_rank_distribution(p, t)
        avg = approx_average_rank(p, t)
        eta = pu_objective(p, t)
    else:
        h = propagate(p, t, method="both")
        avg = average_rank(h)
        eta = efficiency(p, t)
    payload = {
        "config": _config(sc, ("q", "M", "eps", "t", "n1"), approx=bool(args.approx)),
        "rank_distribution": [float(x) for x in h],
        "average_rank": float(avg),
        "efficiency": float(eta),
        "packets_per_batch": expected_packets(p.eps, t),
        "batches_sent_per_node": n_k,
        "total_transmissions": total,
    }
    csv_text = "rank,probability\n" + "".join(f"{r},{float(x)!r}\n" for r, x in enumerate(h))
    emit(args, payload, csv_text)
    return EXIT_OK


def cmd_optimize(args) -> int:
    sc = resolve_scenario(args)
    mode = args.mode
    if mode == "ps":
        if len(sc["eps"]) != 1:
            raise UsageError("--mode ps takes a single loss rate")
        if not args.hops:
            raise UsageError("--mode ps needs --hops")
        t = solve_ps(float(sc["eps"][0]), args.hops, int(sc["M"]), int(sc["q"]))
        p = PathProfile((float(sc["eps"][0]),) * args.hops, int(sc["M"]), int(sc["q"]))
        policy = (t,) * args.hops
    else:
        p = _profile(sc)
        notes = []
        if mode == "centralized":
            policy = solve_centralized(p).policy
        elif mode == "pa":
            policy = solve_pa(p)
        else:
            if not args.table:
                raise UsageError("--mode table needs --table PATH")
            table = _load_table(args.table)
            res = [lookup(table, e, p.l) for e in p.eps]
            policy = tuple(r.t for r in res)
            notes = sorted({n for r in res for n in r.notes})
    bound = solve_upper_bound(p)
    eta = efficiency(p, policy)
    gap = (bound.value - eta) / bound.value if bound.value > 0 else 0.0
    if gap < -1e-9:
        raise AssertionError(f"bound {bound.value} below achieved efficiency {eta}")
    payload = {"config": _config(sc, mode=mode, hops=p.l), "policy": list(policy), "objective": eta,
               "bound": bound.value, "gap": gap}
    if mode == "pa":
        payload["pa_objective"] = pa_objective(p, policy)
    if mode == "table" and notes:
        payload["notes"] = notes
    emit(args, payload)
    return EXIT_OK


def cmd_bound(args) -> int:
    sc = resolve_scenario(args)
    p = _profile(sc)
    b = solve_upper_bound(p, starts=args.starts, seed=int(sc["seed"]))
    payload = {"config": _config(sc, ("q", "M", "eps", "seed")), "t_star": list(b.t_star), "value": b.value,
               "iterations": b.iterations, "converged": b.converged}
    emit(args, payload)
    return EXIT_OK


def _grid_from_args(args) -> EpsGrid:
    if args.eps_step <= 0:
        raise UsageError("--eps-step must be positive")
    if args.eps_stop < args.eps_start:
        raise UsageError("--eps-stop is below --eps-start")
    try:
        return EpsGrid.span(args.eps_start, args.eps_stop, args.eps_step)
    except TableError as exc:
        raise UsageError(str(exc)) from exc


def _write_table(table, path: str) -> None:
    try:
        save_table(table, path)
    except OSError as exc:
        raise FileProblem(f"{path}: {exc.strerror or exc}") from exc


def cmd_table(args) -> int:
    sub = args.table_cmd
    if sub == "build":
        if not args.hops:
            raise UsageError("--hops must list at least one hop count")
        table = build_clt(args.q, args.M, _grid_from_args(args), args.hops, jobs=args.jobs)
        if args.table_out:
            _write_table(table, args.table_out)
        emit(args, {"table": _summary(table, args.table_out)}, to_csv(table))
    elif sub == "refine":
        table = _load_table(args.table)
        if not isinstance(table, LookupTable):
            table = decompress_table(table)
        try:
            refined = refine_table(table, args.hops or REFINED_HOPS)
        except TableError as exc:
            raise ValueError(str(exc)) from exc
        if args.table_out:
            _write_table(refined, args.table_out)
        emit(args, {"table": _summary(refined, args.table_out)}, to_csv(refined))
    elif sub == "query":
        table = _load_table(args.table)
        r = lookup(table, args.eps_value, args.l)
        emit(args, {"t": r.t, "eps_used": r.eps_used, "l_used": r.l_used, "notes": list(r.notes),
                    "config": {"table": args.table, "eps": args.eps_value, "l": args.l}},
             f"t\n{r.t}\n")
    elif sub == "compress":
        table = _load_table(args.table)
        if not isinstance(table, LookupTable):
            table = decompress_table(table)
        comp = compress_table(table)
        if args.table_out:
            _write_table(comp, args.table_out)
        runs = sum(len(r) for r in comp.runs)
        emit(args, {"cells": len(table.cells) * len(table.hops), "runs": runs,
                    "output": args.table_out}, to_csv(table))
    elif sub == "export":
        emit(args, {"table": _summary(_load_table(args.table), args.table)}, to_csv(_load_table(args.table)))
    return EXIT_OK


def _summary(table, path) -> dict:
    g = table.eps_grid
    return {"q": table.q, "M": table.M, "eps_start": g.start, "eps_step": g.step, "eps_count": g.count,
            "hops": list(table.hops), "path": path}


def cmd_simulate(args) -> int:
    sc = resolve_scenario(args)
    p, t = _profile(sc), _need_t(sc)
    trials = int(sc["trials"])
    if trials < 1:
        raise ValueError("trials must be >= 1")
    report = run_simulation(SimConfig(p, t, trials, int(sc["seed"])), jobs=args.jobs)
    d = report.to_dict()
    d.pop("schema_version")
    emit(args, d, report.histogram_csv())
    return EXIT_OK


def cmd_reproduce(args) -> int:
    target = args.target
    if target in ("table1", "table2"):
        table = rep.table1(args.jobs) if target == "table1" else rep.table2(args.jobs)
        emit(args, {"target": target, "table": _summary(table, None), "cells": [list(r) for r in table.cells]},
             to_csv(table))
    elif target == "fig3":
        rows = rep.fig3()
        emit(args, {"target": target, "cases": [{**r, "eps": list(r["eps"]), "t": list(r["t"])} for r in rows]},
             rep.fig3_csv())
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        trials = args.trials if args.trials is not None else DEFAULT_REPRODUCE_TRIALS
        if trials < 1:
            raise ValueError("trials must be >= 1")
        Ms = args.M_list or list(rep.CAMPAIGN_M)
        hops = args.hops or list(rep.CAMPAIGN_HOPS)
        pts = rep.campaign(Ms, hops, trials, seed, with_bound=(target == "efficiency-curve"))
        csv_text = rep.efficiency_csv(pts) if target == "efficiency-curve" else rep.avg_rank_csv(pts)
        payload = {"target": target, "config": {"M": Ms, "hops": hops, "trials": trials, "seed": seed},
                   "points": [{"M": p.M, "l": p.l, "eta": p.eta, "gap": p.gap, "rank": p.rank} for p in pts]}
        emit(args, payload, csv_text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def _add_output(p):
    p.add_argument("--format", choices=("text", "json", "csv"), help="output format (default: text on a terminal, else JSON)")
    p.add_argument("--out", help="write output to this file instead of stdout")


def _add_scenario(p, trials=False):
    p.add_argument("--scenario", help="JSON scenario file; flags override its values")
    p.add_argument("--q", type=int, help="field size (default 256)")
    p.add_argument("--M", type=int, help="batch size (default 16)")
    p.add_argument("--eps", type=_floats, help="per-hop loss rates, comma separated")
    p.add_argument("--t", type=_ints, help="per-hop packet counts, comma separated")
    p.add_argument("--seed", type=int, help="master seed (default $BATS_SEED or 0)")
    if trials:
        p.add_argument("--trials", type=int, help=f"number of batches (default {DEFAULT_TRIALS})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bats-inner", description="Inner-code analysis and recoding-policy optimization for BATS codes on lossy line networks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="exact rank distribution, average rank and efficiency")
    _add_scenario(p)
    p.add_argument("--n1", type=float, help="source batch count for the transmission total (default 1)")
    p.add_argument("--approx", action="store_true", help="use the large-field approximation")
    _add_output(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="choose packet counts per hop")
    _add_scenario(p)
    p.add_argument("--mode", choices=("centralized", "pa", "ps", "table"), default="centralized")
    p.add_argument("--hops", type=int, help="hop count for --mode ps")
    p.add_argument("--table", help="look-up table file for --mode table")
    _add_output(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("bound", help="continuous upper bound on the efficiency")
    _add_scenario(p)
    p.add_argument("--starts", type=int, default=8, help="multistart count (default 8)")
    _add_output(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("table", help="build, refine, query or compress look-up tables")
    tsub = p.add_subparsers(dest="table_cmd", required=True)
    b = tsub.add_parser("build", help="solve every (loss rate, hop count) cell")
    b.add_argument("--q", type=int, default=256)
    b.add_argument("--M", type=int, default=16)
    b.add_argument("--eps-start", type=float, default=0.05)
    b.add_argument("--eps-stop", type=float, default=0.35)
    b.add_argument("--eps-step", type=float, default=0.01)
    b.add_argument("--hops", type=_ints, default=list(range(2, 21)), help="hop counts, e.g. 2-20")
    b.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    b.add_argument("--table-out", help="write the table JSON here")
    _add_output(b)
    r = tsub.add_parser("refine", help="keep a subset of hop columns")
    r.add_argument("--table", required=True)
    r.add_argument("--hops", type=_ints, help="columns to keep (default 2,4,7,11,16,20)")
    r.add_argument("--table-out")
    _add_output(r)
    q = tsub.add_parser("query", help="look up one cell")
    q.add_argument("--table", required=True)
    q.add_argument("--eps", dest="eps_value", type=float, required=True)
    q.add_argument("--l", type=int, required=True)
    _add_output(q)
    c = tsub.add_parser("compress", help="run-length encode each row")
    c.add_argument("--table", required=True)
    c.add_argument("--table-out")
    _add_output(c)
    e = tsub.add_parser("export", help="print a table file in the published layout")
    e.add_argument("--table", required=True)
    _add_output(e)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="Monte Carlo simulation over GF(q)")
    _add_scenario(p, trials=True)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="regenerate published tables and figure data")
    p.add_argument("target", choices=("table1", "table2", "fig3", "efficiency-curve", "avg-rank-curve"))
    p.add_argument("--trials", type=int, help=f"random loss-rate draws per point (default {DEFAULT_REPRODUCE_TRIALS})")
    p.add_argument("--seed", type=int)
    p.add_argument("--M-list", type=_ints, help="batch sizes (default 12,16,20,24)")
    p.add_argument("--hops", type=_ints, help="hop counts (default 2-20)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_output(p)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except UsageError as exc:
        print(f"bats-inner: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileProblem as exc:
        print(f"bats-inner: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ZeroDivisionError) as exc:
        print(f"bats-inner: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
