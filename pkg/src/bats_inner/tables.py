"""Look-up tables mapping (loss rate, hop count) to a per-node packet count.

A complete table (CLT) holds ``solve_ps`` for every grid cell; the refined
table (RLT) keeps a handful of hop columns, and a node that only knows an
approximate hop count reads the next larger column.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .optimize import solve_ps_row

FORMAT_VERSION = 1
REFINED_HOPS = (2, 4, 7, 11, 16, 20)
_EPS_DIGITS = 10


class TableError(ValueError):
    """Malformed table or a table that violates its invariants."""


@dataclass(frozen=True)
class EpsGrid:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise TableError("the loss-rate grid needs at least one point")
        if self.count > 1 and self.step <= 0:
            raise TableError("the loss-rate grid step must be positive")
        if self.start < 0 or self.value(self.count - 1) >= 1.0:
            raise TableError("grid loss rates must lie in [0, 1)")

    def value(self, i: int) -> float:
        return round(self.start + i * self.step, _EPS_DIGITS)

    @property
    def values(self) -> list[float]:
        return [self.value(i) for i in range(self.count)]

    @classmethod
    def span(cls, lo: float, hi: float, step: float = 0.01) -> "EpsGrid":
        return cls(lo, step, int(round((hi - lo) / step)) + 1)


@dataclass(frozen=True)
class LookupTable:
    q: int
    M: int
    eps_grid: EpsGrid
    hops: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]  # cells[i][j]: eps index i, hop index j

    def __post_init__(self):
        if not self.hops:
            raise TableError("empty hop grid")
        if list(self.hops) != sorted(set(self.hops)):
            raise TableError("hop grid must be strictly increasing")
        if len(self.cells) != self.eps_grid.count or any(len(r) != len(self.hops) for r in self.cells):
            raise TableError("cell array does not match the grid shape")

    def cell(self, eps_index: int, hop_index: int) -> int:
        return self.cells[eps_index][hop_index]

    def row(self, eps_index: int) -> tuple[int, ...]:
        return self.cells[eps_index]


@dataclass(frozen=True)
class CompressedTable:
    """Run-length form: per loss-rate row, ``(value, run_length)`` pairs over the hop grid."""

    q: int
    M: int
    eps_grid: EpsGrid
    hops: tuple[int, ...]
    runs: tuple[tuple[tuple[int, int], ...], ...]


@dataclass(frozen=True)
class QueryResult:
    t: int
    eps_used: float
    l_used: int
    notes: tuple[str, ...] = field(default=())


# -- construction ---------------------------------------------------------------

def _row_job(args):
    eps, hops, M, q = args
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        row = solve_ps_row(eps, hops, M, q)
    return row, [str(w.message) for w in caught]


def check_monotone(table: LookupTable) -> None:
    """Optimal counts never decrease with hop count along a row."""
    for i, row in enumerate(table.cells):
        for j in range(1, len(row)):
            if row[j] < row[j - 1]:
                raise TableError(
                    f"row eps={table.eps_grid.value(i)} decreases from l={table.hops[j - 1]} "
                    f"to l={table.hops[j]} ({row[j - 1]} -> {row[j]})")


def adjacent_jumps(table: LookupTable) -> list[tuple[int, int, str]]:
    """Cells whose right or lower neighbour differs by more than 1."""
    out = []
    c = table.cells
    for i in range(len(c)):
        for j in range(len(c[i])):
            if j + 1 < len(c[i]) and abs(c[i][j + 1] - c[i][j]) > 1:
                out.append((i, j, "hop"))
            if i + 1 < len(c) and abs(c[i + 1][j] - c[i][j]) > 1:
                out.append((i, j, "eps"))
    return out


def build_clt(q: int, M: int, eps_grid: EpsGrid, hops: Sequence[int], jobs: int = 1) -> LookupTable:
    """Solve PS for every (loss rate, hop count) cell; rows run in parallel when ``jobs > 1``."""
    hops = tuple(int(l) for l in hops)
    if not hops:
        raise TableError("empty hop grid")
    tasks = [(e, hops, M, q) for e in eps_grid.values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
            results = list(ex.map(_row_job, tasks))
    else:
        results = [_row_job(t) for t in tasks]
    for _, msgs in results:
        for m in msgs:
            warnings.warn(m, RuntimeWarning)
    table = LookupTable(q, M, eps_grid, hops, tuple(tuple(r) for r, _ in results))
    check_monotone(table)
    jumps = adjacent_jumps(table)
    if jumps:
        warnings.warn(f"{len(jumps)} adjacent cell pairs differ by more than 1", RuntimeWarning)
    return table


def refine_table(table: LookupTable, hops: Sequence[int] = REFINED_HOPS) -> LookupTable:
    """Keep only the listed hop columns."""
    idx = []
    for l in hops:
        if l not in table.hops:
            raise TableError(f"hop column {l} missing from the table")
        idx.append(table.hops.index(l))
    cells = tuple(tuple(row[j] for j in idx) for row in table.cells)
    return LookupTable(table.q, table.M, table.eps_grid, tuple(hops), cells)


# -- lookup -------------------------------------------------------------------

def _resolve(grid: EpsGrid, hops: Sequence[int], eps: float, l: int) -> tuple[int, int, list[str]]:
    notes = []
    pos = (eps - grid.start) / grid.step if grid.count > 1 else 0.0
    i = math.ceil(round(pos, 9))  # round up to the next grid point; exact hits stay put
    if i < 0:
        notes.append(f"eps={eps} below the grid; clamped to {grid.value(0)}")
        i = 0
    elif i >= grid.count:
        notes.append(f"eps={eps} above the grid; clamped to {grid.value(grid.count - 1)}")
        i = grid.count - 1
    elif abs(grid.value(i) - eps) > 1e-12:
        notes.append(f"eps={eps} rounded up to {grid.value(i)}")
    j = next((k for k, h in enumerate(hops) if h >= l), None)
    if j is None:
        j = len(hops) - 1
        notes.append(f"l={l} beyond the hop grid; using l={hops[j]}")
    elif hops[j] != l:
        notes.append(f"l={l} not tabulated; using the next larger l={hops[j]}")
    return i, j, notes


def lookup(table: LookupTable | CompressedTable, eps: float, l: int) -> QueryResult:
    if l < 1:
        raise ValueError("hop count must be >= 1")
    i, j, notes = _resolve(table.eps_grid, table.hops, eps, l)
    if isinstance(table, CompressedTable):
        t = _run_value(table.runs[i], j)
    else:
        t = table.cell(i, j)
    return QueryResult(t, table.eps_grid.value(i), table.hops[j], tuple(notes))


def query_table(table: LookupTable | CompressedTable, eps: float, l: int) -> int:
    return lookup(table, eps, l).t


# -- compression ----------------------------------------------------------------

def _run_value(runs, j: int) -> int:
    for value, n in runs:
        if j < n:
            return value
        j -= n
    raise TableError("hop index beyond the encoded row")


def compress_table(table: LookupTable) -> CompressedTable:
    rows = []
    for row in table.cells:
        runs: list[list[int]] = []
        for v in row:
            if runs and runs[-1][0] == v:
                runs[-1][1] += 1
            else:
                runs.append([v, 1])
        rows.append(tuple((v, n) for v, n in runs))
    return CompressedTable(table.q, table.M, table.eps_grid, table.hops, tuple(rows))


def decompress_table(table: CompressedTable) -> LookupTable:
    cells = tuple(tuple(v for v, n in runs for _ in range(n)) for runs in table.runs)
    return LookupTable(table.q, table.M, table.eps_grid, table.hops, cells)


# -- files ----------------------------------------------------------------------

def to_dict(table: LookupTable | CompressedTable) -> dict:
    g = table.eps_grid
    out = {"version": FORMAT_VERSION, "q": table.q, "M": table.M,
           "eps_start": g.start, "eps_step": g.step, "eps_count": g.count,
           "hops": list(table.hops)}
    if isinstance(table, CompressedTable):
        out.update(cells=None, compressed=True, runs=[[list(r) for r in row] for row in table.runs])
    else:
        out.update(cells=[v for row in table.cells for v in row], compressed=False, runs=None)
    return out


def from_dict(d: dict) -> LookupTable | CompressedTable:
    try:
        if d["version"] != FORMAT_VERSION:
            raise TableError(f"unsupported table version {d['version']}")
        grid = EpsGrid(float(d["eps_start"]), float(d["eps_step"]), int(d["eps_count"]))
        hops = tuple(int(h) for h in d["hops"])
        q, M = int(d["q"]), int(d["M"])
        if d.get("compressed"):
            runs = tuple(tuple((int(v), int(n)) for v, n in row) for row in d["runs"])
            if len(runs) != grid.count or any(sum(n for _, n in r) != len(hops) for r in runs):
                raise TableError("run lengths do not match the grid shape")
            return CompressedTable(q, M, grid, hops, runs)
        flat = [int(v) for v in d["cells"]]
        if len(flat) != grid.count * len(hops):
            raise TableError("cell count does not match the grid shape")
        w = len(hops)
        cells = tuple(tuple(flat[i * w:(i + 1) * w]) for i in range(grid.count))
        return LookupTable(q, M, grid, hops, cells)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TableError):
            raise
        raise TableError(f"malformed table document: {exc}") from exc


def save_table(table: LookupTable | CompressedTable, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(table), fh, indent=1)
        fh.write("\n")


def load_table(path: str | os.PathLike) -> LookupTable | CompressedTable:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TableError(f"{path}: not valid JSON ({exc})") from exc
    return from_dict(d)


def _step_digits(step: float) -> int:
    """Decimals needed to print grid values without losing the step (at least 2)."""
    for d in range(2, _EPS_DIGITS + 1):
        if abs(round(step, d) - step) < 1e-12:
            return d
    return _EPS_DIGITS


def to_csv(table: LookupTable | CompressedTable) -> str:
    """Layout of the published tables: a header of hop counts, then one row per loss rate."""
    if isinstance(table, CompressedTable):
        table = decompress_table(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["PLR", *table.hops])
    digits = _step_digits(table.eps_grid.step)
    for i, row in enumerate(table.cells):
        w.writerow([f"{table.eps_grid.value(i):.{digits}f}", *row])
    return buf.getvalue()
