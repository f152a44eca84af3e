import json

import pytest
from hypothesis import given, settings, strategies as st

from bats_inner import tables as tb
from bats_inner.optimize import solve_ps

from .published import TABLE1, TABLE1_HOPS

GRID = tb.EpsGrid(0.10, 0.01, 3)


@pytest.fixture(scope="module")
def small():
    return tb.build_clt(256, 16, GRID, (2, 3, 4, 7), jobs=1)


def test_grid_values_are_exact_decimals():
    g = tb.EpsGrid.span(0.05, 0.35)
    assert g.count == 31
    assert g.values[-1] == 0.35 and g.value(5) == 0.10
    for bad in ((0.1, 0.01, 0), (0.1, -0.01, 3), (0.9, 0.1, 3), (-0.1, 0.1, 2)):
        with pytest.raises(tb.TableError):
            tb.EpsGrid(*bad)


def test_build_matches_published_rows(small):
    for i in range(3):
        expected = tuple(TABLE1[i][TABLE1_HOPS.index(h)] for h in small.hops)
        assert small.row(i) == expected


def test_build_is_independent_of_jobs(small):
    assert tb.build_clt(256, 16, GRID, (2, 3, 4, 7), jobs=2) == small


def test_cells_equal_per_hop_solver(small):
    assert small.cell(1, 3) == solve_ps(0.11, 7, 16, 256)


def test_monotone_check():
    bad = tb.LookupTable(2, 4, tb.EpsGrid(0.1, 0.01, 1), (2, 3), ((5, 4),))
    with pytest.raises(tb.TableError):
        tb.check_monotone(bad)
    tb.check_monotone(tb.LookupTable(2, 4, tb.EpsGrid(0.1, 0.01, 1), (2, 3), ((4, 5),)))


def test_adjacent_jumps_are_reported():
    t = tb.LookupTable(2, 4, tb.EpsGrid(0.1, 0.01, 2), (2, 3), ((4, 7), (4, 5)))
    assert tb.adjacent_jumps(t)


def test_refine_keeps_columns(small):
    r = tb.refine_table(small, (2, 7))
    assert r.hops == (2, 7)
    assert [row for row in r.cells] == [(row[0], row[3]) for row in small.cells]
    with pytest.raises(tb.TableError):
        tb.refine_table(small, (5,))


def test_query_rules(small):
    assert tb.query_table(small, 0.11, 3) == small.cell(1, 1)
    r = tb.lookup(small, 0.105, 3)  # rounds up to 0.11
    assert r.eps_used == 0.11 and r.notes
    r = tb.lookup(small, 0.11, 5)  # next larger tabulated hop count
    assert r.l_used == 7 and r.t == small.cell(1, 3)
    r = tb.lookup(small, 0.5, 40)
    assert (r.eps_used, r.l_used) == (0.12, 7) and len(r.notes) == 2
    r = tb.lookup(small, 0.01, 1)
    assert (r.eps_used, r.l_used) == (0.10, 2)
    assert tb.lookup(small, 0.12, 2).notes == ()
    with pytest.raises(ValueError):
        tb.lookup(small, 0.1, 0)


def test_published_row_run_lengths():
    t = tb.LookupTable(256, 16, tb.EpsGrid(0.10, 0.01, 1), TABLE1_HOPS, (TABLE1[0],))
    assert tb.compress_table(t).runs[0] == ((16, 1), (17, 2), (18, 4), (19, 10), (20, 2))


tables_st = st.builds(
    lambda rows, w: tb.LookupTable(2, 4, tb.EpsGrid(0.05, 0.01, len(rows)), tuple(range(2, 2 + w)),
                                   tuple(tuple(sorted(r[:w])) for r in rows)),
    st.lists(st.lists(st.integers(1, 30), min_size=8, max_size=8), min_size=1, max_size=6),
    st.integers(1, 8),
)


@settings(max_examples=60)
@given(tables_st)
def test_compression_round_trip(t):
    c = tb.compress_table(t)
    assert tb.decompress_table(c) == t
    for i in range(t.eps_grid.count):
        for l in range(1, 12):
            e = t.eps_grid.value(i)
            assert tb.query_table(c, e, l) == tb.query_table(t, e, l)
    assert tb.from_dict(json.loads(json.dumps(tb.to_dict(c)))) == c
    assert tb.from_dict(json.loads(json.dumps(tb.to_dict(t)))) == t


def test_constant_row_is_one_run():
    t = tb.LookupTable(2, 4, tb.EpsGrid(0.1, 0.01, 1), (2, 3, 4), ((7, 7, 7),))
    assert tb.compress_table(t).runs == (((7, 3),),)


def test_file_round_trip_and_errors(small, tmp_path):
    path = tmp_path / "t.json"
    tb.save_table(small, path)
    assert tb.load_table(path) == small
    doc = json.loads(path.read_text())
    assert doc["version"] == 1 and doc["compressed"] is False
    assert len(doc["cells"]) == 12
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(tb.TableError):
        tb.load_table(tmp_path / "bad.json")
    doc["cells"] = doc["cells"][:-1]
    with pytest.raises(tb.TableError):
        tb.from_dict(doc)
    with pytest.raises(tb.TableError):
        tb.from_dict({"version": 99})
    with pytest.raises(tb.TableError):
        tb.from_dict({"version": 1})
    with pytest.raises(FileNotFoundError):
        tb.load_table(tmp_path / "missing.json")


def test_csv_layout(small):
    lines = tb.to_csv(small).splitlines()
    assert lines[0] == "PLR,2,3,4,7"
    assert lines[1].startswith("0.10,16,17,17,18")
    fine = tb.LookupTable(2, 4, tb.EpsGrid(0.1, 0.005, 2), (2,), ((3,), (3,)))
    assert tb.to_csv(fine).splitlines()[2].startswith("0.105,")
