from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bats_inner import analytics as an
from bats_inner.analytics import PathProfile

# exact rational evaluation (propagate_exact with Fraction loss rates), frozen
FIG3_EXACT = {((0.2, 0.2), (18, 18)): 0.3734967377849885,
              ((0.2, 0.1), (18, 16)): 0.3996328915011695}


def test_zeta_small_values():
    assert an.zeta_n(0, 5, 2) == 1.0
    with pytest.raises(ValueError):
        an.zeta_n(3, 2, 2)
    assert an.zeta_n(1, 1, 2, exact=True) == Fraction(1, 2)
    # 2x2 over GF(2): 6 of 16 have full rank, 9 rank one
    assert an.zeta_nm(2, 2, 2, 2, exact=True) == Fraction(6, 16)
    assert an.zeta_nm(1, 2, 2, 2, exact=True) == Fraction(9, 16)


@pytest.mark.parametrize("q", [2, 3, 16, 256])
def test_zeta_rows_are_distributions(q):
    for n in range(1, 8):
        for m in range(1, 8):
            s = sum(an.zeta_nm(r, n, m, q) for r in range(min(n, m) + 1))
            assert s == pytest.approx(1.0, abs=1e-12)


def test_arrival_pmf_is_binomial():
    f = an.arrival_pmf_vector(10, 0.3)
    assert f.sum() == pytest.approx(1.0, abs=1e-14)
    assert f[10] == pytest.approx(0.7**10)
    big = an.arrival_pmf_vector(100, 0.2)
    assert big.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.dot(np.arange(101), big) == pytest.approx(80.0)


@pytest.mark.parametrize("q", [2, 4, 256])
def test_transition_matrix_is_lower_triangular_stochastic(q):
    P = an.transition_matrix(12, 0.25, 8, q)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(P >= -1e-15)
    assert np.allclose(np.triu(P, 1), 0.0)


def test_transition_matrix_exact_matches_float():
    P = an.transition_matrix(3, 0.25, 3, 3)
    Pe = an.transition_matrix_exact(3, Fraction(1, 4), 3, 3)
    assert np.allclose(P, np.array(Pe, dtype=float), atol=1e-14)


def test_source_distribution_is_point_mass_at_M():
    h = an.source_distribution(5)
    assert h[5] == 1.0 and h.sum() == 1.0


@pytest.mark.parametrize("key", list(FIG3_EXACT))
def test_fig3_efficiencies_frozen(key):
    eps, t = key
    assert an.efficiency(PathProfile(eps, 16, 256), t) == pytest.approx(FIG3_EXACT[key], abs=1e-12)


def test_fig3_packets_per_rank_labels():
    # the figure labels 2.68 and 2.50 are packets per unit of sink rank
    assert 1 / FIG3_EXACT[((0.2, 0.2), (18, 18))] == pytest.approx(2.68, abs=5e-3)
    assert 1 / FIG3_EXACT[((0.2, 0.1), (18, 16))] == pytest.approx(2.50, abs=5e-3)


def test_single_lossless_hop():
    p = PathProfile((0.0,), 4, 16)
    h = an.propagate(p, (6,))
    assert an.efficiency(p, (6,)) == pytest.approx(an.average_rank(h) / 6)


def test_lossless_extra_hop_lowers_efficiency():
    p2 = PathProfile((0.2, 0.2), 8, 2)
    p3 = PathProfile((0.2, 0.2, 0.0), 8, 2)
    assert an.efficiency(p3, (10, 10, 8)) < an.efficiency(p2, (10, 10))


def test_total_transmissions():
    total, n_k = an.total_transmissions(100, PathProfile((0.5,), 4), (5,))
    assert total == 500.0 and n_k == [100.0]
    total, n_k = an.total_transmissions(1, PathProfile((0.2, 0.2), 16), (18, 18))
    assert total == pytest.approx(36.0, abs=1e-9)
    total, n_k = an.total_transmissions(10, PathProfile((0.5, 0.5), 4), (2, 3))
    assert n_k == [10.0, 7.5]
    assert total == pytest.approx(10 * 2 + 7.5 * 3)
    with pytest.raises(ValueError):
        an.total_transmissions(0, PathProfile((0.5,), 4), (5,))


def test_lossy_first_hop_kills_downstream_cost():
    total, _ = an.total_transmissions(1, PathProfile((0.999999, 0.1, 0.1), 4), (1, 50, 50))
    assert total == pytest.approx(1.0 + 100 * 1e-6, rel=1e-3)


def test_validation():
    with pytest.raises(ValueError):
        PathProfile((), 4)
    with pytest.raises(ValueError):
        PathProfile((1.0,), 4)
    with pytest.raises(ValueError):
        PathProfile((0.1,), 0)
    with pytest.raises(ValueError):
        PathProfile((0.1,), 4, 6)
    with pytest.raises(ValueError):
        an.check_policy((0, 3))
    with pytest.raises(ValueError):
        an.check_policy((2.5,))
    with pytest.raises(ValueError):
        an.check_policy((2, 3), 3)
    with pytest.raises(ValueError):
        an.propagate(PathProfile((0.1,), 4), (3,), method="magic")


profiles = st.builds(
    lambda M, q, eps, t: (PathProfile(tuple(eps), M, q), tuple(t[: len(eps)])),
    st.integers(1, 24), st.sampled_from([2, 16, 256]),
    st.lists(st.floats(0.05, 0.35), min_size=1, max_size=20),
    st.lists(st.integers(1, 40), min_size=20, max_size=20),
)


@settings(max_examples=60, deadline=None)
@given(profiles)
def test_recursion_and_eigen_routes_agree(case):
    p, t = case
    a = an.propagate_recursion(p, t)
    b = an.propagate_eigen(p, t)
    assert np.max(np.abs(a - b)) < 1e-9
    assert a.sum() == pytest.approx(1.0, abs=1e-12)
    assert an.average_rank(a) == pytest.approx(an.sink_average_rank(p, t), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(profiles)
def test_eigendecomposition_reconstructs_transition_matrix(case):
    p, t = case
    k = 1 + len(t) // 2
    es = an.eigensystem(p, t, k)
    P = an.transition_matrix(t[k - 1], p.eps[k - 1], p.M, p.q)
    assert np.max(np.abs(es.reconstruct() - P)) < 1e-9


def test_eigensystem_hop_index_checked():
    with pytest.raises(ValueError):
        an.eigensystem(PathProfile((0.1,), 4), (3,), 2)


@pytest.mark.parametrize("M,t,eps", [(4, (5, 6), (0.1, 0.3)), (8, (8, 8, 8), (0.2, 0.2, 0.2)),
                                     (3, (2, 4), (0.3, 0.05))])
def test_average_rank_grows_with_field_size(M, t, eps):
    ranks = [an.sink_average_rank(PathProfile(eps, M, q), t) for q in (2, 16, 256)]
    assert ranks[0] < ranks[1] < ranks[2] < M


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.sampled_from([2, 3, 16]),
       st.lists(st.tuples(st.floats(0.0, 0.6), st.integers(1, 10)), min_size=1, max_size=4),
       st.data())
def test_rank_tails_grow_with_any_single_t(M, q, hops, data):
    eps = tuple(e for e, _ in hops)
    t = [x for _, x in hops]
    k = data.draw(st.integers(0, len(t) - 1))
    bumped = list(t)
    bumped[k] += data.draw(st.integers(1, 5))
    p = PathProfile(eps, M, q)
    tail = np.cumsum(an.propagate(p, t)[::-1])[::-1]
    tail_b = np.cumsum(an.propagate(p, bumped)[::-1])[::-1]
    assert np.all(tail_b >= tail - 1e-12)


def test_propagation_never_adds_mass_above_support():
    # after a hop with t=2 the rank is at most 2, and later hops cannot raise it
    h = an.propagate(PathProfile((0.1, 0.1), 6, 16), (2, 9))
    assert np.allclose(h[3:], 0.0)


def test_exact_rational_route_matches_float():
    h = an.propagate_exact([Fraction(1, 3), Fraction(1, 5)], [3, 2], 3, 3)
    assert sum(h) == 1
    f = an.propagate(PathProfile((1 / 3, 1 / 5), 3, 3), (3, 2))
    assert np.allclose(np.array(h, dtype=float), f, atol=1e-14)
