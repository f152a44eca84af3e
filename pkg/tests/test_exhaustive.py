from fractions import Fraction

import pytest

from bats_inner.analytics import propagate_exact
from bats_inner.exhaustive import sink_rank_distribution


def test_single_packet_single_hop_gf2():
    # H = [1], phi uniform on {0, 1}: rank 1 exactly when phi = 1
    assert sink_rank_distribution([0], [1], 1, 2) == [Fraction(1, 2), Fraction(1, 2)]


def test_total_loss_is_rank_zero():
    h = sink_rank_distribution([Fraction(1)], [2], 2, 2)
    assert h == [1, 0, 0]


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("t", [(1,), (3,), (2, 2), (3, 1)])
def test_matches_recursion_exactly(q, t):
    eps = [Fraction(1, 3), Fraction(1, 5)][: len(t)]
    assert sink_rank_distribution(eps, t, 2, q) == propagate_exact(eps, t, 2, q)


def test_needs_one_rate_per_hop():
    with pytest.raises(ValueError):
        sink_rank_distribution([Fraction(1, 2)], [1, 2], 2, 2)
