from collections import Counter

import numpy as np
import pytest

from polymerlab.combinatorics.instances import random_tuple
from polymerlab.combinatorics.paths import LatticePath, PathTuple, is_crossing
from polymerlab.combinatorics.uncross import check_uncrossed, order_paths, strip_labels, uncross
from polymerlab.errors import ContractError
from polymerlab.verify import exhaustive_tuples


def P(start, steps):
    return LatticePath.from_steps(start, steps)


def test_noncrossing_tuple_keeps_multiset():
    t = PathTuple.of([P((1, 1), "RRUU"), P((1, 2), "UURR")])
    out = uncross(t)
    check_uncrossed(t, out)
    assert set(out.paths) == set(t.paths)


def test_transversal_crossing_is_switched():
    a = P((1, 2), "RRR")  # horizontal
    b = P((2, 1), "UUU")  # vertical, crossing a at (2, 2)
    t = PathTuple.of([a, b])
    assert is_crossing(a, b)
    out = uncross(t)
    check_uncrossed(t, out)
    got = {p.start: p for p in out.paths}
    # the lower start takes the upper-left exit and vice versa
    assert got[(2, 1)].end == (4, 2)
    assert got[(1, 2)].end == (2, 4)


def test_bottom_to_top_order():
    a = P((1, 3), "RRR")
    b = P((2, 1), "RRU")
    out = uncross(PathTuple.of([a, b]))
    assert out.paths[0].start == (2, 1)
    assert not out.order_violations()


def test_copies_of_an_edge_get_consecutive_labels():
    edges = Counter({((1, 2), (2, 2)): 2, ((2, 1), (2, 2)): 1, ((1, 3), (1, 4)): 1})
    labels = strip_labels(edges)
    # strip x + y = 3: the up edge from (2, 1) is southeast of the right edge from (1, 2)
    assert labels[((2, 1), (2, 2))] == [0]
    assert labels[((1, 2), (2, 2))] == [1, 2]
    assert labels[((1, 3), (1, 4))] == [0]


def test_zero_length_paths_pass_through():
    t = PathTuple.of([LatticePath.point((3, 1)), P((1, 1), "UU")])
    out = uncross(t)
    check_uncrossed(t, out)
    assert LatticePath.point((3, 1)) in out.paths


def test_order_paths_sorts_bottom_to_top():
    ps = [P((1, 3), "RR"), P((1, 1), "RR"), P((1, 2), "RR")]
    assert [p.start for p in order_paths(ps)] == [(1, 1), (1, 2), (1, 3)]


def test_check_uncrossed_rejects_changed_multiset():
    t = PathTuple.of([P((1, 1), "RU")])
    with pytest.raises(ContractError):
        check_uncrossed(t, PathTuple.of([P((1, 1), "UR")]))


def test_all_two_path_tuples_on_4x4():
    count = 0
    for t in exhaustive_tuples(4, 2):
        check_uncrossed(t, uncross(t))
        count += 1
    assert count > 1000


def test_all_three_path_tuples_on_3x3():
    for t in exhaustive_tuples(3, 3):
        check_uncrossed(t, uncross(t))


@pytest.mark.parametrize("seed", range(4))
def test_random_three_path_tuples_n5(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        t = random_tuple(rng, 5, 3)
        out = uncross(t)
        check_uncrossed(t, out)
        assert out.edge_multiset() == t.edge_multiset()


def test_random_tuples_up_to_n12():
    rng = np.random.default_rng(99)
    for _ in range(200):
        n = int(rng.integers(2, 13))
        k = int(rng.integers(1, 5))
        t = random_tuple(rng, n, k)
        check_uncrossed(t, uncross(t))
