import pytest

from counterfeit.model import CandidateSet, CoinId, Instance, full_space
from counterfeit.representability import (
    ceil_log3,
    classify_leaf,
    close_one_representable,
    is_one_representable,
    is_two_representable,
)
from counterfeit.strategy import depth, verify


def cs(sizes, members):
    return CandidateSet.from_candidates(Instance(sizes), members)


@pytest.mark.parametrize("n,t", [(1, 0), (2, 1), (3, 1), (4, 2), (9, 2), (10, 3), (27, 3), (28, 4)])
def test_ceil_log3(n, t):
    assert ceil_log3(n) == t


def test_one_rep_diagonal():
    reps = is_one_representable(cs((2, 2), [(1, 1), (2, 2)]))
    assert reps == {(1, 1): CoinId(1, 1), (2, 2): CoinId(1, 2)}


def test_one_rep_full_product_fails():
    assert is_one_representable(full_space(Instance((2, 2)))) is None


def test_one_rep_singleton():
    assert is_one_representable(cs((3, 3), [(2, 3)])) == {(2, 3): CoinId(1, 2)}


def test_one_rep_picks_smallest_private_coin():
    # (1,1) shares s1.1 with (1,2), so its smallest private coin is s2.1
    reps = is_one_representable(cs((3, 3), [(1, 1), (1, 2), (2, 3)]))
    assert reps == {(1, 1): CoinId(2, 1), (1, 2): CoinId(2, 2), (2, 3): CoinId(1, 2)}


def test_two_rep_examples():
    full = full_space(Instance((2, 2)))
    reps = is_two_representable(full)
    assert reps[(1, 1)] == (CoinId(1, 1), CoinId(2, 1))
    assert is_two_representable(cs((2, 2), [(1, 2)])) is not None
    assert is_two_representable(cs((2, 2), [(1, 1), (2, 2)])) is not None


def test_two_rep_needs_two_sets():
    assert is_two_representable(full_space(Instance((3,)))) is None


def test_two_rep_fails_on_full_cube():
    assert is_two_representable(full_space(Instance((2, 2, 2)))) is None


def test_classify_leaf():
    assert str(classify_leaf(cs((2, 2), [(1, 1)]))) == "singleton"
    assert str(classify_leaf(cs((2, 2), [(1, 1), (2, 2)]))) == "one-rep:2"
    c = classify_leaf(full_space(Instance((2, 2))))
    assert c.kind == "two-rep" and c.s == 4
    assert str(classify_leaf(full_space(Instance((2, 2, 2))))) == "other"
    with pytest.raises(ValueError):
        classify_leaf(cs((2, 2), []))


@pytest.mark.parametrize("r", [1, 2, 3, 4, 5, 8, 9, 10, 14, 27, 28])
def test_close_one_representable_depth(r):
    D = cs((r, r), [(i, i) for i in range(1, r + 1)])
    tree = close_one_representable(D)
    report = verify(tree, D.instance, domain=D)
    assert report.ok
    assert depth(tree) == ceil_log3(r)


def test_close_rejects_non_representable():
    with pytest.raises(ValueError):
        close_one_representable(full_space(Instance((2, 2))))
