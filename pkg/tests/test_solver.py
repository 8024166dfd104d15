import itertools
import random

import pytest

from counterfeit.model import (
    OUTCOMES,
    CandidateSet,
    Instance,
    Weighing,
    coin_classes,
    full_space,
    partition,
)
from counterfeit.representability import ceil_log3
from counterfeit.solver.oracle import oracle_min_depth, raw_weighings
from counterfeit.solver.search import (
    ArrowSpec,
    LeafProfile,
    SearchBudget,
    Searcher,
    Status,
    close_arrow,
    find_arrow,
    min_depth,
    solve_exact,
)
from counterfeit.solver.state import BoxState
from counterfeit.solver.weighings import _count_vectors, canonical_key, enumerate_weighings
from counterfeit.strategy import verify

ORACLE_SUITE = [(n,) for n in range(1, 13)] + [
    (1, 1), (2, 2), (2, 3), (2, 4), (3, 3), (2, 2, 2), (3, 4), (2, 2, 3), (1, 5), (2, 5), (2, 6),
]


def relabel(D: CandidateSet, rng: random.Random) -> CandidateSet:
    """Random within-set coin relabeling plus a random permutation of the sets."""
    sizes = D.instance.sizes
    perms = [rng.sample(range(1, n + 1), n) for n in sizes]
    order = list(range(len(sizes)))
    rng.shuffle(order)
    inst = Instance(tuple(sizes[i] for i in order))
    members = [tuple(perms[i][x[i] - 1] for i in order) for x in D]
    return CandidateSet.from_candidates(inst, members)


@pytest.mark.parametrize("sizes", ORACLE_SUITE, ids=str)
def test_matches_oracle(sizes):
    D = full_space(Instance(sizes))
    assert min_depth(D).depth == oracle_min_depth(D)


def test_oracle_rejects_large_inputs():
    with pytest.raises(ValueError):
        oracle_min_depth(full_space(Instance((4, 4))))


def test_raw_weighings_count():
    # ordered pairs of disjoint equal non-empty pans over 4 coins: 12 + 6
    assert len(list(raw_weighings(4))) == 18


@pytest.mark.parametrize("n", range(1, 14))
def test_single_set(n):
    r = solve_exact(Instance((n,)))
    assert r.status is Status.OPTIMAL and r.depth == ceil_log3(n)


@pytest.mark.parametrize("sizes,expected", [((2, 2, 2), 2), ((5, 5), 3), ((1, 1), 0), ((4, 4, 5), 4)])
def test_known_values(sizes, expected):
    r = solve_exact(Instance(sizes))
    assert r.status is Status.OPTIMAL and r.depth == expected
    assert r.depth >= ceil_log3(Instance(sizes).space_size)
    report = verify(r.tree, Instance(sizes))
    assert report.ok and report.depth == r.depth


def test_random_subsets_match_oracle():
    rng = random.Random(7)
    for sizes in [(2, 2, 2), (3, 3), (2, 3, 2), (4, 3)]:
        inst = Instance(sizes)
        space = list(full_space(inst))
        for _ in range(12):
            k = rng.randint(1, min(12, len(space)))
            D = CandidateSet.from_candidates(inst, rng.sample(space, k))
            assert min_depth(D).depth == oracle_min_depth(D), (sizes, list(D))


def test_debug_mode_agrees():
    rng = random.Random(3)
    for sizes in [(2, 2, 2), (3, 4), (5, 5), (2, 2, 3)]:
        inst = Instance(sizes)
        space = list(full_space(inst))
        for D in [full_space(inst), CandidateSet.from_candidates(inst, rng.sample(space, 7))]:
            fast = Searcher().min_depth(D)
            slow = Searcher(canonical=False).min_depth(D)
            assert fast.depth == slow.depth


def test_threads_agree():
    inst = Instance((4, 4, 5))
    assert solve_exact(inst, threads=4).depth == solve_exact(inst).depth == 4


def test_isomorphic_copies_have_equal_depth_and_key():
    rng = random.Random(11)
    inst = Instance((3, 3, 4))
    space = list(full_space(inst))
    for _ in range(10):
        D = CandidateSet.from_candidates(inst, rng.sample(space, rng.randint(2, 15)))
        E = relabel(D, rng)
        assert canonical_key(D) == canonical_key(E)
        assert min_depth(D).depth == min_depth(E).depth


def test_canonical_key_examples():
    inst = Instance((2, 2))
    a = CandidateSet.from_candidates(inst, [(1, 1), (1, 2)])
    b = CandidateSet.from_candidates(inst, [(2, 1), (2, 2)])
    assert canonical_key(a) == canonical_key(b)
    assert canonical_key(full_space(inst)) == canonical_key(full_space(Instance((2, 2))))
    single = CandidateSet.from_candidates(inst, [(1, 1)])
    pair = CandidateSet.from_candidates(inst, [(1, 1), (2, 2)])
    assert canonical_key(single) != canonical_key(pair)


def test_canonical_key_separates_non_isomorphic_sets():
    inst = Instance((3, 3))
    line = CandidateSet.from_candidates(inst, [(1, 1), (1, 2), (1, 3)])
    diag = CandidateSet.from_candidates(inst, [(1, 1), (2, 2), (3, 3)])
    assert canonical_key(line) != canonical_key(diag)


def test_canonical_key_is_deterministic():
    D = full_space(Instance((2, 3, 2)))
    assert canonical_key(D) == canonical_key(D)


def test_enumerate_weighings_small_examples():
    ws = enumerate_weighings(full_space(Instance((2,))))
    assert len(ws) == 1 and len(ws[0].left) == 1
    assert enumerate_weighings(CandidateSet.from_candidates(Instance((2, 2)), [(1, 2)])) == []


def _signature(parts):
    return tuple(parts[o].mask.tobytes() for o in OUTCOMES)


def _representative(w: Weighing, classes) -> Weighing:
    """Same per-class pan counts as ``w``, using the first coins of each class."""
    left, right = [], []
    for cls in classes:
        l = sum(c in w.left for c in cls)
        r = sum(c in w.right for c in cls)
        left.extend(cls[:l])
        right.extend(cls[l:l + r])
    return Weighing(frozenset(left), frozenset(right))


def _check_covered(D, w, classes, reduced):
    parts = partition(D, w)
    if sum(1 for o in OUTCOMES if len(parts[o])) <= 1:
        return
    rep = _representative(w, classes)
    rep_parts = partition(D, rep)
    sig = _signature(rep_parts)
    assert sig in reduced or sig[::-1] in reduced
    # the representative splits D the same way up to relabeling
    assert [canonical_key(parts[o]) for o in OUTCOMES] == [canonical_key(rep_parts[o]) for o in OUTCOMES]


@pytest.mark.parametrize("sizes,members", [
    ((2, 2, 2), None), ((3, 3), None), ((2, 4), None), ((3, 3), [(1, 1), (1, 2), (2, 2), (3, 1)]),
    ((2, 2, 3), [(1, 1, 1), (2, 2, 2), (1, 2, 3), (2, 1, 3), (1, 1, 2)]),
])
def test_enumerate_weighings_covers_every_raw_split(sizes, members):
    inst = Instance(sizes)
    D = full_space(inst) if members is None else CandidateSet.from_candidates(inst, members)
    coins = inst.coins()
    classes = coin_classes(D)
    reduced = {_signature(partition(D, w)) for w in enumerate_weighings(D)}
    for lmask, rmask in raw_weighings(inst.total_coins):
        w = Weighing(frozenset(c for k, c in enumerate(coins) if lmask >> k & 1),
                     frozenset(c for k, c in enumerate(coins) if rmask >> k & 1))
        _check_covered(D, w, classes, reduced)


def test_enumerate_weighings_five_sixteen():
    D = full_space(Instance((5, 16)))
    direct = sum(1 for l1, r1, l2, r2 in itertools.product(range(6), range(6), range(17), range(17))
                 if l1 + r1 <= 5 and l2 + r2 <= 16 and l1 + l2 == r1 + r2 >= 1)
    assert len(list(_count_vectors([5, 16]))) == direct
    ws = enumerate_weighings(D)
    reduced = {_signature(partition(D, w)) for w in ws}
    assert len(reduced) == len(ws)
    classes = coin_classes(D)
    rng = random.Random(5)
    coins = Instance((5, 16)).coins()
    for _ in range(300):
        k = rng.randint(1, 10)
        pans = rng.sample(coins, 2 * k)
        _check_covered(D, Weighing(frozenset(pans[:k]), frozenset(pans[k:])), classes, reduced)


def test_box_state_round_trip():
    rng = random.Random(2)
    inst = Instance((3, 2, 4))
    space = list(full_space(inst))
    for _ in range(20):
        D = CandidateSet.from_candidates(inst, rng.sample(space, rng.randint(1, 20)))
        st = BoxState.from_candidates(D)
        assert st.size == len(D)
        assert st.to_candidate_set(inst) == D


def test_box_state_split_matches_partition():
    rng = random.Random(9)
    inst = Instance((3, 3, 2))
    space = list(full_space(inst))
    for _ in range(10):
        D = CandidateSet.from_candidates(inst, rng.sample(space, rng.randint(2, 18)))
        st = BoxState.from_candidates(D)
        for _, _, parts, plan in itertools.islice(st.plans(len(D)), 25):
            w = st.plan_weighing(plan)
            real = partition(D, w)
            kids = st.split(plan)
            assert tuple(k.size for k in kids) == parts
            for kid, o in zip(kids, OUTCOMES):
                assert kid.to_candidate_set(inst) == real[o]


def test_budget_exhaustion_is_reported():
    r = solve_exact(Instance((7, 7, 14)), SearchBudget(node_limit=5))
    assert r.status is Status.EXHAUSTED and r.depth is None
    assert r.lower_bound <= 6 <= r.upper_bound


def test_infeasible_within_max_depth():
    r = solve_exact(Instance((3, 4)), SearchBudget(max_depth=2))
    assert r.status is Status.INFEASIBLE and r.lower_bound == 3


def test_report_dict():
    r = solve_exact(Instance((2, 2, 2)))
    d = r.to_dict(Instance((2, 2, 2)), with_tree=True)
    assert d["depth"] == 2 and d["status"] == "optimal" and "tree" in d
    assert {"nodes", "memo_hits", "wall_time"} <= set(d)


def test_arrow_singleton_profile_at_depth_zero_is_infeasible():
    spec = ArrowSpec(Instance((2, 2)), (LeafProfile(0, "singleton"),))
    assert find_arrow(spec).status is Status.INFEASIBLE


def test_arrow_small_and_close():
    inst = Instance((5, 5))
    spec = ArrowSpec(inst, (LeafProfile(2, "one-rep", 3),))
    r = find_arrow(spec)
    assert r.status is Status.OPTIMAL
    assert verify(r.tree, inst, allow_open=True).ok
    full = close_arrow(r.tree, inst)
    report = verify(full, inst)
    assert report.ok and report.depth == 3


def test_arrow_ten_ten():
    inst = Instance((10, 10))
    r = find_arrow(ArrowSpec(inst, (LeafProfile(3, "one-rep", 4),)))
    assert r.status is Status.OPTIMAL
    full = close_arrow(r.tree, inst)
    report = verify(full, inst)
    assert report.ok and report.depth == 5
