import json

import pytest

from counterfeit.model import CandidateSet, Instance, Outcome, Weighing, full_space
from counterfeit.representability import close_one_representable
from counterfeit.solver.search import solve_exact
from counterfeit.strategy import (
    Leaf,
    Node,
    Open,
    StrategyError,
    depth,
    infer_instance,
    parse,
    serialize,
    splice,
    verify,
    walk,
)


@pytest.fixture(scope="module")
def tree55():
    return solve_exact(Instance((5, 5))).tree


def test_round_trip(tree55):
    text = serialize(tree55)
    assert parse(text) == tree55
    assert serialize(parse(text)) == text


def test_file_format_keys(tree55):
    obj = json.loads(serialize(tree55))
    assert set(obj) == {"weigh", "left_heavy", "balanced", "right_heavy"}
    assert all(c.startswith("s") for c in obj["weigh"]["left"])


def test_depth_zero_tree():
    tree = Leaf((1, 1))
    assert parse(serialize(tree)) == tree
    assert verify(tree, Instance((1, 1))).ok


def test_verify_sound_tree(tree55):
    report = verify(tree55, Instance((5, 5)))
    assert report.ok and report.depth == 3 and report.checked == 25
    assert sum(report.leaf_census.values()) == 25


def test_wrong_answer_is_unsound(tree55):
    def mutate(t):
        if isinstance(t, Node):
            return Node(t.weigh, mutate(t.left_heavy), t.balanced, t.right_heavy)
        return Leaf((5, 5) if t.answer != (5, 5) else (1, 1))
    report = verify(mutate(tree55), Instance((5, 5)))
    assert not report.sound and report.failures


def test_missing_candidate_is_incomplete():
    inst = Instance((2,))
    w = Weighing.of(inst, ["s1.1"], ["s1.2"])
    tree = Node(w, Leaf(None), Leaf(None), Leaf((1,)))
    report = verify(tree, inst)
    assert report.sound and not report.complete


def test_verify_rejects_foreign_coins():
    inst = Instance((2,))
    w = Weighing.of(Instance((3,)), ["s1.1"], ["s1.3"])
    with pytest.raises(StrategyError):
        verify(Node(w, Leaf((1,)), Leaf((2,)), Leaf((2,))), inst)


def test_information_bound_warning_never_fires_on_complete_trees(tree55):
    assert verify(tree55, Instance((5, 5))).warnings == []


@pytest.mark.parametrize("text,needle", [
    ("{", "line 1"),
    ('{"weigh": {"left": ["s1.1"], "right": ["s1.2"]}, "left_heavy": {"answer": null}, '
     '"balanced": {"answer": null}}', "missing branch"),
    ('{"answer": {"s1": 1}, "extra": 2}', "unknown key"),
    ('{"weigh": {"left": ["s1.1"], "right": ["s1.1"]}, "left_heavy": {"answer": null}, '
     '"balanced": {"answer": null}, "right_heavy": {"answer": null}}', "root"),
    ('{"weigh": {"left": ["x"], "right": ["s1.1"]}, "left_heavy": {"answer": null}, '
     '"balanced": {"answer": null}, "right_heavy": {"answer": null}}', "bad coin"),
    ('{"answer": {"s2": 1}}', "s1..sm"),
    ('[1, 2]', "expected an object"),
])
def test_parse_errors(text, needle):
    with pytest.raises(StrategyError, match=needle):
        parse(text)


def test_parse_error_reports_path():
    bad = {"weigh": {"left": ["s1.1"], "right": ["s1.2"]},
           "left_heavy": {"answer": None}, "balanced": {"bogus": 1},
           "right_heavy": {"answer": None}}
    with pytest.raises(StrategyError, match="root.balanced"):
        parse(json.dumps(bad))


def test_infer_instance(tree55):
    assert infer_instance(tree55) == Instance((5, 5))


def test_open_leaf_round_trip_and_splice():
    inst = Instance((3, 3))
    w = Weighing.of(inst, ["s1.1"], ["s1.2"])
    dom = {o: frozenset((i, j) for j in (1, 2, 3)) for o, i in
           ((Outcome.LEFT_HEAVY, 2), (Outcome.BALANCED, 3), (Outcome.RIGHT_HEAVY, 1))}
    prefix = Node(w, *(Open(dom[o], "one-rep:3") for o in
                       (Outcome.LEFT_HEAVY, Outcome.BALANCED, Outcome.RIGHT_HEAVY)))
    assert parse(serialize(prefix)) == prefix
    assert verify(prefix, inst, allow_open=True).ok
    assert not verify(prefix, inst).ok

    def closer(leaf, path):
        return close_one_representable(CandidateSet.from_candidates(inst, leaf.domain))
    full = splice(prefix, closer, inst)
    report = verify(full, inst)
    assert report.ok and report.depth == 2


def test_splice_rejects_wrong_closer():
    inst = Instance((3, 3))
    w = Weighing.of(inst, ["s1.1"], ["s1.2"])
    prefix = Node(w, Open(frozenset({(2, 1), (2, 2)})), Leaf((3, 3)), Leaf((1, 1)))
    with pytest.raises(StrategyError, match="closer"):
        splice(prefix, {(Outcome.LEFT_HEAVY,): Leaf((2, 1))}, inst)
    with pytest.raises(StrategyError, match="no closer"):
        splice(prefix, {}, inst)


def test_walk_and_depth(tree55):
    paths = [p for p, _ in walk(tree55)]
    assert paths[0] == ()
    assert max(len(p) for p in paths) == depth(tree55) == 3
