"""Weighing strategies as ternary decision trees, their file format and a verifier.

The verifier only relies on :func:`counterfeit.model.outcome`; it shares no
code with the search so it can check solver output independently.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Union

from .model import (
    OUTCOMES,
    Candidate,
    CoinId,
    Instance,
    ModelError,
    Outcome,
    Weighing,
    full_space,
    outcome,
    render_candidate,
)


class StrategyError(ValueError):
    """Malformed strategy tree or file."""


@dataclass(frozen=True)
class Leaf:
    """Terminal node; ``answer is None`` marks a branch no candidate can reach."""

    answer: Candidate | None


@dataclass(frozen=True)
class Open:
    """Unresolved leaf of an arrow prefix: the candidates still possible there."""

    domain: frozenset[Candidate]
    label: str = ""


@dataclass(frozen=True)
class Node:
    weigh: Weighing
    left_heavy: "Tree"
    balanced: "Tree"
    right_heavy: "Tree"

    def child(self, o: Outcome) -> "Tree":
        return getattr(self, o.value)


Tree = Union[Leaf, Open, Node]
Path = tuple[Outcome, ...]


def depth(tree: Tree) -> int:
    if isinstance(tree, Node):
        return 1 + max(depth(tree.child(o)) for o in OUTCOMES)
    return 0


def walk(tree: Tree, path: Path = ()) -> Iterator[tuple[Path, Tree]]:
    """Yield ``(path, subtree)`` for every node, pre-order."""
    yield path, tree
    if isinstance(tree, Node):
        for o in OUTCOMES:
            yield from walk(tree.child(o), path + (o,))


def path_str(path: Path) -> str:
    return "root" + "".join("." + o.value for o in path)


@dataclass
class VerificationReport:
    sound: bool
    complete: bool
    depth: int
    leaf_census: dict[int, int]
    failures: list[tuple[Candidate, str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return self.sound and self.complete

    def to_dict(self) -> dict:
        return {
            "sound": self.sound,
            "complete": self.complete,
            "depth": self.depth,
            "checked": self.checked,
            "leaf_census": {str(k): v for k, v in sorted(self.leaf_census.items())},
            "failures": [
                {"candidate": render_candidate(x), "path": p, "reason": r}
                for x, p, r in self.failures
            ],
            "warnings": self.warnings,
        }


def verify(tree: Tree, instance: Instance, domain: Iterable[Candidate] | None = None,
           allow_open: bool = False) -> VerificationReport:
    """Run every candidate of ``domain`` (default: the full space) down the tree.

    Sound: no candidate reaches a leaf naming a different candidate.
    Complete: every candidate reaches a leaf naming itself (or, with
    ``allow_open``, an open leaf whose domain contains it).
    Raises :class:`StrategyError` if a weighing uses coins outside ``instance``.
    """
    for path, node in walk(tree):
        if isinstance(node, Node):
            try:
                node.weigh.check(instance)
            except ModelError as exc:
                raise StrategyError(f"{path_str(path)}: {exc}") from None
        elif isinstance(node, Leaf) and node.answer is not None:
            try:
                instance.check_candidate(node.answer)
            except ModelError as exc:
                raise StrategyError(f"{path_str(path)}: {exc}") from None

    census: Counter[int] = Counter()
    for path, node in walk(tree):
        if isinstance(node, Leaf) and node.answer is not None:
            census[len(path)] += 1

    if domain is None:
        domain = full_space(instance)
    failures = []
    sound = complete = True
    checked = 0
    for x in domain:
        x = tuple(x)
        checked += 1
        node, path = tree, ()
        while isinstance(node, Node):
            o = outcome(node.weigh, x)
            node, path = node.child(o), path + (o,)
        if isinstance(node, Open):
            if allow_open and x in node.domain:
                continue
            reason = "candidate missing from open leaf" if allow_open else "unresolved open leaf"
            complete = False
            failures.append((x, path_str(path), reason))
        elif node.answer is None:
            complete = False
            failures.append((x, path_str(path), "reached a leaf marked unreachable"))
        elif node.answer != x:
            sound = complete = False
            failures.append((x, path_str(path), f"leaf names {render_candidate(node.answer)}"))
    failures.sort()
    d = depth(tree)
    report = VerificationReport(sound, complete, d, dict(census), failures, checked=checked)
    if report.ok and not allow_open and checked:
        # ternary outcomes: a complete tree of depth d separates at most 3^d candidates
        if 3 ** d < checked:
            report.warnings.append(
                f"depth {d} is below the information bound for {checked} candidates"
            )
    return report


# ---------------------------------------------------------------- file format

def to_obj(tree: Tree) -> dict:
    if isinstance(tree, Node):
        return {
            "weigh": {
                "left": [str(c) for c in sorted(tree.weigh.left)],
                "right": [str(c) for c in sorted(tree.weigh.right)],
            },
            "left_heavy": to_obj(tree.left_heavy),
            "balanced": to_obj(tree.balanced),
            "right_heavy": to_obj(tree.right_heavy),
        }
    if isinstance(tree, Open):
        return {"open": {"class": tree.label,
                         "candidates": [render_candidate(x) for x in sorted(tree.domain)]}}
    if tree.answer is None:
        return {"answer": None}
    return {"answer": {f"s{i + 1}": v for i, v in enumerate(tree.answer)}}


def serialize(tree: Tree) -> str:
    return json.dumps(to_obj(tree), indent=2) + "\n"


def parse(text: str) -> Tree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StrategyError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_obj(obj)


def _parse_candidate(text: str, where: str) -> Candidate:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise StrategyError(f"{where}: bad candidate {text!r}")
    try:
        return tuple(int(v) for v in body[1:-1].split(","))
    except ValueError:
        raise StrategyError(f"{where}: bad candidate {text!r}") from None


def from_obj(obj: object, path: Path = ()) -> Tree:
    where = path_str(path)
    if not isinstance(obj, dict):
        raise StrategyError(f"{where}: expected an object")
    keys = set(obj)
    if keys == {"answer"}:
        ans = obj["answer"]
        if ans is None:
            return Leaf(None)
        if not isinstance(ans, dict) or not ans:
            raise StrategyError(f"{where}: answer must map s<i> to a coin index")
        try:
            order = sorted(ans, key=lambda k: int(k[1:]) if k.startswith("s") else -1)
            if [int(k[1:]) for k in order] != list(range(1, len(order) + 1)):
                raise ValueError
            values = tuple(int(ans[k]) for k in order)
        except (ValueError, TypeError):
            raise StrategyError(f"{where}: answer keys must be s1..sm with integer values") from None
        return Leaf(values)
    if keys == {"open"}:
        body = obj["open"]
        if not isinstance(body, dict) or set(body) != {"class", "candidates"}:
            raise StrategyError(f"{where}: open leaf needs 'class' and 'candidates'")
        dom = frozenset(_parse_candidate(t, where) for t in body["candidates"])
        return Open(dom, str(body["class"]))
    expected = {"weigh", "left_heavy", "balanced", "right_heavy"}
    if keys != expected:
        unknown = sorted(keys - expected)
        missing = sorted(expected - keys)
        detail = f"unknown key(s) {unknown}" if unknown else f"missing branch(es) {missing}"
        raise StrategyError(f"{where}: {detail}")
    weigh = obj["weigh"]
    if not isinstance(weigh, dict) or set(weigh) != {"left", "right"}:
        raise StrategyError(f"{where}: weigh needs exactly 'left' and 'right'")
    try:
        left = [CoinId.parse(c) for c in weigh["left"]]
        right = [CoinId.parse(c) for c in weigh["right"]]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ModelError("coin listed twice on one pan")
        w = Weighing(frozenset(left), frozenset(right))
    except (ModelError, TypeError, AttributeError) as exc:
        raise StrategyError(f"{where}: {exc}") from None
    kids = [from_obj(obj[o.value], path + (o,)) for o in OUTCOMES]
    return Node(w, *kids)


def infer_instance(tree: Tree) -> Instance:
    """Smallest instance consistent with the tree.

    For a complete strategy every coin index occurs in some answer, so the
    inference is exact.
    """
    sizes: dict[int, int] = {}
    for _, node in walk(tree):
        if isinstance(node, Leaf) and node.answer is not None:
            for i, v in enumerate(node.answer):
                sizes[i + 1] = max(sizes.get(i + 1, 1), v)
        elif isinstance(node, Open):
            for x in node.domain:
                for i, v in enumerate(x):
                    sizes[i + 1] = max(sizes.get(i + 1, 1), v)
        elif isinstance(node, Node):
            for c in node.weigh.left | node.weigh.right:
                sizes[c.set] = max(sizes.get(c.set, 1), c.index)
    if not sizes:
        raise StrategyError("cannot infer an instance from a tree with no answers")
    m = max(sizes)
    return Instance(tuple(sizes.get(i, 1) for i in range(1, m + 1)))


# -------------------------------------------------------------------- splice

Closer = Union[Mapping[Path, Tree], Callable[[Open, Path], Tree]]


def splice(prefix: Tree, closers: Closer, instance: Instance) -> Tree:
    """Replace every open leaf of ``prefix`` with its closing strategy.

    ``closers`` maps leaf paths to trees, or is a callable ``(leaf, path)``.
    Each closer must identify exactly the candidates of its leaf.
    """
    def close(tree: Tree, path: Path) -> Tree:
        if isinstance(tree, Node):
            return Node(tree.weigh, *(close(tree.child(o), path + (o,)) for o in OUTCOMES))
        if not isinstance(tree, Open):
            return tree
        if callable(closers):
            sub = closers(tree, path)
        else:
            if path not in closers:
                raise StrategyError(f"{path_str(path)}: no closer for open leaf")
            sub = closers[path]
        report = verify(sub, instance, domain=sorted(tree.domain))
        if not report.ok:
            raise StrategyError(
                f"{path_str(path)}: closer does not match the leaf's candidates "
                f"({len(report.failures)} failure(s))"
            )
        return sub

    return close(prefix, ())
