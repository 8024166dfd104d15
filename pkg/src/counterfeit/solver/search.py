"""Exact minimum-depth strategy search and arrow (reduction prefix) search."""

from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..model import CandidateSet, Instance, full_space, render_candidate
from ..representability import (
    ceil_log3,
    classify_leaf,
    close_one_representable,
    is_two_representable,
)
from ..strategy import Leaf, Node, Open, Tree, splice, to_obj, verify, walk
from ..strategy import depth as tree_depth
from .state import BoxState


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int | None = None  # None: information bound + 2
    node_limit: int = 10**8
    time_limit: float = 60.0

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("budget limits must be positive")


@dataclass
class SearchStats:
    nodes: int = 0
    memo_hits: int = 0
    memo_size: int = 0
    wall_time: float = 0.0


@dataclass
class SearchResult:
    status: Status
    depth: int | None = None
    tree: Tree | None = None
    lower_bound: int = 0
    upper_bound: int | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    def to_dict(self, instance: Instance | None = None, with_tree: bool = False) -> dict:
        out: dict = {}
        if instance is not None:
            out["instance"] = list(instance.sizes)
        out.update({
            "status": self.status.value,
            "depth": self.depth,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "nodes": self.stats.nodes,
            "memo_hits": self.stats.memo_hits,
            "memo_size": self.stats.memo_size,
            "wall_time": round(self.stats.wall_time, 6),
        })
        if with_tree and self.tree is not None:
            out["tree"] = to_obj(self.tree)
        return out


class _OutOfBudget(Exception):
    pass


@dataclass(frozen=True)
class LeafProfile:
    """Leaves reached after at most ``depth`` weighings may be of class ``kind``
    with at most ``bound`` members (``kind`` is singleton, one-rep or two-rep)."""

    depth: int
    kind: str = "one-rep"
    bound: int = 1

    def accepts(self, state: BoxState) -> bool:
        n = state.size
        if n <= 1:
            return True
        if n > self.bound or self.kind == "singleton":
            return False
        if state.is_one_representable():
            return True
        if self.kind == "two-rep":
            return _two_rep(state)
        return False


def _two_rep(state: BoxState) -> bool:
    inst = Instance(tuple(max([j for c in cs for j in c] + [1]) for cs in state.cells))
    return is_two_representable(state.to_candidate_set(inst)) is not None


@dataclass(frozen=True)
class ArrowSpec:
    instance: Instance
    profiles: tuple[LeafProfile, ...]

    def __post_init__(self) -> None:
        if not self.profiles:
            raise ValueError("an arrow needs at least one leaf profile")

    @property
    def max_depth(self) -> int:
        return max(p.depth for p in self.profiles)


def trivial_upper_bound(state: BoxState) -> int:
    """Resolve each set separately: one light coin among its live coins."""
    return sum(ceil_log3(sum(len(c) for c in cs)) for cs in state.cells)


class Searcher:
    """Holds the memo; reuse one instance to share work across queries.

    ``canonical=False`` is a debug mode: memo keys are exact but not
    isomorphism-invariant and equivalent weighings are not merged.
    """

    def __init__(self, canonical: bool = True, threads: int = 1):
        self.canonical = canonical
        self.threads = max(1, threads)
        self.memo: dict[tuple, list] = {}  # key -> [lower bound, upper bound]
        self.arrow_memo: dict[tuple, bool] = {}
        self.stats = SearchStats()
        self._deadline = 0.0
        self._node_limit = 0

    # ----------------------------------------------------------- bookkeeping
    def _key(self, state: BoxState) -> tuple:
        if self.canonical:
            return state.key
        genuine = min(len(state.pool), state.live_coins())
        return (genuine, tuple(tuple(len(c) for c in cs) for cs in state.cells),
                tuple(sorted(state.boxes)))

    def _tick(self) -> None:
        self.stats.nodes += 1
        if self.stats.nodes > self._node_limit or time.monotonic() > self._deadline:
            raise _OutOfBudget

    def _arm(self, budget: SearchBudget) -> None:
        self._deadline = time.monotonic() + budget.time_limit
        self._node_limit = self.stats.nodes + budget.node_limit

    def _children(self, state: BoxState, cap: int, seen: set | None):
        for _, _, _, plan in state.plans(cap):
            kids = state.split(plan)
            if seen is not None:
                sig = tuple(sorted(self._key(k) for k in kids))
                if sig in seen:
                    continue
                seen.add(sig)
            yield plan, kids

    # ------------------------------------------------------------- min depth
    def feasible(self, state: BoxState, t: int, root: bool = False) -> bool:
        """Can ``state`` be resolved with at most ``t`` more weighings?"""
        n = state.size
        if n <= 1:
            return True
        if t <= 0 or n > 3 ** t:
            return False
        key = self._key(state)
        entry = self.memo.get(key)
        if entry is not None:
            lb, ub = entry
            if ub is not None and ub <= t:
                self.stats.memo_hits += 1
                return True
            if t < lb:
                self.stats.memo_hits += 1
                return False
        self._tick()
        found = self._search(state, t, parallel=root and self.threads > 1)
        entry = self.memo.setdefault(key, [0, None])
        if found:
            entry[1] = t if entry[1] is None else min(entry[1], t)
        else:
            entry[0] = max(entry[0], t + 1)
        return found

    def _known_infeasible(self, state: BoxState, t: int) -> bool:
        if state.size <= 1:
            return False
        entry = self.memo.get(self._key(state))
        return entry is not None and t < entry[0]

    def _kids_ok(self, kids, t: int) -> bool:
        if any(self._known_infeasible(k, t) for k in kids):
            return False
        return all(self.feasible(k, t) for k in sorted(kids, key=lambda k: -k.size))

    def _search(self, state: BoxState, t: int, parallel: bool = False) -> bool:
        seen = set() if self.canonical else None
        gen = self._children(state, 3 ** (t - 1), seen)
        if not parallel:
            return any(self._kids_ok(kids, t - 1) for _, kids in gen)
        with ThreadPoolExecutor(self.threads) as pool:
            while True:
                batch = [kids for _, kids in _take(gen, self.threads)]
                if not batch:
                    return False
                if any(pool.map(lambda kids: self._kids_ok(kids, t - 1), batch)):
                    return True

    def build(self, state: BoxState, t: int) -> Tree:
        """Concrete tree of depth <= t; ``feasible(state, t)`` must hold."""
        if state.size == 0:
            return Leaf(None)
        if state.size == 1:
            return Leaf(state.only_member())
        for plan, kids in self._children(state, 3 ** (t - 1), None):
            if self._kids_ok(kids, t - 1):
                subtrees = [self.build(k, t - 1) for k in kids]
                return Node(state.plan_weighing(plan), *subtrees)
        raise AssertionError("build() called on an infeasible state")

    def min_depth(self, D: CandidateSet, budget: SearchBudget = SearchBudget()) -> SearchResult:
        start = time.monotonic()
        n = len(D)
        if n == 0:
            raise ValueError("min_depth needs a non-empty candidate set")
        state = BoxState.from_candidates(D)
        lower = ceil_log3(n)
        upper = trivial_upper_bound(state)
        max_depth = budget.max_depth if budget.max_depth is not None else lower + 2
        self._arm(budget)
        result = None
        try:
            t = lower
            while t <= max_depth:
                if self.feasible(state, t, root=True):
                    tree = self.build(state, t)
                    result = SearchResult(Status.OPTIMAL, depth=t, tree=tree,
                                          lower_bound=t, upper_bound=t)
                    break
                lower = t + 1
                t += 1
            if result is None:
                result = SearchResult(Status.INFEASIBLE, lower_bound=lower, upper_bound=upper)
        except _OutOfBudget:
            result = SearchResult(Status.EXHAUSTED, lower_bound=lower, upper_bound=upper)
        self.stats.memo_size = len(self.memo)
        self.stats.wall_time = time.monotonic() - start
        result.stats = SearchStats(**vars(self.stats))
        if result.status is Status.OPTIMAL:
            report = verify(result.tree, D.instance, domain=D)
            if not report.ok or report.depth != result.depth:
                raise AssertionError(f"solver produced an unsound tree: {report.failures[:3]}")
        return result

    # ----------------------------------------------------------------- arrows
    def _arrow_ok(self, state: BoxState, d: int, spec: ArrowSpec) -> bool:
        if any(d <= p.depth and p.accepts(state) for p in spec.profiles):
            return True
        deeper = [p for p in spec.profiles if p.depth > d]
        if not deeper:
            return False
        cap = max(p.bound * 3 ** (p.depth - d - 1) for p in deeper)
        if state.size > 3 * cap:
            return False
        key = (self._key(state), d, spec.profiles)
        if key in self.arrow_memo:
            self.stats.memo_hits += 1
            return self.arrow_memo[key]
        self._tick()
        seen = set() if self.canonical else None
        ok = any(all(self._arrow_ok(k, d + 1, spec) for k in sorted(kids, key=lambda k: -k.size))
                 for _, kids in self._children(state, cap, seen))
        self.arrow_memo[key] = ok
        return ok

    def _arrow_build(self, state: BoxState, d: int, spec: ArrowSpec, inst: Instance) -> Tree:
        if state.size == 0:
            return Leaf(None)
        if state.size == 1:
            return Leaf(state.only_member())
        if any(d <= p.depth and p.accepts(state) for p in spec.profiles):
            D = state.to_candidate_set(inst)
            return Open(frozenset(D), str(classify_leaf(D)))
        deeper = [p for p in spec.profiles if p.depth > d]
        cap = max(p.bound * 3 ** (p.depth - d - 1) for p in deeper)
        for plan, kids in self._children(state, cap, None):
            if all(self._arrow_ok(k, d + 1, spec) for k in kids):
                return Node(state.plan_weighing(plan),
                            *(self._arrow_build(k, d + 1, spec, inst) for k in kids))
        raise AssertionError("arrow build on an infeasible state")

    def find_arrow(self, spec: ArrowSpec, budget: SearchBudget = SearchBudget()) -> SearchResult:
        start = time.monotonic()
        D = full_space(spec.instance)
        state = BoxState.from_candidates(D)
        self._arm(budget)
        try:
            if self._arrow_ok(state, 0, spec):
                tree = self._arrow_build(state, 0, spec, spec.instance)
                d = tree_depth(tree)
                result = SearchResult(Status.OPTIMAL, depth=d, tree=tree, lower_bound=0, upper_bound=d)
            else:
                result = SearchResult(Status.INFEASIBLE)
        except _OutOfBudget:
            result = SearchResult(Status.EXHAUSTED)
        self.stats.memo_size = len(self.memo) + len(self.arrow_memo)
        self.stats.wall_time = time.monotonic() - start
        result.stats = SearchStats(**vars(self.stats))
        return result


def _take(gen, k: int) -> list:
    out = []
    for item in gen:
        out.append(item)
        if len(out) == k:
            break
    return out


def min_depth(D: CandidateSet, budget: SearchBudget = SearchBudget(), **kw) -> SearchResult:
    return Searcher(**kw).min_depth(D, budget)


def solve_exact(instance: Instance, budget: SearchBudget = SearchBudget(), **kw) -> SearchResult:
    return Searcher(**kw).min_depth(full_space(instance), budget)


def find_arrow(spec: ArrowSpec, budget: SearchBudget = SearchBudget(), **kw) -> SearchResult:
    return Searcher(**kw).find_arrow(spec, budget)


def close_arrow(prefix: Tree, instance: Instance) -> Tree:
    """Splice ternary closing strategies onto every 1-representable open leaf."""
    def closer(leaf: Open, path) -> Tree:
        D = CandidateSet.from_candidates(instance, leaf.domain)
        return close_one_representable(D)
    return splice(prefix, closer, instance)


def describe_leaves(tree: Tree) -> list[tuple[int, str, list[str]]]:
    """``(depth, class, members)`` for each open leaf of an arrow prefix."""
    out = []
    for path, node in walk(tree):
        if isinstance(node, Open):
            out.append((len(path), node.label, [render_candidate(x) for x in sorted(node.domain)]))
    return out
