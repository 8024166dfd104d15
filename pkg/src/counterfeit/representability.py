"""1- and 2-representable candidate sets and closing strategies for them.

A candidate set D is 1-representable when every member Z owns a coin of its
counterfeit set that is counterfeit in no other member.  It is 2-representable
when every member owns a pair of coins that no other member holds together.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import Candidate, CandidateSet, CoinId, Weighing
from .strategy import Leaf, Node, Tree

RepresentativeMap = dict[Candidate, object]


@dataclass(frozen=True)
class LeafClass:
    kind: str  # "singleton" | "one-rep" | "two-rep" | "other"
    r: int = 0
    t: int = 0
    s: int = 0

    def __str__(self) -> str:
        if self.kind == "one-rep":
            return f"one-rep:{self.r}"
        if self.kind == "two-rep":
            return f"two-rep:{self.t}x{self.s}"
        return self.kind


SINGLETON = LeafClass("singleton")
OTHER = LeafClass("other")


def ceil_log3(n: int) -> int:
    """Smallest t with 3**t >= n (exact integer arithmetic)."""
    t, p = 0, 1
    while p < n:
        p *= 3
        t += 1
    return t


def _coin_counts(D: CandidateSet) -> list[np.ndarray]:
    grid = D.grid()
    m = D.instance.m
    return [grid.sum(axis=tuple(a for a in range(m) if a != i)) if m > 1 else grid.astype(int)
            for i in range(m)]


def is_one_representable(D: CandidateSet) -> dict[Candidate, CoinId] | None:
    """Map each member to its smallest private coin, or ``None``."""
    counts = _coin_counts(D)
    reps: dict[Candidate, CoinId] = {}
    for z in D:
        for i, v in enumerate(z):
            if counts[i][v - 1] == 1:
                reps[z] = CoinId(i + 1, v)
                break
        else:
            return None
    return reps


def is_two_representable(D: CandidateSet) -> dict[Candidate, tuple[CoinId, CoinId]] | None:
    """Map each member to its smallest private coin pair, or ``None``."""
    m = D.instance.m
    if m < 2:
        return None
    grid = D.grid()
    pair_counts = {}
    for i, j in itertools.combinations(range(m), 2):
        axes = tuple(a for a in range(m) if a not in (i, j))
        pair_counts[i, j] = grid.sum(axis=axes) if axes else grid.astype(int)
    reps: dict[Candidate, tuple[CoinId, CoinId]] = {}
    for z in D:
        for i, j in itertools.combinations(range(m), 2):
            if pair_counts[i, j][z[i] - 1, z[j] - 1] == 1:
                reps[z] = (CoinId(i + 1, z[i]), CoinId(j + 1, z[j]))
                break
        else:
            return None
    return reps


def _pair_spread(reps: dict[Candidate, tuple[CoinId, CoinId]]) -> int:
    """Largest number of partner coins sharing one first coin.

    Only meaningful when every first coin comes from one set, the product
    shape ``{x_i * Delta_i}``; otherwise 0 (unknown).
    """
    firsts = {a.set for a, _ in reps.values()}
    if len(firsts) != 1:
        return 0
    partners: dict[CoinId, set[CoinId]] = {}
    for a, b in reps.values():
        partners.setdefault(a, set()).add(b)
    return max(len(v) for v in partners.values())


def classify_leaf(D: CandidateSet) -> LeafClass:
    n = len(D)
    if n == 0:
        raise ValueError("cannot classify an empty candidate set")
    if n == 1:
        return SINGLETON
    if is_one_representable(D) is not None:
        return LeafClass("one-rep", r=n)
    pairs = is_two_representable(D)
    if pairs is not None:
        return LeafClass("two-rep", t=_pair_spread(pairs), s=n)
    return OTHER


def close_one_representable(D: CandidateSet, reps: dict[Candidate, CoinId] | None = None) -> Tree:
    """Identify the member of a 1-representable set in ceil(log3 |D|) weighings.

    Exactly one representative coin is counterfeit, so this is the classic
    single light coin search over the representatives.
    """
    if reps is None:
        reps = is_one_representable(D)
        if reps is None:
            raise ValueError("candidate set is not 1-representable")
    members = sorted(D)
    if set(members) != set(reps):
        raise ValueError("representative map does not cover the candidate set")
    if len(set(reps.values())) != len(reps):
        raise ValueError("representatives must be distinct")
    return _ternary([(z, reps[z]) for z in members])


def _ternary(items: list[tuple[Candidate, CoinId]]) -> Tree:
    r = len(items)
    if r == 0:
        return Leaf(None)
    if r == 1:
        return Leaf(items[0][0])
    third = 3 ** (ceil_log3(r) - 1)
    a = min(third, r // 2)
    left, right, rest = items[:a], items[a:2 * a], items[2 * a:]
    w = Weighing(frozenset(c for _, c in left), frozenset(c for _, c in right))
    # the light representative's pan rises: left group light means right heavy
    return Node(w, left_heavy=_ternary(right), balanced=_ternary(rest), right_heavy=_ternary(left))
