"""Weighing enumeration and canonical keys directly on candidate-set masks."""

from __future__ import annotations

import itertools

from ..model import CandidateSet, Weighing, coin_classes, partition, OUTCOMES
from .state import BoxState


def canonical_key(D: CandidateSet) -> tuple:
    """Key shared by candidate sets equal up to coin relabeling within sets
    and reordering of the sets."""
    return BoxState.from_candidates(D).key


def _count_vectors(sizes: list[int]):
    per_class = [[(l, r) for l in range(s + 1) for r in range(s + 1 - l)] for s in sizes]
    for combo in itertools.product(*per_class):
        left = sum(l for l, _ in combo)
        if left >= 1 and left == sum(r for _, r in combo):
            yield combo


def enumerate_weighings(D: CandidateSet) -> list[Weighing]:
    """One weighing per distinct useful split of ``D``.

    Pans are chosen as per-class coin counts over :func:`coin_classes`;
    mirror images and weighings inducing an already seen split are dropped,
    as are weighings that leave ``D`` in one piece.  Ordered by pan size, then
    by the class-count tuple.
    """
    if len(D) < 2:
        return []
    classes = coin_classes(D)
    n = len(D)
    combos = sorted(_count_vectors([len(c) for c in classes]),
                    key=lambda combo: (sum(l for l, _ in combo), combo))
    seen: set[tuple[bytes, ...]] = set()
    out = []
    for combo in combos:
        left, right = [], []
        for cls, (l, r) in zip(classes, combo):
            left.extend(cls[:l])
            right.extend(cls[l:l + r])
        w = Weighing(frozenset(left), frozenset(right))
        parts = partition(D, w)
        sig = tuple(parts[o].mask.tobytes() for o in OUTCOMES)
        if sig in seen or any(len(p) == n for p in parts.values()):
            continue
        seen.add(sig)
        seen.add(sig[::-1])
        out.append(w)
    return out
