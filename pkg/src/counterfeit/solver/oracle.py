"""Brute-force reference for the minimum number of weighings.

Deliberately naive: every raw pair of disjoint equal pans is tried, nothing is
canonicalised or memoised, and coins are never grouped.  Only the information
bound is used to cut hopeless branches.
"""

from __future__ import annotations

import itertools

from ..model import CandidateSet, Instance

MAX_CANDIDATES = 12
MAX_COINS = 12


def raw_weighings(n_coins: int):
    """All ordered (left, right) bitmask pairs of disjoint, equal, non-empty pans."""
    coins = range(n_coins)
    for k in range(1, n_coins // 2 + 1):
        for left in itertools.combinations(coins, k):
            rest = [c for c in coins if c not in left]
            lmask = sum(1 << c for c in left)
            for right in itertools.combinations(rest, k):
                yield lmask, sum(1 << c for c in right)


def _bits(instance: Instance, x) -> int:
    offsets = [0]
    for n in instance.sizes[:-1]:
        offsets.append(offsets[-1] + n)
    return sum(1 << (off + v - 1) for off, v in zip(offsets, x))


def oracle_min_depth(D: CandidateSet) -> int:
    inst = D.instance
    members = [_bits(inst, x) for x in D]
    if not members:
        raise ValueError("oracle needs a non-empty candidate set")
    if len(members) > MAX_CANDIDATES or inst.total_coins > MAX_COINS:
        raise ValueError(
            f"oracle limited to {MAX_CANDIDATES} candidates and {MAX_COINS} coins"
        )
    weighings = list(raw_weighings(inst.total_coins))
    t = 0
    while 3 ** t < len(members):
        t += 1
    while not _solvable(members, t, weighings):
        t += 1
    return t


def _solvable(members: list[int], t: int, weighings) -> bool:
    if len(members) <= 1:
        return True
    if t == 0 or len(members) > 3 ** t:
        return False
    cap = 3 ** (t - 1)
    for lmask, rmask in weighings:
        parts: tuple[list[int], list[int], list[int]] = ([], [], [])
        for x in members:
            cl = (x & lmask).bit_count()
            cr = (x & rmask).bit_count()
            parts[0 if cl < cr else (1 if cl == cr else 2)].append(x)
        if max(len(p) for p in parts) > cap or max(len(p) for p in parts) == len(members):
            continue
        if all(_solvable(p, t - 1, weighings) for p in parts):
            return True
    return False
