"""Problem semantics: instances, coins, candidates, weighings and outcomes.

An instance is a list of coin sets ``S_1..S_m`` of sizes ``n_1..n_m``; each set
holds exactly one counterfeit.  Counterfeits are lighter than genuine coins and
all genuine (resp. counterfeit) coins weigh the same, so a weighing of two
equal-size pans compares the number of counterfeits on each side.

Candidates are enumerated row-major over ``S_1 x ... x S_m`` (first set is the
slowest index).  A :class:`CandidateSet` is a boolean membership mask over that
enumeration.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

Candidate = tuple[int, ...]

#: Largest product space the explicit model will enumerate.
DEFAULT_CAP = 1 << 24


class ModelError(ValueError):
    """Raised for invalid instances, coins, weighings or oversized spaces."""


class Outcome(enum.Enum):
    LEFT_HEAVY = "left_heavy"
    BALANCED = "balanced"
    RIGHT_HEAVY = "right_heavy"

    def mirror(self) -> Outcome:
        if self is Outcome.LEFT_HEAVY:
            return Outcome.RIGHT_HEAVY
        if self is Outcome.RIGHT_HEAVY:
            return Outcome.LEFT_HEAVY
        return self


OUTCOMES = (Outcome.LEFT_HEAVY, Outcome.BALANCED, Outcome.RIGHT_HEAVY)


class CoinId(NamedTuple):
    set: int
    index: int

    def __str__(self) -> str:
        return f"s{self.set}.{self.index}"

    @classmethod
    def parse(cls, text: str) -> CoinId:
        m = re.fullmatch(r"s(\d+)\.(\d+)", text.strip())
        if not m:
            raise ModelError(f"bad coin name {text!r} (expected s<set>.<index>)")
        return cls(int(m.group(1)), int(m.group(2)))


@dataclass(frozen=True)
class Instance:
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes:
            raise ModelError("an instance needs at least one set")
        if any(n < 1 for n in sizes):
            raise ModelError(f"set sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def parse(cls, text: str) -> Instance:
        """Parse ``"4,4,5"`` or ``"4^7"`` (seven sets of four)."""
        text = text.strip().replace(" ", "")
        try:
            if "^" in text:
                n, k = text.split("^")
                return cls((int(n),) * int(k))
            return cls(tuple(int(p) for p in text.split(",")))
        except ValueError as exc:
            raise ModelError(f"bad instance syntax {text!r}") from exc

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def total_coins(self) -> int:
        return sum(self.sizes)

    @property
    def space_size(self) -> int:
        return math.prod(self.sizes)

    def coins(self) -> list[CoinId]:
        return [CoinId(i + 1, j + 1) for i, n in enumerate(self.sizes) for j in range(n)]

    def has_coin(self, coin: CoinId) -> bool:
        return 1 <= coin.set <= self.m and 1 <= coin.index <= self.sizes[coin.set - 1]

    def check_candidate(self, x: Sequence[int]) -> Candidate:
        x = tuple(int(v) for v in x)
        if len(x) != self.m or any(not 1 <= v <= n for v, n in zip(x, self.sizes)):
            raise ModelError(f"candidate {x} out of range for {self.sizes}")
        return x

    def index_of(self, x: Candidate) -> int:
        idx = 0
        for v, n in zip(x, self.sizes):
            idx = idx * n + (v - 1)
        return idx

    def candidate_at(self, idx: int) -> Candidate:
        out = []
        for n in reversed(self.sizes):
            idx, r = divmod(idx, n)
            out.append(r + 1)
        return tuple(reversed(out))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.sizes)) + ")"


def render_candidate(x: Candidate) -> str:
    return "(" + ",".join(map(str, x)) + ")"


def coin_set(x: Candidate) -> frozenset[CoinId]:
    """The coins that are counterfeit under candidate ``x``."""
    return frozenset(CoinId(i + 1, v) for i, v in enumerate(x))


class CandidateSet:
    """An immutable subset of the candidate space, stored as a membership mask."""

    __slots__ = ("instance", "mask")

    def __init__(self, instance: Instance, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.size != instance.space_size:
            raise ModelError("mask length does not match the instance")
        mask.flags.writeable = False
        self.instance = instance
        self.mask = mask

    @classmethod
    def from_candidates(cls, instance: Instance, members: Iterable[Sequence[int]],
                        cap: int = DEFAULT_CAP) -> CandidateSet:
        _check_cap(instance, cap)
        mask = np.zeros(instance.space_size, dtype=bool)
        for x in members:
            mask[instance.index_of(instance.check_candidate(x))] = True
        return cls(instance, mask)

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __iter__(self) -> Iterator[Candidate]:
        for idx in np.flatnonzero(self.mask):
            yield self.instance.candidate_at(int(idx))

    def __contains__(self, x: object) -> bool:
        try:
            x = self.instance.check_candidate(x)  # type: ignore[arg-type]
        except (ModelError, TypeError):
            return False
        return bool(self.mask[self.instance.index_of(x)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CandidateSet):
            return NotImplemented
        return self.instance == other.instance and np.array_equal(self.mask, other.mask)

    def __hash__(self) -> int:
        return hash((self.instance, self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"CandidateSet({self.instance}, {len(self)} members)"

    def grid(self) -> np.ndarray:
        """The mask reshaped to one axis per set."""
        return self.mask.reshape(self.instance.sizes)

    def members(self) -> list[Candidate]:
        return list(self)

    def projection(self, set_index: int) -> list[int]:
        """Coin indices of set ``set_index`` (1-based) that can still be counterfeit."""
        axes = tuple(a for a in range(self.instance.m) if a != set_index - 1)
        alive = self.grid().any(axis=axes) if axes else self.grid()
        return [int(j) + 1 for j in np.flatnonzero(alive)]


def _check_cap(instance: Instance, cap: int) -> None:
    if instance.space_size > cap:
        raise ModelError(
            f"instance too large for explicit model: {instance.space_size} candidates > cap {cap}"
        )


def full_space(instance: Instance, cap: int = DEFAULT_CAP) -> CandidateSet:
    _check_cap(instance, cap)
    return CandidateSet(instance, np.ones(instance.space_size, dtype=bool))


@dataclass(frozen=True)
class Weighing:
    left: frozenset[CoinId]
    right: frozenset[CoinId]

    def __post_init__(self) -> None:
        left = frozenset(CoinId(*c) for c in self.left)
        right = frozenset(CoinId(*c) for c in self.right)
        if left & right:
            dup = ", ".join(sorted(map(str, left & right)))
            raise ModelError(f"coin(s) on both pans: {dup}")
        if len(left) != len(right) or not left:
            raise ModelError(f"pans must be non-empty and equal, got {len(left)} v {len(right)}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def of(cls, instance: Instance, left: Iterable[CoinId | str],
           right: Iterable[CoinId | str]) -> Weighing:
        """Build a weighing and check every coin belongs to ``instance``."""
        def conv(coins):
            out = []
            for c in coins:
                c = CoinId.parse(c) if isinstance(c, str) else CoinId(*c)
                if not instance.has_coin(c):
                    raise ModelError(f"coin {c} not in instance {instance}")
                out.append(c)
            return frozenset(out)
        return cls(conv(left), conv(right))

    def swap(self) -> Weighing:
        return Weighing(self.right, self.left)

    def check(self, instance: Instance) -> None:
        for c in self.left | self.right:
            if not instance.has_coin(c):
                raise ModelError(f"coin {c} not in instance {instance}")

    def __str__(self) -> str:
        return f"{' '.join(map(str, sorted(self.left)))} v {' '.join(map(str, sorted(self.right)))}"


def outcome(w: Weighing, x: Candidate) -> Outcome:
    """Balance reading for weighing ``w`` when the counterfeits are ``x``.

    The pan holding more (light) counterfeits rises, so the other one is heavy.
    """
    fakes = coin_set(x)
    c_left = len(fakes & w.left)
    c_right = len(fakes & w.right)
    if c_left < c_right:
        return Outcome.LEFT_HEAVY
    if c_left > c_right:
        return Outcome.RIGHT_HEAVY
    return Outcome.BALANCED


def pan_difference(w: Weighing, instance: Instance) -> np.ndarray:
    """``c_left - c_right`` for every candidate of ``instance`` (flat, row-major)."""
    w.check(instance)
    diff = np.zeros(instance.sizes, dtype=np.int32)
    for i, n in enumerate(instance.sizes):
        v = np.zeros(n, dtype=np.int32)
        for c in w.left:
            if c.set == i + 1:
                v[c.index - 1] = 1
        for c in w.right:
            if c.set == i + 1:
                v[c.index - 1] = -1
        shape = [1] * instance.m
        shape[i] = n
        diff += v.reshape(shape)
    return diff.reshape(-1)


def partition(D: CandidateSet, w: Weighing) -> dict[Outcome, CandidateSet]:
    """Split ``D`` by the outcome of ``w``."""
    diff = pan_difference(w, D.instance)
    inst = D.instance
    return {
        Outcome.LEFT_HEAVY: CandidateSet(inst, D.mask & (diff < 0)),
        Outcome.BALANCED: CandidateSet(inst, D.mask & (diff == 0)),
        Outcome.RIGHT_HEAVY: CandidateSet(inst, D.mask & (diff > 0)),
    }


def incidence(D: CandidateSet, coin: CoinId) -> np.ndarray:
    """Boolean vector over the enumeration: is ``coin`` counterfeit in member X."""
    inst = D.instance
    coords = np.zeros(inst.sizes, dtype=bool)
    index = [slice(None)] * inst.m
    index[coin.set - 1] = coin.index - 1
    coords[tuple(index)] = True
    return D.mask & coords.reshape(-1)


def coin_classes(D: CandidateSet) -> list[tuple[CoinId, ...]]:
    """Group coins that play interchangeable roles over ``D``.

    Two coins are merged when they have identical incidence over ``D`` or when
    they sit in the same set and swapping them maps ``D`` onto itself.  Coins
    that are counterfeit in no member form the single known-genuine class.
    Classes are ordered by size, then by their packed incidence signature.
    """
    inst = D.instance
    coins = inst.coins()
    parent = {c: c for c in coins}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    by_incidence: dict[bytes, CoinId] = {}
    signature: dict[CoinId, bytes] = {}
    grid = D.grid()
    for i, n in enumerate(inst.sizes):
        by_section: dict[bytes, CoinId] = {}
        for j in range(n):
            c = CoinId(i + 1, j + 1)
            section = np.take(grid, j, axis=i).tobytes()
            if section in by_section:
                union(c, by_section[section])
            else:
                by_section[section] = c
            sig = np.packbits(incidence(D, c)).tobytes()
            signature[c] = sig
            if sig in by_incidence:
                union(c, by_incidence[sig])
            else:
                by_incidence[sig] = c

    groups: dict[CoinId, list[CoinId]] = {}
    for c in coins:
        groups.setdefault(find(c), []).append(c)
    classes = [tuple(sorted(g)) for g in groups.values()]
    classes.sort(key=lambda g: (len(g), min(signature[c] for c in g), g))
    return classes
