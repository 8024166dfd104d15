"""Symmetry-reduced representation of a candidate set used by the search.

Each set's live coins are grouped into *cells*: coins of one set whose swap maps
the candidate set onto itself.  Membership then depends only on which cell each
coordinate falls in, so a candidate set is a union of *boxes* (one cell per
set).  Coins that are counterfeit in no member go to a shared pool of
known-genuine coins used to pad pans.

A weighing is a *plan*: for every (set, cell) how many of its coins go left and
right.  Which coins of a cell are used does not matter up to symmetry.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from typing import Iterator

import numpy as np

from ..model import Candidate, CandidateSet, CoinId, Instance, Weighing

Plan = tuple[tuple[tuple[int, int], ...], ...]

# Brute-force tie breaking in canonical keys stops beyond this many orderings;
# past it the key is still exact, just not isomorphism-invariant.
_TIE_LIMIT = 240
# Rows of the weighing table evaluated per matrix product.
_CHUNK = 1 << 22
# Sorted plans held in memory at once before switching to banded streaming.
_MAX_ROWS = 1 << 21


class BoxState:
    __slots__ = ("cells", "boxes", "pool", "size", "_key")

    def __init__(self, cells, boxes, pool):
        self.cells: tuple[tuple[tuple[int, ...], ...], ...] = cells
        self.boxes: frozenset[tuple[int, ...]] = boxes
        self.pool: tuple[CoinId, ...] = pool
        self.size = sum(math.prod(len(cells[i][c]) for i, c in enumerate(b)) for b in boxes)
        self._key = None

    @property
    def m(self) -> int:
        return len(self.cells)

    @classmethod
    def from_candidates(cls, D: CandidateSet) -> BoxState:
        inst = D.instance
        grid = D.grid()
        cells = []
        pool: list[CoinId] = []
        for i, n in enumerate(inst.sizes):
            groups: dict[bytes, list[int]] = {}
            for j in range(n):
                section = np.take(grid, j, axis=i)
                if not section.any():
                    pool.append(CoinId(i + 1, j + 1))
                    continue
                groups.setdefault(section.tobytes(), []).append(j + 1)
            cells.append(tuple(tuple(g) for g in groups.values()))
        lookup = [{j: c for c, coins in enumerate(cs) for j in coins} for cs in cells]
        boxes = set()
        for x in D:
            boxes.add(tuple(lookup[i][v] for i, v in enumerate(x)))
        return normalize(cells, boxes, pool)

    # ------------------------------------------------------------------ views
    def candidates(self) -> Iterator[Candidate]:
        for b in sorted(self.boxes):
            yield from itertools.product(*(self.cells[i][c] for i, c in enumerate(b)))

    def to_candidate_set(self, instance: Instance) -> CandidateSet:
        return CandidateSet.from_candidates(instance, self.candidates())

    def only_member(self) -> Candidate | None:
        if self.size != 1:
            return None
        (b,) = self.boxes
        return tuple(self.cells[i][c][0] for i, c in enumerate(b))

    def live_coins(self) -> int:
        return sum(len(c) for cs in self.cells for c in cs)

    def is_one_representable(self) -> bool:
        """Every member owns a coin that no other member has as counterfeit."""
        owners = defaultdict(int)
        for b in self.boxes:
            for i, c in enumerate(b):
                owners[i, c] += 1
        for b in self.boxes:
            lens = [len(self.cells[i][c]) for i, c in enumerate(b)]
            # a coin of cell b[i] is private iff no other box uses that cell and
            # the other coordinates of the box are pinned (all other cells size 1)
            ok = any(
                owners[i, c] == 1 and all(lens[k] == 1 for k in range(self.m) if k != i)
                for i, c in enumerate(b)
            )
            if not ok:
                return False
        return True

    # ------------------------------------------------------------- canonical
    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = self._canonical_key()
        return self._key

    def _canonical_key(self) -> tuple:
        m = self.m
        boxes = list(self.boxes)
        ncell = [len(cs) for cs in self.cells]
        col = {(i, c): len(self.cells[i][c]) for i in range(m) for c in range(ncell[i])}
        n_colors = len(set(col.values()))
        setcol: list = []
        for _ in range(8):
            setcol = [tuple(sorted(col[i, c] for c in range(ncell[i]))) for i in range(m)]
            inc = defaultdict(list)
            for b in boxes:
                sig = tuple(sorted((setcol[i], col[i, b[i]]) for i in range(m)))
                for i in range(m):
                    inc[i, b[i]].append((setcol[i], sig))
            raw = {k: (col[k], tuple(sorted(inc[k]))) for k in col}
            palette = {v: n for n, v in enumerate(sorted(set(raw.values())))}
            col = {k: palette[v] for k, v in raw.items()}
            if len(palette) == n_colors:
                break
            n_colors = len(palette)
        setcol = [tuple(sorted(col[i, c] for c in range(ncell[i]))) for i in range(m)]

        set_groups = _groups(sorted(range(m), key=lambda i: (setcol[i], i)), lambda i: setcol[i])
        cell_groups = [
            _groups(sorted(range(ncell[i]), key=lambda c: (col[i, c], c)), lambda c, i=i: col[i, c])
            for i in range(m)
        ]
        n_orders = math.prod(math.factorial(len(g)) for g in set_groups)
        n_orders *= math.prod(math.factorial(len(g)) for gs in cell_groups for g in gs)
        genuine = min(len(self.pool), self.live_coins())

        def encode(set_order, cell_orders):
            pos = [None] * m
            for new_i, i in enumerate(set_order):
                pos[i] = new_i
            renum = [{c: k for k, c in enumerate(order)} for order in cell_orders]
            sizes = tuple(tuple(len(self.cells[i][c]) for c in cell_orders[i]) for i in set_order)
            bx = []
            for b in boxes:
                nb = [0] * m
                for i in range(m):
                    nb[pos[i]] = renum[i][b[i]]
                bx.append(tuple(nb))
            bx.sort()
            return (genuine, sizes, tuple(bx))

        if n_orders > _TIE_LIMIT:
            return encode([i for g in set_groups for i in g],
                          [[c for g in cg for c in g] for cg in cell_groups])
        best = None
        for set_perm in itertools.product(*(itertools.permutations(g) for g in set_groups)):
            set_order = [i for g in set_perm for i in g]
            for cell_perm in itertools.product(*(
                itertools.product(*(itertools.permutations(g) for g in cell_groups[i]))
                for i in range(m)
            )):
                cell_orders = [[c for g in cp for c in g] for cp in cell_perm]
                enc = encode(set_order, cell_orders)
                if best is None or enc < best:
                    best = enc
        return best

    # -------------------------------------------------------------- weighings
    def plan_weighing(self, plan: Plan) -> Weighing:
        left: list[CoinId] = []
        right: list[CoinId] = []
        for i, per_cell in enumerate(plan):
            for c, (l, r) in enumerate(per_cell):
                coins = self.cells[i][c]
                left.extend(CoinId(i + 1, j) for j in coins[:l])
                right.extend(CoinId(i + 1, j) for j in coins[l:l + r])
        pad = abs(len(left) - len(right))
        if pad > len(self.pool):
            raise ValueError("not enough known-genuine coins to balance the pans")
        (left if len(left) < len(right) else right).extend(self.pool[:pad])
        return Weighing(frozenset(left), frozenset(right))

    def split(self, plan: Plan) -> tuple[BoxState, BoxState, BoxState]:
        """Children for (left heavy, balanced, right heavy)."""
        m = self.m
        new_cells: list[list[tuple[int, ...]]] = [[] for _ in range(m)]
        parts: list[dict[int, list[tuple[int, int]]]] = [dict() for _ in range(m)]
        for i in range(m):
            for c, coins in enumerate(self.cells[i]):
                l, r = plan[i][c]
                pieces = []
                for sign, chunk in ((1, coins[:l]), (-1, coins[l:l + r]), (0, coins[l + r:])):
                    if chunk:
                        pieces.append((sign, len(new_cells[i])))
                        new_cells[i].append(chunk)
                parts[i][c] = pieces
        out = (set(), set(), set())
        for b in self.boxes:
            for combo in itertools.product(*(parts[i][b[i]] for i in range(m))):
                s = sum(p[0] for p in combo)
                # s > 0: more counterfeits left, so the right pan is heavy
                out[0 if s < 0 else (1 if s == 0 else 2)].add(tuple(p[1] for p in combo))
        cells = tuple(tuple(cs) for cs in new_cells)
        return tuple(normalize(cells, bx, self.pool) for bx in out)  # type: ignore[return-value]

    def weighing_table(self, cap: int) -> list[tuple[int, int, tuple[int, int, int], Plan]]:
        """All plans whose three parts each hold at most ``cap`` members.

        See :meth:`plans`; this materialises the stream.
        """
        return list(self.plans(cap))

    def plans(self, cap: int) -> Iterator[tuple[int, int, tuple[int, int, int], Plan]]:
        """Stream plans whose three parts each hold at most ``cap`` members.

        Yields ``(max part, pan size, (left heavy, balanced, right heavy), plan)``.
        Plans splitting nothing off are dropped, and of a plan and its mirror
        image only the one with left heavy >= right heavy is kept.  Order is
        deterministic: most balanced first, then smaller pans.  When the table
        is too large to hold, it is produced in bands of max-part values.
        """
        if self.size <= 1:
            return
        table = _Table(self)
        lo = -(-self.size // 3)
        hi = min(cap, self.size - 1)
        if lo > hi:
            return
        rows = table.collect(lo, hi, _MAX_ROWS)
        if rows is not None:
            yield from table.decode(rows)
            return
        width = 1
        while lo <= hi:
            top = min(hi, lo + width - 1)
            yield from table.stream(lo, top)
            lo, width = top + 1, width * 2


def _sorted_rows(cols: list[np.ndarray]) -> list[np.ndarray]:
    order = np.lexsort((cols[3], cols[2], cols[1], cols[0]))
    return [c[order] for c in cols]


class _Table:
    """Weighing table of one state, split into two groups of sets.

    The member count of each outcome is bilinear in the two groups' choices,
    so whole blocks of plans are scored with one matrix product.
    """

    def __init__(self, state: BoxState):
        self.state = state
        m = state.m
        opts = [[_cell_options(len(coins)) for coins in cs] for cs in state.cells]
        weight = [math.prod(len(o) for o in opts[i]) for i in range(m)]
        group_a, group_b = _balanced_split(weight)
        ta = self.ta = _GroupTable(state, opts, group_a)
        tb = self.tb = _GroupTable(state, opts, group_b)

        ka = 2 * len(group_a) + 1
        pa_index = {p: k for k, p in enumerate(sorted({ta.project(b) for b in state.boxes}))}
        fa = np.zeros((ta.n, len(pa_index) * ka))
        for p, k in pa_index.items():
            fa[:, k * ka:(k + 1) * ka] = ta.poly(p)
        g_pos = np.zeros((tb.n, len(pa_index) * ka))
        g_zero = np.zeros_like(g_pos)
        half_a, half_b = len(group_a), len(group_b)
        pb_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        for b in state.boxes:
            pa, pb = ta.project(b), tb.project(b)
            if pb not in pb_cache:
                poly = tb.poly(pb)
                # tail[:, j] = members whose group-B difference is >= j - half_b
                pb_cache[pb] = (poly, np.cumsum(poly[:, ::-1], axis=1)[:, ::-1])
            poly, tail = pb_cache[pb]
            base = pa_index[pa] * ka
            for sa in range(-half_a, half_a + 1):
                col = base + sa + half_a
                j = -sa + 1 + half_b  # right heavy needs s_b > -s_a
                if j <= 0:
                    g_pos[:, col] += tail[:, 0]
                elif j <= 2 * half_b:
                    g_pos[:, col] += tail[:, j]
                if -half_b <= -sa <= half_b:
                    g_zero[:, col] += poly[:, -sa + half_b]
        dtype = np.float32 if state.size < (1 << 24) else np.float64
        self.fa = fa.astype(dtype)
        self.g_pos = g_pos.astype(dtype)
        self.g_zero = g_zero.astype(dtype)

    def blocks(self, lo: int, hi: int) -> Iterator[list[np.ndarray]]:
        """Rows ``[max, pan, row_a, row_b, lh, bal, rh]`` with max part in [lo, hi]."""
        ta, tb = self.ta, self.tb
        genuine = len(self.state.pool)
        total = self.state.size
        # only pairs whose pan counts can be evened out with genuine coins matter
        order_b = np.argsort(tb.diff, kind="stable")
        sorted_db = tb.diff[order_b]
        for da in np.unique(ta.diff):
            rows_a = np.flatnonzero(ta.diff == da)
            lo_b = np.searchsorted(sorted_db, -da - genuine, side="left")
            hi_b = np.searchsorted(sorted_db, -da + genuine, side="right")
            if lo_b >= hi_b:
                continue
            rows_b = order_b[lo_b:hi_b]
            gp, gz = self.g_pos[rows_b].T, self.g_zero[rows_b].T
            step = max(1, _CHUNK // len(rows_b))
            for start in range(0, len(rows_a), step):
                ra = rows_a[start:start + step]
                rh = np.rint(self.fa[ra] @ gp).astype(np.int64)
                bal = np.rint(self.fa[ra] @ gz).astype(np.int64)
                lh = total - rh - bal
                biggest = np.maximum(np.maximum(rh, bal), lh)
                ok = (biggest >= lo) & (biggest <= hi) & (lh >= rh)
                ia, ib = np.nonzero(ok)
                if not len(ia):
                    continue
                ga, gb = ra[ia], rows_b[ib]
                used = ta.used[ga] + tb.used[gb]
                keep = used > 0
                if not keep.any():
                    continue
                diff = ta.diff[ga] + tb.diff[gb]
                yield [a[keep] for a in (
                    biggest[ia, ib], (used + np.abs(diff)) // 2, ga, gb,
                    lh[ia, ib], bal[ia, ib], rh[ia, ib],
                )]

    def collect(self, lo: int, hi: int, limit: int) -> list[np.ndarray] | None:
        """All rows in [lo, hi], sorted; ``None`` if there are more than ``limit``."""
        parts: list[list[np.ndarray]] = []
        count = 0
        for block in self.blocks(lo, hi):
            count += len(block[0])
            if count > limit:
                return None
            parts.append(block)
        if not parts:
            return [np.zeros(0, dtype=np.int64)] * 7
        return _sorted_rows([np.concatenate(c) for c in zip(*parts)])

    def stream(self, lo: int, hi: int):
        rows = self.collect(lo, hi, _MAX_ROWS)
        if rows is not None:
            yield from self.decode(rows)
            return
        if lo < hi:
            mid = (lo + hi) // 2
            yield from self.stream(lo, mid)
            yield from self.stream(mid + 1, hi)
            return
        # one max-part value with too many rows: sorted block by block
        pending: list[list[np.ndarray]] = []
        count = 0
        for block in self.blocks(lo, hi):
            pending.append(block)
            count += len(block[0])
            if count >= _MAX_ROWS:
                yield from self.decode(_sorted_rows([np.concatenate(c) for c in zip(*pending)]))
                pending, count = [], 0
        if pending:
            yield from self.decode(_sorted_rows([np.concatenate(c) for c in zip(*pending)]))

    def decode(self, rows: list[np.ndarray]):
        mx, pan, ia, ib, lh, bal, rh = rows
        m = self.state.m
        for k in range(len(mx)):
            plan: list = [None] * m
            for i, pc in self.ta.plan(int(ia[k])).items():
                plan[i] = pc
            for i, pc in self.tb.plan(int(ib[k])).items():
                plan[i] = pc
            yield int(mx[k]), int(pan[k]), (int(lh[k]), int(bal[k]), int(rh[k])), tuple(plan)


def _groups(order, colour):
    out = []
    for _, g in itertools.groupby(order, key=colour):
        out.append(list(g))
    return out


def _cell_options(size: int) -> list[tuple[int, int]]:
    return [(l, r) for l in range(size + 1) for r in range(size + 1 - l)]


def _balanced_split(weight: list[int]) -> tuple[list[int], list[int]]:
    order = sorted(range(len(weight)), key=lambda i: (-weight[i], i))
    a: list[int] = []
    b: list[int] = []
    wa = wb = 0.0
    for i in order:
        lw = math.log(weight[i])
        if wa <= wb:
            a.append(i)
            wa += lw
        else:
            b.append(i)
            wb += lw
    return sorted(a), sorted(b)


class _GroupTable:
    """Every combination of per-cell (left, right) counts over a group of sets."""

    def __init__(self, state: BoxState, opts, sets: list[int]):
        self.state = state
        self.sets = sets
        self.slots = [(i, c) for i in sets for c in range(len(state.cells[i]))]
        radices = [len(opts[i][c]) for i, c in self.slots]
        self.n = math.prod(radices)
        self.opts = opts
        idx = np.arange(self.n, dtype=np.int64)
        self.digits = {}
        self.left = {}
        self.right = {}
        stride = self.n
        diff = np.zeros(self.n, dtype=np.int64)
        used = np.zeros(self.n, dtype=np.int64)
        for (i, c), radix in zip(self.slots, radices):
            stride //= radix
            d = (idx // stride) % radix
            table = np.array(opts[i][c], dtype=np.int64)
            self.digits[i, c] = d
            self.left[i, c] = table[d, 0]
            self.right[i, c] = table[d, 1]
            diff += self.left[i, c] - self.right[i, c]
            used += self.left[i, c] + self.right[i, c]
        self.diff = diff
        self.used = used
        self.radices = radices

    def project(self, box: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(box[i] for i in self.sets)

    def poly(self, proj: tuple[int, ...]) -> np.ndarray:
        """Counts of members by pan difference ``-k..k`` (k = group size)."""
        poly = np.ones((self.n, 1))
        for i, c in zip(self.sets, proj):
            size = len(self.state.cells[i][c])
            l = self.left[i, c].astype(float)
            r = self.right[i, c].astype(float)
            o = size - l - r
            nxt = np.zeros((self.n, poly.shape[1] + 2))
            nxt[:, :-2] += poly * r[:, None]
            nxt[:, 1:-1] += poly * o[:, None]
            nxt[:, 2:] += poly * l[:, None]
            poly = nxt
        return poly

    def plan(self, row: int) -> dict[int, tuple[tuple[int, int], ...]]:
        out: dict[int, list[tuple[int, int]]] = {i: [] for i in self.sets}
        stride = self.n
        for (i, c), radix in zip(self.slots, self.radices):
            stride //= radix
            out[i].append(self.opts[i][c][(row // stride) % radix])
        return {i: tuple(v) for i, v in out.items()}


def normalize(cells, boxes, pool) -> BoxState:
    """Merge interchangeable cells and move dead coins to the genuine pool."""
    m = len(cells)
    cells = [list(cs) for cs in cells]
    boxes = set(boxes)
    pool = list(pool)
    changed = True
    while changed:
        changed = False
        for i in range(m):
            ctx: dict[int, set] = defaultdict(set)
            for b in boxes:
                ctx[b[i]].add(b[:i] + b[i + 1:])
            groups: dict[frozenset, list[int]] = {}
            dead = False
            for c in range(len(cells[i])):
                if c not in ctx:
                    pool.extend(CoinId(i + 1, j) for j in cells[i][c])
                    dead = True
                    continue
                groups.setdefault(frozenset(ctx[c]), []).append(c)
            if not dead and len(groups) == len(cells[i]):
                continue
            merged = sorted((tuple(sorted(j for c in cs for j in cells[i][c])), cs)
                            for cs in groups.values())
            renum = {}
            for k, (_, cs) in enumerate(merged):
                for c in cs:
                    renum[c] = k
            cells[i] = [coins for coins, _ in merged]
            boxes = {b[:i] + (renum[b[i]],) + b[i + 1:] for b in boxes}
            changed = True
    pool.sort()
    return BoxState(tuple(tuple(cs) for cs in cells), frozenset(boxes), tuple(pool))
