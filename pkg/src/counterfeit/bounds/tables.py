"""Fixed tables: the per-set weighing rates mu(n) for n <= 81 and the ladder of
breakpoints used to reduce larger n."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

# n: (mu(n), log3 n as printed, or None where the table leaves it blank)
_RAW = """
1 0 0 | 2 2/3 0.631 | 3 1 1 | 4 9/7 1.262 | 5 3/2 1.465 | 6 5/3 1.631 | 7 9/5 1.771
8 21/11 1.891 | 9 2 2 | 10 17/8 2.096 | 11 11/5 2.183 | 12 16/7 2.262 | 13 19/8 2.335
14 22/9 2.402 | 15 5/2 2.465 | 16 23/9 2.524 | 17 13/5 2.579 | 18 8/3 2.631
19 19/7 2.680 | 20 11/4 2.727 | 21 14/5 2.771 | 22 17/6 2.814 | 23 23/8 2.854
24 32/11 2.893 | 25 3 2.93 | 26 3 2.96 | 27 3 3 | 28 28/9 3.033 | 29 31/10 3.065
30 25/8 3.096 | 31 19/6 3.126 | 32 19/6 3.155 | 33 16/5 3.183 | 34 13/4 3.210
35 13/4 3.236 | 36 23/7 3.262 | 37 10/3 3.287 | 38 10/3 3.311 | 39 27/8 3.335
40 27/8 3.358 | 41 31/9 3.380 | 42 31/9 3.402 | 43 7/2 3.424 | 44 7/2 3.445
45 7/2 3.465 | 46 7/2 3.485 | 47 32/9 3.505 | 48 32/9 3.524 | 49 32/9 3.543
50 18/5 3.561 | 51 18/5 3.579 | 52 29/8 3.597 | 53 11/3 3.614 | 54 11/3 3.631
55 37/10 3.648 | 56 37/10 3.664 | 57 26/7 3.680 | 58 26/7 3.696 | 59 15/4 3.712
60 15/4 3.727 | 61 15/4 3.742 | 62 19/5 3.757 | 63 19/5 3.771 | 64 23/6 3.786
65 23/6 3.800 | 66 23/6 3.814 | 67 31/8 3.827 | 68 31/8 3.841 | 69 31/8 3.854
70 39/10 3.867 | 71 43/11 3.880 | 72 43/11 3.893 | 73 47/12 3.905 | 74 75/19 3.918
75 75/19 3.930 | 76 75/19 3.942 | 77 4 3.954 | 78 4 - | 79 4 - | 80 4 - | 81 4 4
"""


@dataclass(frozen=True)
class MuEntry:
    n: int
    mu: Fraction
    log3_printed: str | None  # None: blank in the table

    @property
    def k0(self) -> int:
        """Number of sets the rate was established for (denominator of mu)."""
        return self.mu.denominator

    @property
    def g_at_k0(self) -> int:
        return int(self.mu * self.k0)


def _load() -> dict[int, MuEntry]:
    table = {}
    for cell in _RAW.replace("\n", " | ").split("|"):
        cell = cell.strip()
        if not cell:
            continue
        n, mu, printed = cell.split()
        table[int(n)] = MuEntry(int(n), Fraction(mu), None if printed == "-" else printed)
    return table


MU_TABLE: dict[int, MuEntry] = _load()
assert sorted(MU_TABLE) == list(range(1, 82))

LAMBDA_LADDER: tuple[Fraction, ...] = tuple(Fraction(s) for s in (
    "1 28/27 10/9 32/27 11/9 35/27 4/3 38/27 40/27 14/9 44/27 46/27 49/27 "
    "17/9 52/27 2 56/27 58/27 61/27 7/3 22/9 23/9 70/27 8/3 76/27 3"
).split())
assert len(LAMBDA_LADDER) == 26

#: Ladder breakpoints scaled to 27 coins: d_i = 27 * lambda_i.
LADDER_D: tuple[int, ...] = tuple(int(lam * 27) for lam in LAMBDA_LADDER)


def mu(n: int) -> Fraction:
    if n not in MU_TABLE:
        raise ValueError(f"mu(n) is tabulated for 1 <= n <= 81, got {n}")
    return MU_TABLE[n].mu


def k0(n: int) -> int:
    mu(n)
    return MU_TABLE[n].k0
