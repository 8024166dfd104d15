"""Exact bound arithmetic over the rate table and the reduction ladder.

Every inequality that decides a bound is settled by comparing integer powers;
decimals are produced only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

from ..representability import ceil_log3
from .tables import LADDER_D, LAMBDA_LADDER, MU_TABLE, mu

CLAIMED_EPSILON = Fraction(76, 1000)
DISPLAY_DIGITS = 30
LIST1_TOLERANCE = Decimal("0.001")


def info_lower_bound(sizes: Sequence[int] | int, k: int | None = None) -> int:
    """Smallest t with 3**t >= prod(sizes); ``info_lower_bound(n, k)`` for n^k."""
    if isinstance(sizes, int):
        sizes = (sizes,) * (1 if k is None else k)
    elif k is not None:
        raise TypeError("k is only accepted together with a single size")
    if any(n < 1 for n in sizes):
        raise ValueError("set sizes must be positive")
    return ceil_log3(math.prod(sizes))


def compare_log3(r: Fraction, m: Fraction | int) -> int:
    """Sign of ``r - log3(m)`` for rational r and rational m > 0, exactly."""
    r, m = Fraction(r), Fraction(m)
    if m <= 0:
        raise ValueError("log3 needs a positive argument")
    a, b = r.numerator, r.denominator
    # r > log3 m  <=>  3**a > m**b  <=>  3**a * den**b > num**b
    lhs = m.denominator ** b
    rhs = m.numerator ** b
    if a >= 0:
        lhs *= 3 ** a
    else:
        rhs *= 3 ** (-a)
    return (lhs > rhs) - (lhs < rhs)


def log3_decimal(x: Fraction | int, digits: int = DISPLAY_DIGITS) -> Decimal:
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits + 10
        value = (Decimal(x.numerator).ln() - Decimal(x.denominator).ln()) / Decimal(3).ln()
        ctx.prec = digits
        return +value


def to_decimal(x: Fraction, digits: int = DISPLAY_DIGITS) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(x.numerator) / Decimal(x.denominator)


def mu_at_least_log3(n: int) -> bool:
    """Certify mu(n) >= log3 n, i.e. 3**p >= n**q for mu = p/q."""
    return compare_log3(mu(n), n) >= 0


@dataclass(frozen=True)
class Bound:
    value: int
    status: str  # PaperClaimed | Derived
    note: str = ""


def upper_bound_prop1(n: int, k: int) -> Bound:
    """ceil(k * mu(n)) for n <= 81.

    Only multiples of k0(n) follow by repeating the k0(n)-set strategy; other
    k are carried as claimed.
    """
    if k < 1:
        raise ValueError("k must be positive")
    rate = mu(n)
    value = math.ceil(k * rate)
    k0 = rate.denominator
    if k % k0 == 0:
        return Bound(value, "Derived", f"{n}|{k0} strategy repeated {k // k0} times")
    return Bound(value, "PaperClaimed", f"k0({n}) = {k0} does not divide {k}")


@dataclass(frozen=True)
class Reduction:
    n: int
    l: int
    lam: Fraction
    j: int
    d: int
    d_j: int


def reduce_large_n(n: int) -> Reduction:
    """Write n = lam * 3**l with 1 < lam <= 3 and bracket lam on the ladder."""
    if n <= 81:
        raise ValueError("reduction applies to n > 81")
    l = 0
    while 3 ** (l + 1) < n:
        l += 1
    lam = Fraction(n, 3 ** l)
    assert 1 < lam <= 3
    j = next(i for i in range(1, len(LAMBDA_LADDER)) if lam <= LAMBDA_LADDER[i])
    d = math.ceil(lam * 27)
    d_j = LADDER_D[j]
    assert LAMBDA_LADDER[j - 1] < lam and d <= d_j
    return Reduction(n, l, lam, j, d, d_j)


def ceil_k_log3_plus(n: Fraction | int, k: int, rate: Fraction) -> int:
    """Smallest integer t with t >= k * (log3 n + rate), exactly."""
    n = Fraction(n)
    target = k * rate
    # t >= k log3 n + target  <=>  (t - target) / k >= log3 n
    guess = math.floor(k * math.log(n, 3) + float(target)) - 2
    t = guess
    while compare_log3((t - target) / k, n) < 0:
        t += 1
    while compare_log3((t - 1 - target) / k, n) >= 0:
        t -= 1
    return t


@dataclass(frozen=True)
class Prop2Bound:
    n: int
    k: int
    lower: int
    claimed: int
    derived: int
    epsilon_star: Decimal
    constructive: int | None
    route: str

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "lower": self.lower,
            "upper_claimed_epsilon": self.claimed,
            "upper_derived_epsilon": self.derived,
            "epsilon_claimed": str(to_decimal(CLAIMED_EPSILON, 6)),
            "epsilon_derived": str(self.epsilon_star),
            "constructive": self.constructive,
            "route": self.route,
        }


def upper_bound_prop2(n: int, k: int, epsilon_mode: str = "claimed") -> int:
    """ceil(k (log3 n + eps)) with eps = 0.076 ("claimed") or the certified gap ("derived")."""
    if epsilon_mode == "claimed":
        return ceil_k_log3_plus(n, k, CLAIMED_EPSILON)
    if epsilon_mode == "derived":
        return _prop2_derived(n, k)
    raise ValueError(f"unknown epsilon mode {epsilon_mode!r}")


def _prop2_derived(n: int, k: int) -> int:
    g = gap_report().worst
    # eps* = mu(d_i) - log3(m_i), so k(log3 n + eps*) = k log3(n / m_i) + k mu(d_i)
    return ceil_k_log3_plus(Fraction(n, g.m), k, g.mu)


def constructive_bound(n: int, k: int) -> tuple[int, str]:
    """Bound obtained by spending l - 3 weighings per set and then using the table."""
    if n <= 81:
        b = upper_bound_prop1(n, k)
        return b.value, f"ceil({k} * mu({n}))"
    red = reduce_large_n(n)
    tail = upper_bound_prop1(red.d_j, k).value
    return k * (red.l - 3) + tail, f"{k} * {red.l - 3} + ceil({k} * mu({red.d_j}))"


def prop2_bounds(n: int, k: int) -> Prop2Bound:
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    value, route = constructive_bound(n, k)
    return Prop2Bound(
        n=n, k=k,
        lower=info_lower_bound(n, k),
        claimed=ceil_k_log3_plus(n, k, CLAIMED_EPSILON),
        derived=_prop2_derived(n, k),
        epsilon_star=gap_report().epsilon_star,
        constructive=value,
        route=route,
    )


@dataclass(frozen=True)
class Gap:
    i: int
    d: int
    m: int  # previous breakpoint + 1
    mu: Fraction
    value: Decimal
    positive: bool
    exceeds_claimed: bool

    def to_dict(self) -> dict:
        return {"i": self.i, "d": self.d, "log3_of": self.m, "mu": str(self.mu),
                "gap": str(self.value), "positive": self.positive,
                "exceeds_0.076": self.exceeds_claimed}


@dataclass(frozen=True)
class GapReport:
    gaps: tuple[Gap, ...]
    argmax: int  # index into gaps
    claimed_epsilon: Fraction = CLAIMED_EPSILON
    exceedances: tuple[int, ...] = field(default=())

    @property
    def worst(self) -> Gap:
        return self.gaps[self.argmax]

    @property
    def epsilon_star(self) -> Decimal:
        return self.worst.value

    @property
    def within_claimed_epsilon(self) -> bool:
        return not self.exceedances

    def to_dict(self) -> dict:
        return {
            "epsilon_star": str(self.epsilon_star),
            "argmax_d": self.worst.d,
            "argmax_i": self.worst.i,
            "claimed_epsilon": str(to_decimal(self.claimed_epsilon, 6)),
            "within_claimed_epsilon": self.within_claimed_epsilon,
            "exceeding_d": [self.gaps[i].d for i in self.exceedances],
            "gaps": [g.to_dict() for g in self.gaps],
        }


def _gap_greater(a: Gap, b: Gap) -> int:
    """Sign of gap(a) - gap(b): (mu_a - mu_b) - log3(m_a / m_b)."""
    return compare_log3(a.mu - b.mu, Fraction(a.m, b.m))


_GAP_CACHE: list[GapReport] = []


def gap_report() -> GapReport:
    """Gaps mu(d_i) - log3(d_{i-1} + 1) along the ladder, i = 1..25."""
    if _GAP_CACHE:
        return _GAP_CACHE[0]
    gaps = []
    for i in range(1, len(LADDER_D)):
        d, m = LADDER_D[i], LADDER_D[i - 1] + 1
        rate = mu(d)
        with localcontext() as ctx:
            ctx.prec = DISPLAY_DIGITS
            value = to_decimal(rate, DISPLAY_DIGITS + 5) - log3_decimal(m, DISPLAY_DIGITS + 5)
        gaps.append(Gap(
            i=i, d=d, m=m, mu=rate, value=value,
            positive=compare_log3(rate, m) > 0,
            exceeds_claimed=compare_log3(rate - CLAIMED_EPSILON, m) > 0,
        ))
    best = 0
    for idx in range(1, len(gaps)):
        if _gap_greater(gaps[idx], gaps[best]) > 0:
            best = idx
    report = GapReport(tuple(gaps), best,
                       exceedances=tuple(i for i, g in enumerate(gaps) if g.exceeds_claimed))
    _GAP_CACHE.append(report)
    return report


@dataclass(frozen=True)
class TableRow:
    n: int
    mu: Fraction
    k0: int
    log3: Decimal
    printed: str | None
    delta: Decimal | None
    mu_ok: bool

    @property
    def printed_ok(self) -> bool:
        return self.delta is None or abs(self.delta) <= LIST1_TOLERANCE

    def to_dict(self) -> dict:
        return {"n": self.n, "mu": str(self.mu), "k0": self.k0,
                "log3": str(round(self.log3, 6)), "printed": self.printed,
                "delta": None if self.delta is None else str(round(self.delta, 6)),
                "printed_ok": self.printed_ok, "mu_ge_log3": self.mu_ok}


def rate_table(ns: Iterable[int] = range(1, 82)) -> list[TableRow]:
    rows = []
    for n in ns:
        e = MU_TABLE[n]
        value = log3_decimal(n, 12)
        delta = None if e.log3_printed is None else Decimal(e.log3_printed) - value
        rows.append(TableRow(n, e.mu, e.k0, value, e.log3_printed, delta, mu_at_least_log3(n)))
    return rows
