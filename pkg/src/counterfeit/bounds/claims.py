"""Claim database, rule-based bound derivation and the claim audit.

Rules:

* R1 (disjoint sum): g1(A + B) <= g1(A) + g1(B), at most ``MAX_PARTS`` parts.
* R2 (arrow closing): an arrow to 1-representable leaves of at most r members
  after k weighings gives g1 <= k + ceil(log3 r).  A single set (n) is the
  trivial arrow (n) ->0 (n).
* R3 (multi-profile arrows): the maximum of R2 over the profiles.  Arrows
  with a 2-representable profile give no bound.
* R4 (rate table, optional): g1(n|k) <= ceil(k mu(n)).
"""

from __future__ import annotations

import itertools
import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..representability import ceil_log3
from .calculus import info_lower_bound, upper_bound_prop1
from .tables import MU_TABLE

MAX_PARTS = 8
KINDS = ("exact", "upper", "arrow", "inequality")
STATUSES = ("PaperClaimed", "Verified", "Derived")
PROFILE_CLASSES = ("singleton", "one-rep", "two-rep")


class ClaimsError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    depth: int
    cls: str
    bound: int | None = None  # one-rep: members per leaf
    t: int | None = None  # two-rep: coins per representing set
    s: int | None = None  # two-rep: members per leaf

    def closing_cost(self) -> int | None:
        """Weighings to finish from such a leaf, or None when unknown."""
        if self.cls == "singleton":
            return self.depth
        if self.cls == "one-rep":
            return self.depth + ceil_log3(self.bound)
        return None

    def __str__(self) -> str:
        if self.cls == "singleton":
            return f"{self.depth}:(1)"
        if self.cls == "one-rep":
            return f"{self.depth}:({self.bound})"
        return f"{self.depth}:({self.t}x{self.s})"


@dataclass(frozen=True)
class Fact:
    tag: str
    subject: tuple[int, ...] | None
    kind: str
    value: int | None
    status: str
    profiles: tuple[Profile, ...] = ()
    trace: tuple[str, ...] = ()
    statement: str = ""

    @property
    def label(self) -> str:
        return subject_label(self.subject) if self.subject else "-"

    def to_dict(self) -> dict:
        out: dict = {"tag": self.tag, "subject": list(self.subject) if self.subject else None,
                     "kind": self.kind, "value": self.value, "status": self.status}
        if self.profiles:
            out["profiles"] = [_profile_dict(p) for p in self.profiles]
        if self.trace:
            out["trace"] = list(self.trace)
        if self.statement:
            out["statement"] = self.statement
        return out


def subject_label(subject: tuple[int, ...]) -> str:
    if len(subject) > 1 and len(set(subject)) == 1:
        return f"{subject[0]}|{len(subject)}"
    return "(" + ",".join(map(str, subject)) + ")"


def _profile_dict(p: Profile) -> dict:
    out = {"depth": p.depth, "class": p.cls}
    if p.cls == "one-rep":
        out["bound"] = p.bound
    elif p.cls == "two-rep":
        out.update(t=p.t, s=p.s)
    return out


def _profile(obj: dict, where: str) -> Profile:
    try:
        cls = obj["class"]
        if cls not in PROFILE_CLASSES:
            raise ClaimsError(f"{where}: unknown leaf class {cls!r}")
        p = Profile(int(obj["depth"]), cls, obj.get("bound"), obj.get("t"), obj.get("s"))
    except (KeyError, TypeError) as exc:
        raise ClaimsError(f"{where}: malformed profile {obj!r}") from exc
    if p.depth < 0 or (cls == "one-rep" and not p.bound) or (cls == "two-rep" and not (p.t and p.s)):
        raise ClaimsError(f"{where}: incomplete profile {obj!r}")
    return p


def fact_from_dict(obj: dict) -> Fact:
    if not isinstance(obj, dict) or "tag" not in obj:
        raise ClaimsError(f"claim record without a tag: {obj!r}")
    tag = obj["tag"]
    kind = obj.get("kind")
    status = obj.get("status", "PaperClaimed")
    if kind not in KINDS:
        raise ClaimsError(f"{tag}: unknown kind {kind!r}")
    if status not in STATUSES:
        raise ClaimsError(f"{tag}: unknown status {status!r}")
    subject = obj.get("subject")
    if kind != "inequality":
        if not subject or not all(isinstance(n, int) and n >= 1 for n in subject):
            raise ClaimsError(f"{tag}: subject must be a non-empty list of positive sizes")
        if not isinstance(obj.get("value"), int):
            raise ClaimsError(f"{tag}: integer value required")
    profiles = tuple(_profile(p, tag) for p in obj.get("profiles", ()))
    if kind == "arrow" and not profiles:
        raise ClaimsError(f"{tag}: arrow without leaf profiles")
    return Fact(tag, tuple(subject) if subject else None, kind, obj.get("value"), status,
                profiles, tuple(obj.get("trace", ())), obj.get("statement", ""))


def load_claims(path: str | Path | None = None) -> list[Fact]:
    """Read a claims file; the bundled database when ``path`` is None."""
    if path is None:
        text = resources.files(__package__).joinpath("claims.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ClaimsError(f"claims file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ClaimsError("claims file must hold a list of records")
    facts = [fact_from_dict(obj) for obj in data]
    tags = Counter(f.tag for f in facts)
    dup = [t for t, c in tags.items() if c > 1]
    if dup:
        raise ClaimsError(f"duplicate tags: {', '.join(dup)}")
    return facts


# -- derivation ----------------------------------------------------------------


def _key(subject) -> tuple[int, ...]:
    return tuple(sorted(subject))


def arrow_bound(fact: Fact) -> int | None:
    """R2/R3 bound of an arrow fact, None when some profile has no known cost."""
    costs = [p.closing_cost() for p in fact.profiles]
    if any(c is None for c in costs):
        return None
    return max(costs)


def _atoms(db: list[Fact], sizes: set[int], counts: Counter, use_table: bool) -> list[Fact]:
    atoms = []
    for f in db:
        if f.kind in ("exact", "upper"):
            atoms.append(f)
        elif f.kind == "arrow":
            b = arrow_bound(f)
            if b is not None:
                rule = "R2" if len(f.profiles) == 1 else "R3"
                atoms.append(Fact(f"{rule}({f.tag})", _key(f.subject), "upper", b, "Derived",
                                  trace=(f"{rule}: {f.tag} {f.label} -> "
                                         + " v ".join(map(str, f.profiles)) + f" gives <= {b}",)))
    for n in sorted(sizes):
        b = ceil_log3(n)
        atoms.append(Fact(f"R2(({n}))", (n,), "upper", b, "Derived",
                          trace=(f"R2: trivial arrow ({n}) ->0 ({n}) gives <= {b}",)))
    if use_table:
        for n in sorted(sizes):
            if n > 81:
                continue
            for k in range(1, counts[n] + 1):
                b = upper_bound_prop1(n, k)
                atoms.append(Fact(f"R4({n}|{k})", (n,) * k, "upper", b.value, "Derived",
                                  trace=(f"R4: ceil({k} * mu({n})) = {b.value} [{b.status}]",)))
    return atoms


def best_decomposition(target: tuple[int, ...], atoms: list[Fact],
                       exclude: set[str] = frozenset(), max_parts: int = MAX_PARTS):
    """Cheapest split of ``target`` into at most ``max_parts`` atom subjects."""
    target = _key(target)
    counts = Counter(target)
    sizes = sorted(counts)
    usable = []
    for a in atoms:
        if a.tag in exclude or a.subject is None:
            continue
        c = Counter(a.subject)
        if all(c[n] <= counts[n] for n in c) and set(c) <= set(counts):
            usable.append((tuple(c[n] for n in sizes), a))
    full = tuple(counts[n] for n in sizes)
    subs = sorted(itertools.product(*(range(c + 1) for c in full)), key=sum)
    # best[p][sub]: (value, parts) using exactly p atoms
    inf = (math.inf, ())
    best = [{s: inf for s in subs} for _ in range(max_parts + 1)]
    zero = tuple(0 for _ in sizes)
    best[0][zero] = (0, ())
    for p in range(1, max_parts + 1):
        prev, cur = best[p - 1], best[p]
        for sub in subs:
            for vec, a in usable:
                rest = tuple(x - y for x, y in zip(sub, vec))
                if min(rest, default=0) < 0 or prev.get(rest, inf)[0] == math.inf:
                    continue
                cand = prev[rest][0] + a.value
                if cand < cur[sub][0]:
                    cur[sub] = (cand, prev[rest][1] + (a,))
    options = [best[p][full] for p in range(1, max_parts + 1) if best[p][full][0] < math.inf]
    if not options:
        return None
    return min(options, key=lambda o: (o[0], len(o[1])))


def derive_bounds(db: list[Fact], targets=(), use_table: bool = False,
                  max_parts: int = MAX_PARTS) -> list[Fact]:
    """Close ``db`` under R1-R3 (and R4 with ``use_table``).

    Returns ``db`` followed by one Derived upper-bound fact per subject (every
    claim subject plus ``targets``) where the rules give some bound.  A
    claim's own value is never used to bound its own subject.
    """
    subjects: dict[tuple[int, ...], None] = {}
    for f in db:
        if f.subject is not None:
            subjects[_key(f.subject)] = None
    for t in targets:
        subjects[_key(t)] = None
    derived: list[Fact] = []
    known = {(f.subject, f.value) for f in db if f.status == "Derived"}
    for subject in subjects:
        counts = Counter(subject)
        atoms = _atoms(db, set(counts), counts, use_table)
        own = {f.tag for f in db if f.kind in ("exact", "upper") and f.status != "Derived"
               and _key(f.subject) == subject}
        found = best_decomposition(subject, atoms, exclude=own, max_parts=max_parts)
        if found is None:
            continue
        value, parts = found
        if (subject, value) in known:
            continue
        if len(parts) == 1:
            trace = parts[0].trace or (f"{parts[0].tag} {parts[0].label} <= {value}",)
        else:
            head = "R1: " + " + ".join(f"{p.label} [{p.tag}] {p.value}" for p in parts) + f" = {value}"
            trace = (head,) + tuple(step for p in parts for step in p.trace)
        derived.append(Fact(f"derived{subject_label(subject)}", subject, "upper", value,
                            "Derived", trace=trace))
    return list(db) + derived


def derived_bound(facts: list[Fact], subject) -> Fact | None:
    """The Derived upper-bound fact for ``subject`` in a closure, if any."""
    key = _key(subject)
    hits = [f for f in facts if f.status == "Derived" and f.subject == key]
    return min(hits, key=lambda f: f.value) if hits else None


# -- audit ---------------------------------------------------------------------


@dataclass
class ClaimCheck:
    tag: str
    subject: str
    value: int
    product: int
    lower: int
    certified: bool  # value >= information bound
    tight: bool

    def to_dict(self) -> dict:
        return dict(vars(self), product=str(self.product))


@dataclass
class AuditReport:
    checks: list[ClaimCheck] = field(default_factory=list)
    rate_matches: list[dict] = field(default_factory=list)
    rate_mismatches: list[dict] = field(default_factory=list)
    better_than_table: list[dict] = field(default_factory=list)
    arrow_bounds: list[dict] = field(default_factory=list)
    reproduced: list[dict] = field(default_factory=list)
    not_reproduced: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.certified and c.tight for c in self.checks) and not self.rate_mismatches

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "claims": [c.to_dict() for c in self.checks],
            "all_certified": all(c.certified for c in self.checks),
            "all_tight": all(c.tight for c in self.checks),
            "rate_table_matches": self.rate_matches,
            "rate_table_mismatches": self.rate_mismatches,
            "better_than_table": self.better_than_table,
            "arrow_bounds": self.arrow_bounds,
            "reproduced": self.reproduced,
            "not_reproduced": self.not_reproduced,
            "wall_time": round(self.wall_time, 6),
        }


def audit_claims(db: list[Fact] | None = None, use_table: bool = False) -> AuditReport:
    """Certify each exact value against the information bound and cross-check
    the rate table and the derivation engine."""
    start = time.monotonic()
    db = load_claims() if db is None else db
    report = AuditReport()
    exact = [f for f in db if f.kind == "exact"]
    for f in exact:
        prod = math.prod(f.subject)
        lb = info_lower_bound(f.subject)
        report.checks.append(ClaimCheck(
            f.tag, f.label, f.value, prod, lb,
            certified=f.value >= lb,
            # tight: 3**(v-1) < prod <= 3**v
            tight=3 ** (f.value - 1) < prod <= 3 ** f.value if f.value > 0 else prod == 1,
        ))

    uniform = {(f.subject[0], len(f.subject)): f for f in exact if len(set(f.subject)) == 1}
    for n, e in MU_TABLE.items():
        hit = uniform.get((n, e.k0))
        if hit is not None:
            row = {"n": n, "mu": str(e.mu), "k0": e.k0, "mu_k0": e.g_at_k0,
                   "tag": hit.tag, "claimed": hit.value}
            (report.rate_matches if hit.value == e.g_at_k0 else report.rate_mismatches).append(row)
    for (n, k), f in sorted(uniform.items()):
        if n in MU_TABLE and f.value < MU_TABLE[n].mu * k:
            report.better_than_table.append({"tag": f.tag, "subject": f.label, "rate": f"{f.value}/{k}",
                                             "mu": str(MU_TABLE[n].mu)})

    closure = derive_bounds(db, use_table=use_table)
    for f in db:
        if f.kind == "arrow":
            b = arrow_bound(f)
            lb = info_lower_bound(f.subject)
            report.arrow_bounds.append({
                "tag": f.tag, "subject": f.label, "profiles": [str(p) for p in f.profiles],
                "bound": b, "lower": lb, "tight": b == lb if b is not None else None,
                "note": "" if b is not None else "2-representable leaves: closing cost unknown",
            })
    for f in db:
        if f.kind not in ("exact", "upper"):
            continue
        d = derived_bound(closure, f.subject)
        row = {"tag": f.tag, "subject": f.label, "claimed": f.value,
               "derived": d.value if d else None, "trace": list(d.trace) if d else []}
        (report.reproduced if d and d.value <= f.value else report.not_reproduced).append(row)
    report.wall_time = time.monotonic() - start
    return report


def render_audit(report: AuditReport) -> str:
    lines = [f"{'tag':<7} {'subject':<18} {'value':>5} {'IT':>4}  status"]
    for c in report.checks:
        status = "IT-tight" if c.tight else ("above IT" if c.certified else "BELOW IT")
        lines.append(f"{c.tag:<7} {c.subject:<18} {c.value:>5} {c.lower:>4}  {status}")
    lines.append("")
    lines.append(f"rate table: {len(report.rate_matches)} matches, "
                 f"{len(report.rate_mismatches)} mismatches")
    for m in report.rate_mismatches:
        lines.append(f"  MISMATCH n={m['n']}: mu*k0={m['mu_k0']} vs {m['tag']}={m['claimed']}")
    for b in report.better_than_table:
        lines.append(f"  note: {b['tag']} {b['subject']} rate {b['rate']} beats mu={b['mu']}")
    lines.append("")
    lines.append("arrow bounds:")
    for a in report.arrow_bounds:
        val = a["bound"] if a["bound"] is not None else "none"
        lines.append(f"  {a['tag']:<6} {a['subject']:<10} <= {val} (IT {a['lower']}) {a['note']}")
    lines.append("")
    lines.append(f"reproduced by the derivation rules: {', '.join(r['tag'] for r in report.reproduced) or 'none'}")
    lines.append(f"not reproduced: {', '.join(r['tag'] for r in report.not_reproduced) or 'none'}")
    lines.append(f"all certified: {all(c.certified for c in report.checks)}, "
                 f"all IT-tight: {all(c.tight for c in report.checks)}, "
                 f"time {report.wall_time:.3f}s")
    return "\n".join(lines)
