"""Command-line entry point.

Exit codes: 0 success, 1 verification/audit failure (or a refuted arrow),
2 usage error, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds.calculus import (
    gap_report,
    info_lower_bound,
    prop2_bounds,
    rate_table,
    upper_bound_prop1,
)
from .bounds.claims import ClaimsError, audit_claims, load_claims, render_audit
from .model import Instance, ModelError, Outcome, full_space
from .representability import ceil_log3
from .solver.search import (
    ArrowSpec,
    LeafProfile,
    SearchBudget,
    Searcher,
    Status,
    close_arrow,
    describe_leaves,
)
from .strategy import Node, Open, StrategyError, infer_instance, parse, serialize, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

_ANSWERS = {
    "l": Outcome.LEFT_HEAVY, "left": Outcome.LEFT_HEAVY,
    "b": Outcome.BALANCED, "balanced": Outcome.BALANCED,
    "r": Outcome.RIGHT_HEAVY, "right": Outcome.RIGHT_HEAVY,
}


class UsageError(Exception):
    pass


def _instance(text: str) -> Instance:
    try:
        return Instance.parse(text)
    except ModelError as exc:
        raise UsageError(str(exc)) from None


def _profile(text: str) -> LeafProfile:
    """``DEPTH:BOUND`` (1-representable), ``DEPTH:one-rep:BOUND``,
    ``DEPTH:two-rep:BOUND`` or ``DEPTH:singleton``."""
    parts = text.split(":")
    try:
        if len(parts) == 2 and parts[1] == "singleton":
            return LeafProfile(int(parts[0]), "singleton", 1)
        if len(parts) == 2:
            return LeafProfile(int(parts[0]), "one-rep", int(parts[1]))
        if len(parts) == 3 and parts[1] in ("one-rep", "two-rep"):
            return LeafProfile(int(parts[0]), parts[1], int(parts[2]))
    except ValueError:
        pass
    raise UsageError(f"bad leaf profile {text!r} (expected e.g. 3:4 or 3:two-rep:7)")


def _budget(args) -> SearchBudget:
    try:
        return SearchBudget(args.max_depth, args.node_limit, args.time_limit)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(obj: dict, args) -> None:
    if getattr(args, "no_timing", False):
        obj.pop("wall_time", None)
    print(json.dumps(obj, indent=2))


def _read_tree(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text)


# ------------------------------------------------------------------ commands

def cmd_solve(args) -> int:
    inst = _instance(args.instance)
    searcher = Searcher(canonical=not args.debug, threads=args.threads)
    try:
        D = full_space(inst)
    except ModelError as exc:
        raise UsageError(str(exc)) from None
    result = searcher.min_depth(D, _budget(args))
    if result.status is Status.OPTIMAL and args.emit:
        Path(args.emit).write_text(serialize(result.tree))
    if args.json:
        out = result.to_dict(inst)
        out["information_bound"] = ceil_log3(inst.space_size)
        if args.emit and result.status is Status.OPTIMAL:
            out["emitted"] = args.emit
        _emit(out, args)
    else:
        s = result.stats
        if result.status is Status.OPTIMAL:
            print(f"g1{inst} = {result.depth} (optimal, information bound "
                  f"{ceil_log3(inst.space_size)})")
        elif result.status is Status.INFEASIBLE:
            print(f"g1{inst} > {result.lower_bound - 1}: no strategy within the depth limit; "
                  f"bounds {result.lower_bound}..{result.upper_bound}")
        else:
            print(f"g1{inst}: budget exhausted; bounds {result.lower_bound}..{result.upper_bound}")
        timing = "" if args.no_timing else f" time={s.wall_time:.3f}s"
        print(f"nodes={s.nodes} memo_hits={s.memo_hits} memo_size={s.memo_size}{timing}")
        if args.emit and result.status is Status.OPTIMAL:
            print(f"strategy written to {args.emit}")
    return EXIT_OK if result.status is Status.OPTIMAL else EXIT_BUDGET


def cmd_verify(args) -> int:
    try:
        tree = _read_tree(args.strategy)
        inst = _instance(args.instance) if args.instance else infer_instance(tree)
        report = verify(tree, inst)
    except StrategyError as exc:
        if args.json:
            _emit({"ok": False, "error": str(exc)}, args)
        else:
            print(f"invalid strategy: {exc}")
        return EXIT_FAIL
    if args.json:
        out = report.to_dict()
        out["instance"] = list(inst.sizes)
        _emit(out, args)
    else:
        verdict = "VERIFIED" if report.ok else "FAILED"
        print(f"{verdict}: instance {inst}, depth {report.depth}, "
              f"{report.checked} candidates checked, sound={report.sound}, "
              f"complete={report.complete}")
        for x, path, reason in report.failures[:10]:
            print(f"  ({','.join(map(str, x))}) at {path}: {reason}")
        for w in report.warnings:
            print(f"  warning: {w}")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_bounds(args) -> int:
    if args.k is None:
        inst = _instance(args.subject)
        lb = info_lower_bound(inst.sizes)
        if args.json:
            _emit({"instance": list(inst.sizes), "lower": lb}, args)
        else:
            print(f"information bound for {inst}: {lb}")
        return EXIT_OK
    try:
        n, k = int(args.subject), int(args.k)
        if n < 1 or k < 1:
            raise ValueError
    except ValueError:
        raise UsageError("bounds takes positive integers N K (or one instance)") from None
    b = prop2_bounds(n, k)
    out = b.to_dict()
    if n <= 81:
        p1 = upper_bound_prop1(n, k)
        out["table_bound"] = {"value": p1.value, "status": p1.status, "note": p1.note}
    if args.json:
        _emit(out, args)
        return EXIT_OK
    print(f"g1({n}|{k}):")
    print(f"  lower (information bound)      {b.lower}")
    if n <= 81:
        print(f"  table bound ceil(k mu(n))      {out['table_bound']['value']} "
              f"[{out['table_bound']['status']}]")
    print(f"  ceil(k (log3 n + 0.076))       {b.claimed}")
    print(f"  ceil(k (log3 n + eps*))        {b.derived}   eps* = {b.epsilon_star:.10f}")
    print(f"  constructive route             {b.constructive}   = {b.route}")
    return EXIT_OK


def cmd_table(args) -> int:
    rows = rate_table()
    gaps = gap_report()
    if args.json:
        _emit({"rows": [r.to_dict() for r in rows], "gap_report": gaps.to_dict()}, args)
        return EXIT_OK
    print(f"{'n':>3} {'mu':>7} {'k0':>3} {'log3 n':>9} {'printed':>8} {'delta':>9}  flags")
    for r in rows:
        delta = "" if r.delta is None else f"{r.delta:+.5f}"
        flags = []
        if not r.printed_ok:
            flags.append("printed value off by more than 0.001")
        if not r.mu_ok:
            flags.append("mu < log3 n")
        print(f"{r.n:>3} {str(r.mu):>7} {r.k0:>3} {r.log3:>9.5f} {r.printed or '-':>8} "
              f"{delta:>9}  {'; '.join(flags)}")
    print()
    print("ladder gaps mu(d_i) - log3(d_{i-1}+1):")
    for g in gaps.gaps:
        mark = "  > 0.076" if g.exceeds_claimed else ""
        print(f"  d={g.d:>2} mu={str(g.mu):>6} vs log3({g.m:>2}): {g.value:.10f}{mark}")
    w = gaps.worst
    print(f"eps* = {gaps.epsilon_star:.12f} at d={w.d}; "
          f"{'within' if gaps.within_claimed_epsilon else 'EXCEEDS'} 0.076 "
          f"(exceeded at d = {', '.join(str(gaps.gaps[i].d) for i in gaps.exceedances) or 'none'})")
    return EXIT_OK


def cmd_audit(args) -> int:
    try:
        db = load_claims(args.claims)
    except (ClaimsError, OSError) as exc:
        raise UsageError(str(exc)) from None
    report = audit_claims(db, use_table=args.table)
    if args.json:
        _emit(report.to_dict(), args)
    else:
        print(render_audit(report))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_arrow(args) -> int:
    inst = _instance(args.instance)
    if not args.profile:
        raise UsageError("arrow needs at least one --profile")
    spec = ArrowSpec(inst, tuple(_profile(p) for p in args.profile))
    searcher = Searcher(canonical=not args.debug, threads=args.threads)
    result = searcher.find_arrow(spec, _budget(args))
    out = result.to_dict(inst)
    code = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_FAIL,
            Status.EXHAUSTED: EXIT_BUDGET}[result.status]
    full = None
    if result.status is Status.OPTIMAL:
        out["leaves"] = [{"depth": d, "class": c, "members": m}
                         for d, c, m in describe_leaves(result.tree)]
        if args.close:
            full = close_arrow(result.tree, inst)
            report = verify(full, inst)
            out["closed_depth"] = report.depth
            out["closed_verified"] = report.ok
            if not report.ok:
                code = EXIT_FAIL
        if args.emit:
            Path(args.emit).write_text(serialize(full if full is not None else result.tree))
            out["emitted"] = args.emit
    if args.json:
        _emit(out, args)
        return code
    profiles = " v ".join(f"{p.depth}:{p.kind}<={p.bound}" for p in spec.profiles)
    print(f"arrow {inst} -> {profiles}: {result.status.value}")
    for leaf in out.get("leaves", []):
        print(f"  depth {leaf['depth']} {leaf['class']}: {' '.join(leaf['members'])}")
    if full is not None:
        print(f"closed strategy depth {out['closed_depth']}, verified={out['closed_verified']}")
    return code


def cmd_play(args) -> int:
    try:
        tree = _read_tree(args.strategy)
    except StrategyError as exc:
        print(f"invalid strategy: {exc}")
        return EXIT_FAIL
    node, step = tree, 0
    while isinstance(node, Node):
        step += 1
        w = node.weigh
        print(f"Weighing {step}: left pan {' '.join(map(str, sorted(w.left)))} | "
              f"right pan {' '.join(map(str, sorted(w.right)))}")
        while True:
            try:
                reply = input("Which pan is heavier? [L]eft / [B]alanced / [R]ight: ")
            except EOFError:
                print("\naborted")
                return EXIT_USAGE
            o = _ANSWERS.get(reply.strip().lower())
            if o is not None:
                break
            print("Please answer L, B or R.")
        node = node.child(o)
    if isinstance(node, Open):
        members = " ".join("(" + ",".join(map(str, x)) + ")" for x in sorted(node.domain))
        print(f"Unresolved: counterfeits are one of {members}")
        return EXIT_OK
    if node.answer is None:
        print("No assignment of counterfeits is consistent with these readings.")
        return EXIT_FAIL
    coins = " ".join(f"s{i}.{v}" for i, v in enumerate(node.answer, start=1))
    print(f"Counterfeit coins: {coins}")
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _add_budget(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-depth", type=int, default=None,
                   help="deepest strategy tried (default: information bound + 2)")
    p.add_argument("--time-limit", type=float, default=60.0, help="seconds (default 60)")
    p.add_argument("--node-limit", type=int, default=10**8, help="expanded states (default 1e8)")
    p.add_argument("--threads", type=int, default=1, help="parallel sibling search (default 1)")
    p.add_argument("--debug", action="store_true",
                   help="disable symmetry reduction (slow; for cross-checking)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="counterfeit",
                                     description="Multi-set counterfeit coin solver and bound auditor.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--no-timing", action="store_true", help="omit wall-clock times")
        return p

    p = common(sub.add_parser("solve", help="minimum number of weighings for an instance"))
    p.add_argument("instance", help="set sizes, e.g. 4,4,5 or 4^7")
    p.add_argument("--emit", metavar="FILE", help="write the optimal strategy as JSON")
    _add_budget(p)
    p.set_defaults(func=cmd_solve)

    p = common(sub.add_parser("verify", help="check a strategy file"))
    p.add_argument("strategy")
    p.add_argument("--instance", help="instance to check against (default: inferred)")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("bounds", help="bounds for n^k, or the information bound of an instance"))
    p.add_argument("subject", help="N, or an instance such as 4,4,5")
    p.add_argument("k", nargs="?", help="number of sets of size N")
    p.set_defaults(func=cmd_bounds)

    p = common(sub.add_parser("table", help="rate table with recomputed log3 values and ladder gaps"))
    p.set_defaults(func=cmd_table)

    p = common(sub.add_parser("audit", help="audit the claims database"))
    p.add_argument("--claims", metavar="FILE", help="claims file (default: bundled)")
    p.add_argument("--table", action="store_true", help="let the derivation use the rate table")
    p.set_defaults(func=cmd_audit)

    p = common(sub.add_parser("arrow", help="search for a reduction prefix"))
    p.add_argument("instance")
    p.add_argument("--profile", action="append", default=[],
                   help="allowed leaf: DEPTH:BOUND, DEPTH:two-rep:BOUND or DEPTH:singleton")
    p.add_argument("--close", action="store_true", help="finish 1-representable leaves and verify")
    p.add_argument("--emit", metavar="FILE", help="write the prefix (or closed strategy)")
    _add_budget(p)
    p.set_defaults(func=cmd_arrow)

    p = sub.add_parser("play", help="run a strategy interactively against a real balance")
    p.add_argument("strategy")
    p.set_defaults(func=cmd_play)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
