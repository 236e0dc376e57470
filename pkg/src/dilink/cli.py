"""``dilink`` command line.

Answers go to stdout, diagnostics to stderr.  Exit status: 0 when the
instance was decided (any answer), 1 on usage or parse errors, 2 when an
internal invariant broke.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath
from typing import Optional

from . import gadgets, oracle
from .digraph import (INF, GraphError, InstanceParseError, LinkageQuery, NotAcyclicError,
                      parse_certificate, parse_instance, serialize_certificate,
                      serialize_instance, topological_order)
from .solver import InternalInvariantError, solve_detailed, verify_paths

log = logging.getLogger("dilink")

THREADS_ENV = "DILINK_THREADS"


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: list
    answer: str = "ERROR"
    certificate: Optional[str] = None
    wall_time: float = 0.0
    candidates: dict = field(default_factory=dict)
    exit_code: int = 0
    details: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return FsPath(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str):
    return parse_instance(_read(path))


def _query(args, q: Optional[LinkageQuery], n: int) -> LinkageQuery:
    terms = [getattr(args, name, None) for name in ("s1", "t1", "s2", "t2")]
    if q is None:
        if None in terms:
            raise UsageError("instance has no 'q' line; pass --s1 --t1 --s2 --t2 (and slack)")
        q = LinkageQuery(*(t - 1 for t in terms), 0, 0)
    else:
        q = LinkageQuery(*((t - 1) if t is not None else old
                           for t, old in zip(terms, (q.s1, q.t1, q.s2, q.t2))), q.k1, q.k2)
    k1 = args.k1 if args.k1 is not None else q.k1
    k2 = args.k2 if args.k2 is not None else q.k2
    if getattr(args, "k", None) is not None:
        k1 = k2 = args.k
    q = q.with_slack(k1, k2)
    if not all(0 <= v < n for v in (q.s1, q.t1, q.s2, q.t2)):
        raise UsageError(f"terminal outside 1..{n}")
    if k1 < 0 or k2 < 0:
        raise UsageError("slack must be non-negative")
    return q


def _emit(args, report: RunReport, paths) -> None:
    if getattr(args, "emit_certificate", None) and report.answer in ("YES", "NO"):
        FsPath(args.emit_certificate).write_text(serialize_certificate(paths), encoding="utf-8")
        report.certificate = args.emit_certificate


def cmd_solve(args, report: RunReport) -> None:
    g, q = _load(args.instance)
    q = _query(args, q, g.n)
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    res = solve_detailed(g, q, threads=threads, limit_candidates=args.limit_candidates)
    report.answer = res.answer
    report.candidates = {"feasible_pairs_examined": res.stats.pairs_examined,
                         "inner_searches": res.stats.inner_searches}
    report.details = asdict(res.stats)
    sol = res.solution
    _emit(args, report, None if sol is None else (sol.p1, sol.p2))


def cmd_oracle(args, report: RunReport) -> None:
    g, q = _load(args.instance)
    q = _query(args, q, g.n)
    if args.mode == "sw2l":
        found = oracle.brute_force_sw2l(g, q, max_vertices=args.max_vertices)
    elif args.mode == "ssw2l":
        found = oracle.ssw2l_solve(g, q.s1, q.t1, q.s2, q.t2, q.k1)
    else:
        topological_order(g)
        caps = (g.distance(q.s1, q.t1) + q.k1, g.distance(q.s2, q.t2) + q.k2)
        if INF in caps:
            found = None
        else:
            inst = oracle.WeakLinkageInstance(g, ((q.s1, q.t1), (q.s2, q.t2)), caps)
            paths = oracle.acyclic_weak_k_linkage(inst)
            found = None if paths is None else tuple(paths)
    report.answer = "YES" if found is not None else "NO"
    report.details = {"mode": args.mode}
    _emit(args, report, found)


def cmd_acyclic(args, report: RunReport) -> None:
    g, q = _load(args.instance)
    if args.pair:
        pairs = tuple((s - 1, t - 1) for s, t in args.pair)
    elif q is not None:
        pairs = ((q.s1, q.t1), (q.s2, q.t2))
    else:
        raise UsageError("no terminal pairs: pass --pair S T or add a 'q' line")
    for s, t in pairs:
        if not (0 <= s < g.n and 0 <= t < g.n):
            raise UsageError("pair vertex out of range")
    paths = oracle.acyclic_weak_k_linkage(oracle.WeakLinkageInstance(g, pairs))
    report.answer = "YES" if paths is not None else "NO"
    if paths is not None and not args.json:
        print("s YES")
        for i, p in enumerate(paths, 1):
            print(f"p{i} " + " ".join(str(v + 1) for v in p.vertices))
        report.details["_printed"] = True
    if paths is not None:
        report.details["paths"] = [[v + 1 for v in p.vertices] for p in paths]


def cmd_reduce_cnf(args, report: RunReport) -> None:
    f = gadgets.parse_dimacs_cnf(_read(args.cnf))
    layout = gadgets.build_ssw2l_gadget(f, args.k, cheap_subdivision=args.cheap_subdivision)
    g = layout.graph
    comments = [f"SSW2L gadget for a {f.n}-variable {f.m}-clause 3-CNF, k={args.k};"
                " the q line's k2 is unused (second path unbounded)"]
    FsPath(args.out + ".graph").write_text(serialize_instance(g, layout.query, comments),
                                           encoding="utf-8")
    FsPath(args.out + ".roles").write_text(layout.roles_text(), encoding="utf-8")
    stats = {"variables": f.n, "clauses": f.m, "vertices": g.n, "arcs": g.m,
             "pre_subdivision_vertices": layout.pre_subdivision_n,
             "subdivision_count": layout.subdivision_count,
             "d_s1_t1": g.distance(layout.s1, layout.t1)}
    report.answer = "DONE"
    report.details = stats
    if not args.json:
        for key, val in stats.items():
            print(f"{key} {val}")


def cmd_transform(args, report: RunReport) -> None:
    g, q = _load(args.instance)
    if args.mode == "subdivide":
        out = gadgets.subdivide_for_w1(g)
    else:
        if args.target_n is None:
            raise UsageError("pad mode needs --target-n")
        try:
            out = gadgets.pad_vertices(g, args.target_n)
        except GraphError as exc:
            raise UsageError(str(exc)) from None
    FsPath(args.out).write_text(serialize_instance(out, q), encoding="utf-8")
    report.answer = "DONE"
    report.details = {"vertices": out.n, "arcs": out.m, "output": args.out}
    if not args.json:
        print(f"wrote {args.out} ({out.n} vertices, {out.m} arcs)")


def cmd_verify(args, report: RunReport) -> None:
    g, q = _load(args.instance)
    q = _query(args, q, g.n)
    walks = parse_certificate(_read(args.certificate), g.n)
    if walks is None:
        verdict_ok, reason = False, "no-certificate"
    else:
        cap1 = g.distance(q.s1, q.t1) + q.k1
        cap2 = INF if args.unbounded_second else g.distance(q.s2, q.t2) + q.k2
        v = verify_paths(g, walks[0], walks[1], q.s1, q.t1, q.s2, q.t2, cap1, cap2)
        verdict_ok, reason = v.ok, v.reason
    report.answer = "valid" if verdict_ok else "invalid"
    report.details = {"reason": reason}
    if not args.json:
        print("valid" if verdict_ok else f"invalid {reason}")


def cmd_gen(args, report: RunReport) -> None:
    if args.n < 2 or not 0 <= args.p < 1 or args.k1 < 0 or args.k2 < 0:
        raise UsageError("need n >= 2, 0 <= p < 1, k1, k2 >= 0")
    g, q = gadgets.gen_random_instance(args.seed, args.n, args.p, args.k1, args.k2)
    text = serialize_instance(g, q, [f"seed={args.seed} n={args.n} p={args.p}"])
    FsPath(args.out).write_text(text, encoding="utf-8")
    report.answer = "DONE"
    report.details = {"vertices": g.n, "arcs": g.m, "output": args.out}
    if not args.json:
        print(f"wrote {args.out}")


def _query_flags(p):
    for name in ("s1", "t1", "s2", "t2"):
        p.add_argument(f"--{name}", type=int, help="terminal (1-indexed), overrides the q line")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dilink", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="decide short weak 2-linkage")
    p.add_argument("instance")
    _query_flags(p)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--limit-candidates", type=int, default=None, metavar="N",
                   help="stop after N exception pairs and answer UNKNOWN")
    p.add_argument("--emit-certificate", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="run an exact reference solver")
    p.add_argument("instance")
    p.add_argument("--mode", choices=("sw2l", "ssw2l", "acyclic"), default="sw2l")
    p.add_argument("--k", type=int, help="slack for both sides (ssw2l uses the first)")
    _query_flags(p)
    p.add_argument("--max-vertices", type=int, default=oracle.ORACLE_MAX_VERTICES)
    p.add_argument("--emit-certificate", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("acyclic-linkage", help="weak k-linkage on an acyclic digraph")
    p.add_argument("instance")
    p.add_argument("--pair", type=int, nargs=2, action="append", metavar=("S", "T"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_acyclic)

    p = sub.add_parser("reduce-cnf", help="compile a 3-CNF into an SSW2L gadget")
    p.add_argument("cnf")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PREFIX")
    p.add_argument("--cheap-subdivision", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reduce_cnf)

    p = sub.add_parser("transform", help="subdivide a DAG or pad with isolated vertices")
    p.add_argument("instance")
    p.add_argument("--mode", choices=("subdivide", "pad"), required=True)
    p.add_argument("--target-n", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="check a certificate against an instance")
    p.add_argument("instance")
    p.add_argument("certificate")
    _query_flags(p)
    p.add_argument("--unbounded-second", action="store_true",
                   help="do not cap the second path (semi-short instances)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--k1", type=int, default=0)
    p.add_argument("--k2", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    report = RunReport(command=argv)
    start = time.perf_counter()
    args = None
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            stream=sys.stderr)
        args.func(args, report)
        report.exit_code = 0
    except (UsageError, InstanceParseError, gadgets.CnfParseError, NotAcyclicError,
            oracle.OracleLimitError) as exc:
        print(f"dilink: error: {exc}", file=sys.stderr)
        report.answer, report.exit_code = "ERROR", 1
        report.details = {"error": str(exc)}
    except InternalInvariantError as exc:
        print(f"dilink: internal invariant violated: {exc}", file=sys.stderr)
        report.answer, report.exit_code = "ERROR", 2
        report.details = {"error": str(exc)}
    report.wall_time = round(time.perf_counter() - start, 6)
    printed = report.details.pop("_printed", False)
    if args is not None and getattr(args, "json", False):
        print(json.dumps(asdict(report), sort_keys=True))
    elif report.answer in ("YES", "NO", "UNKNOWN") and not printed:
        print(f"s {report.answer}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
