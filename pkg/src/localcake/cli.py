"""Command line: gen, run, verify, replay, bench.

Exit codes: 0 success, 2 audit failure, 3 cap exceeded or engine error,
4 parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AuditMismatch, CakeError, ParseError
from .fairness import audit
from .instances import FAMILIES, PROFILES, gen_instance
from .measure import QueryOracle
from .runner import PROTOCOLS, bench, check_replay, replay, run_to_dir
from .serialization import Instance, allocation_from_json, dumps, read_json

OK, AUDIT_FAILED, ENGINE_ERROR, PARSE_ERROR = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(PARSE_ERROR, f"{self.prog}: error: {message}\n")


def _emit(text: str, path=None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    inst = gen_instance(args.n, args.family, args.seed, args.profile)
    _emit(inst.dumps(), args.out)
    return OK


def cmd_run(args) -> int:
    inst = Instance.load(args.instance)
    res = run_to_dir(inst, args.out_dir, args.protocol, write_trace=args.trace,
                     max_denominator_bits=args.max_denominator_bits, cap_multiplier=args.cap_multiplier,
                     cutter=args.cutter)
    checks = ", ".join(f"{k}={v}" for k, v in res.report["checks"].items())
    print(f"{args.protocol}: n={inst.n} core_calls={res.report['core_calls']} "
          f"queries={res.report['queries']['total']} {checks}")
    return OK if res.ok else AUDIT_FAILED


_REQUIRE = {"proportional": "locally_proportional", "envy-free": "locally_envy_free", "complete": "complete"}


def cmd_verify(args) -> int:
    inst = Instance.load(args.instance)
    alloc = allocation_from_json(read_json(args.allocation))
    if alloc.n != inst.n:
        raise ParseError(f"allocation has {alloc.n} pieces for {inst.n} agents")
    report = audit(alloc, inst.graph, QueryOracle(inst.densities)).to_dict()
    _emit(dumps(report), args.out)
    need = args.require or ["proportional"]
    return OK if all(report[_REQUIRE[k]] for k in need) else AUDIT_FAILED


def cmd_replay(args) -> int:
    log = read_json(args.trace)
    if args.report:
        again = check_replay(log, read_json(args.report))
    else:
        again = replay(log)
    _emit(dumps(again), args.out)
    return OK if again["ok"] else AUDIT_FAILED


def cmd_bench(args) -> int:
    ns = range(args.n_min, args.n_max + 1)
    seeds = range(args.seed, args.seed + args.seeds)
    kw = {"max_denominator_bits": args.max_denominator_bits, "cap_multiplier": args.cap_multiplier}
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            failed = bench(fh, ns, args.family or FAMILIES, args.profile or PROFILES, seeds, args.protocol,
                           args.jobs, **kw)
    else:
        failed = bench(sys.stdout, ns, args.family or FAMILIES, args.profile or PROFILES, seeds, args.protocol,
                       args.jobs, **kw)
    return OK if failed == 0 else AUDIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="localcake", description="Locally fair cake cutting on social graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--family", choices=FAMILIES, default="path")
    g.add_argument("--profile", choices=PROFILES, default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="write here instead of stdout")
    g.set_defaults(func=cmd_gen)

    def engine_flags(q):
        q.add_argument("--protocol", choices=PROTOCOLS, default="main")
        q.add_argument("--max-denominator-bits", type=int, default=None,
                       help="abort when a cut point's denominator needs more bits")
        q.add_argument("--cap-multiplier", default="1", help="scale the dominance iteration cap (rational)")

    r = sub.add_parser("run", help="run a protocol and audit the result")
    r.add_argument("--instance", required=True)
    r.add_argument("--out-dir", default="out")
    r.add_argument("--trace", action="store_true", help="also write trace.json")
    r.add_argument("--cutter", type=int, default=0, help="cutter for core-once")
    engine_flags(r)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="re-audit an allocation against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--allocation", required=True, help="allocation.json or report.json")
    v.add_argument("--require", action="append", choices=sorted(_REQUIRE))
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    rp = sub.add_parser("replay", help="rebuild a run report from its trace")
    rp.add_argument("--trace", required=True)
    rp.add_argument("--report", help="compare against this report byte for byte")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_replay)

    b = sub.add_parser("bench", help="sweep n, families and profiles; write CSV")
    b.add_argument("--n-min", type=int, default=2)
    b.add_argument("--n-max", type=int, default=5)
    b.add_argument("--family", action="append", choices=FAMILIES)
    b.add_argument("--profile", action="append", choices=PROFILES)
    b.add_argument("--seed", type=int, default=0, help="first seed")
    b.add_argument("--seeds", type=int, default=1, help="number of seeds")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    engine_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else PARSE_ERROR
    try:
        return args.func(args)
    except (ParseError, AuditMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR if isinstance(exc, ParseError) else AUDIT_FAILED
    except (CakeError, AssertionError) as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return ENGINE_ERROR


if __name__ == "__main__":
    sys.exit(main())
