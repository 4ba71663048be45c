"""Run a protocol on an instance, audit it, and rebuild runs from traces.

A run report is a pure function of (instance, protocol, flags); wall-clock
timings live in a separate file. ``replay`` rebuilds the allocation and
the ledger totals from the trace alone, so a replayed report that matches
the original byte for byte confirms both the engine and the log.
"""
from __future__ import annotations

import csv
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import Snapshot, core
from .errors import AuditMismatch, InvalidGraph, ParseError
from .fairness import Allocation, audit, bonus, snapshot_contract
from .instances import FAMILIES, PROFILES, gen_instance
from .local_prop import (AllocationState, InsignificantTally, diffuse_budget, dominance_cap, loose_target,
                         main_protocol)
from .measure import Piece, QueryLedger, QueryOracle, rat_str, union_all
from .serialization import Instance, allocation_to_json, dumps, parse_rat, piece_from_json, write_json
from .tracing import Trace
from .tree_envy import tree_core

PROTOCOLS = ("main", "treecore", "core-once")


@dataclass
class RunResult:
    report: dict
    trace: dict
    allocation: Allocation
    timings: dict

    @property
    def ok(self) -> bool:
        return self.report["ok"]


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(inst.dumps().encode()).hexdigest()


def _flags(max_denominator_bits, cap_multiplier, cutter) -> dict:
    return {"max_denominator_bits": max_denominator_bits,
            "cap_multiplier": rat_str(Fraction(cap_multiplier)),
            "cutter": cutter}


def execute(inst: Instance, protocol: str = "main", max_denominator_bits=None, cap_multiplier=1,
            cutter=0) -> RunResult:
    if protocol not in PROTOCOLS:
        raise ParseError(f"unknown protocol {protocol!r}")
    cap_multiplier = parse_rat(cap_multiplier)
    if cap_multiplier <= 0:
        raise ParseError("cap multiplier must be positive")
    oracle = QueryOracle(inst.densities, max_denominator_bits)
    trace = Trace()
    if protocol == "main":
        alloc = main_protocol(inst.graph, oracle, trace, cap_multiplier)
    elif protocol == "treecore":
        try:
            tree = inst.tree()
        except InvalidGraph as exc:
            raise ParseError(f"treecore needs a rooted tree: {exc}") from exc
        with trace.phase("tree_core", oracle, root=tree.root):
            alloc, _ = tree_core(tree, oracle, trace)
    else:
        if not 0 <= cutter < inst.n:
            raise InvalidGraph(f"cutter {cutter} is not an agent")
        with trace.phase("core", oracle, cutter=cutter):
            snap = core(cutter, inst.graph.agents, Piece.whole(), oracle)
            trace.record_snapshot(snap, 0, "core")
        alloc = Allocation([snap.piece(a) for a in inst.graph.agents], snap.residue_after)
    flags = _flags(max_denominator_bits, cap_multiplier, cutter if protocol == "core-once" else None)
    log = {"protocol": protocol, "instance": inst.to_dict(), "flags": flags, "events": trace.events}
    report = build_report(inst, protocol, flags, alloc, oracle.ledger, trace.events, oracle)
    return RunResult(report, log, alloc, dict(trace.timings))


def run_to_dir(inst: Instance, out_dir, protocol="main", write_trace=False, **kw) -> RunResult:
    res = execute(inst, protocol, **kw)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", res.report)
    write_json(out / "allocation.json", allocation_to_json(res.allocation))
    write_json(out / "timings.json", {k: round(v, 6) for k, v in res.timings.items()})
    if write_trace:
        write_json(out / "trace.json", res.trace)
    return res


def phase_ledgers(events) -> dict:
    return {e["phase"]: e["ledger"] for e in events if e["type"] == "phase_end"}


def build_report(inst: Instance, protocol: str, flags: dict, alloc: Allocation, ledger: QueryLedger,
                 events, oracle) -> dict:
    graph = inst.graph
    n = inst.n
    fair = audit(alloc, graph, oracle)
    report = {
        "protocol": protocol,
        "instance": {"n": n, "seed": inst.seed, "metadata": inst.metadata, "sha256": instance_digest(inst)},
        "flags": flags,
        "allocation": allocation_to_json(alloc),
        "fairness": fair.to_dict(),
        "queries": ledger.to_dict(),
        "phases": phase_ledgers(events),
        "core_calls": sum(1 for e in events if e["type"] == "core"),
    }
    if protocol == "main":
        report["bounds"] = main_bounds(graph, events, flags)
        report["checks"] = {"locally_proportional": fair.locally_proportional, "complete": fair.complete}
    elif protocol == "treecore":
        tree = inst.tree()
        share = oracle.audit.value(tree.root, alloc.pieces[tree.root])
        report["bounds"] = {"touch_bound": 2 * n * n, "raw_total": ledger.total, "touch_total": ledger.touch_total}
        report["checks"] = {
            "locally_envy_free": fair.locally_envy_free,
            "no_descendant_envy": no_descendant_envy(alloc, tree, oracle),
            "root_share": rat_str(share),
            "root_share_exact": share == Fraction(1, n),
            "touches_within_bound": ledger.touch_total <= 2 * n * n,
        }
    else:
        (ev,) = [e for e in events if e["type"] == "core"]
        report["checks"] = snapshot_contract(snapshot_from_event(ev), oracle)
    report["ok"] = all(v for v in report["checks"].values() if isinstance(v, bool))
    return report


def main_bounds(graph, events, flags) -> dict:
    n = graph.n
    out = {"reference_14_pow_n": 14 ** n}
    if n < 2:
        return out
    r = graph.center_vertex()
    tally = InsignificantTally(graph, r)
    doms = [e for e in events if e["type"] == "dominance"]
    out.update({
        "center": r,
        "path_targets": {str(u): t for u, t in sorted(tally.targets.items())},
        "loose_targets": {str(u): rat_str(loose_target(n, len(p) - 1)) for u, p in sorted(tally.paths.items())},
        "dominance_cap": dominance_cap(n, parse_rat(flags["cap_multiplier"])),
        "spread_repetitions": [{"agent": e["agent"], "m": e["m"], "repetitions": e["repetitions"],
                                "core_calls": e["core_calls"]} for e in doms if e["how"] == "diffuse"],
        "diffuse_budget": diffuse_budget(n),
        "create_dominance": [{"how": e["how"], "over": e["over"]} for e in doms if e["how"] != "diffuse"][0],
    })
    return out


def no_descendant_envy(alloc: Allocation, tree, oracle) -> bool:
    return all(bonus(alloc, v, u, oracle) >= 0 for v in range(tree.n) for u in tree.descendants(v))


def snapshot_from_event(ev) -> Snapshot:
    assignment = {a["agent"]: (piece_from_json(a["piece"]), a["source"]) for a in ev["assignment"]}
    ins = ev.get("insignificant")
    return Snapshot(ev["cutter"], tuple(ev["participants"]), tuple(piece_from_json(p) for p in ev["sources"]),
                    assignment, piece_from_json(ev["residue_before"]), piece_from_json(ev["residue_after"]),
                    None if ins is None else tuple(ins))


def replay_states(events, n: int):
    """Yield ``(event, state)`` after applying each main-protocol event."""
    state = AllocationState.fresh(n)
    for ev in events:
        if ev["type"] == "core":
            state.add(snapshot_from_event(ev))
        elif ev["type"] == "exchange":
            snap = state.snapshots[ev["snapshot"]]
            a, b = ev["a"], ev["b"]
            snap.assignment[a], snap.assignment[b] = snap.assignment[b], snap.assignment[a]
        elif ev["type"] == "assign_whole":
            state.base = Allocation([Piece.whole()], Piece.empty())
            state.residue = Piece.empty()
        yield ev, state


def rebuild_allocation(protocol: str, events, n: int) -> Allocation:
    if protocol == "treecore":
        kept = [Piece.empty()] * n
        shavings = []
        for ev in events:
            if ev["type"] == "keep":
                kept[ev["agent"]] = piece_from_json(ev["piece"])
            elif ev["type"] == "equalize":
                shavings.append(piece_from_json(ev["shavings"]))
        return Allocation(kept, union_all(shavings))
    state = None
    for _, state in replay_states(events, n):
        pass
    if state is None:
        return AllocationState.fresh(n).derived()
    return state.derived()


def replay(log: dict) -> dict:
    """Rebuild the run report from a trace without re-running the protocol."""
    try:
        inst = Instance.from_dict(log["instance"])
        protocol = log["protocol"]
        flags = log["flags"]
        events = log["events"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad trace: {exc}") from exc
    ledger = QueryLedger.zeros(inst.n)
    for d in phase_ledgers(events).values():
        ledger = ledger.plus(QueryLedger.from_dict(d))
    alloc = rebuild_allocation(protocol, events, inst.n)
    oracle = QueryOracle(inst.densities)
    return build_report(inst, protocol, flags, alloc, ledger, events, oracle)


def check_replay(log: dict, report: dict) -> dict:
    again = replay(log)
    if dumps(again) != dumps(report):
        diff = sorted(k for k in set(again) | set(report) if again.get(k) != report.get(k))
        raise AuditMismatch(f"replayed report differs in {', '.join(diff)}")
    return again


BENCH_COLUMNS = ("protocol", "family", "profile", "n", "seed", "core_calls", "total_eval", "total_cut",
                 "total", "touch_total", "bound", "ok")


def bench_row(args) -> dict | None:
    protocol, family, profile, n, seed, kw = args
    inst = gen_instance(n, family, seed, profile)
    if protocol == "treecore" and not inst.graph.is_tree():
        return None
    res = execute(inst, protocol, **kw)
    q = res.report["queries"]
    bound = {"main": 14 ** n, "treecore": 2 * n * n}.get(protocol, "")
    return {"protocol": protocol, "family": family, "profile": profile, "n": n, "seed": seed,
            "core_calls": res.report["core_calls"], "total_eval": q["total_eval"], "total_cut": q["total_cut"],
            "total": q["total"], "touch_total": q["touch_total"], "bound": bound, "ok": res.ok}


def bench(out, ns, families=FAMILIES, profiles=PROFILES, seeds=(0,), protocol="main", jobs=1, **kw) -> int:
    """Sweep instances and write one CSV row per run. Returns the number of
    failed runs."""
    jobs_list = [(protocol, f, p, n, s, kw) for n in ns for f in families for p in profiles for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(bench_row, jobs_list))
    else:
        rows = [bench_row(j) for j in jobs_list]
    writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    failed = 0
    for row in rows:
        if row is not None:
            writer.writerow(row)
            failed += not row["ok"]
    return failed
