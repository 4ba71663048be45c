"""Ordered JSON event log of a protocol run."""
from __future__ import annotations

import time
from contextlib import contextmanager

from .serialization import piece_to_json


class Trace:
    def __init__(self):
        self.events = []
        # wall-clock seconds per phase; kept out of the events so the log
        # itself stays deterministic
        self.timings = {}

    def emit(self, kind: str, **fields) -> dict:
        ev = {"type": kind, **fields}
        self.events.append(ev)
        return ev

    @contextmanager
    def phase(self, name: str, oracle, **fields):
        """Bracket a protocol phase; the end event carries the ledger delta."""
        before = oracle.ledger.copy()
        start = self.core_calls()
        self.emit("phase_start", phase=name, **fields)
        t0 = time.perf_counter()
        yield
        self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0
        self.emit("phase_end", phase=name, ledger=oracle.ledger.minus(before).to_dict(),
                  core_calls=self.core_calls() - start)

    def core_calls(self, phase=None) -> int:
        return sum(1 for e in self.events if e["type"] == "core" and (phase is None or e["phase"] == phase))

    def record_snapshot(self, snap, index: int, phase: str) -> dict:
        ev = {
            "index": index,
            "phase": phase,
            "cutter": snap.cutter,
            "participants": list(snap.participants),
            "sources": [piece_to_json(p) for p in snap.sources],
            "assignment": [{"agent": a, "piece": piece_to_json(p), "source": i}
                           for a, (p, i) in sorted(snap.assignment.items())],
            "residue_before": piece_to_json(snap.residue_before),
            "residue_after": piece_to_json(snap.residue_after),
        }
        if snap.insignificant is not None:
            ev["insignificant"] = list(snap.insignificant)
        return self.emit("core", **ev)
