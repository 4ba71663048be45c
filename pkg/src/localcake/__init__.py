"""Exact local fairness protocols for cake cutting on social graphs."""
from .core import Snapshot, core, find_insignificant, subcore
from .errors import CakeError
from .fairness import Allocation, FairnessReport, audit
from .graph import RootedTree, SocialGraph
from .instances import gen_instance
from .local_prop import (AllocationState, create_dominance, diffuse_dominance, exchange_in_snapshot,
                         main_protocol, select_bonus_snapshots)
from .measure import Piece, QueryLedger, QueryOracle, ValuationDensity
from .runner import execute, replay
from .serialization import Instance
from .tree_envy import equalize_pieces, tree_core

__all__ = [
    "Allocation", "AllocationState", "CakeError", "FairnessReport", "Instance", "Piece", "QueryLedger",
    "QueryOracle", "RootedTree", "Snapshot", "SocialGraph", "ValuationDensity", "audit", "core",
    "create_dominance", "diffuse_dominance", "equalize_pieces", "exchange_in_snapshot", "execute",
    "find_insignificant", "gen_instance", "main_protocol", "replay", "select_bonus_snapshots", "subcore",
    "tree_core",
]
