"""scikit-learn style wrapper around the protocol runner.

Gives the engine ``get_params``/``set_params``/``clone`` for sweeps; the
"data" passed to ``fit`` is an :class:`~localcake.serialization.Instance`.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator

from .runner import execute


class CakeDivider(BaseEstimator):
    """Divide the cake of one instance with the chosen protocol.

    After ``fit``: ``allocation_``, ``report_``, ``trace_`` and
    ``queries_`` (the ledger summary).
    """

    def __init__(self, protocol="main", max_denominator_bits=None, cap_multiplier=1, cutter=0):
        self.protocol = protocol
        self.max_denominator_bits = max_denominator_bits
        self.cap_multiplier = cap_multiplier
        self.cutter = cutter

    def fit(self, instance, y=None):
        res = execute(instance, self.protocol, self.max_denominator_bits, self.cap_multiplier, self.cutter)
        self.allocation_ = res.allocation
        self.report_ = res.report
        self.trace_ = res.trace
        self.queries_ = res.report["queries"]
        return self

    def fit_predict(self, instance, y=None):
        return self.fit(instance).allocation_

    def score(self, instance, y=None) -> float:
        """Smallest proportionality slack across agents, as a float."""
        from fractions import Fraction
        self.fit(instance)
        return float(min(Fraction(s) for s in self.report_["fairness"]["proportionality_slack"]))
