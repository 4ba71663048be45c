"""Exact cake arithmetic.

The cake is ``[0, 1)``. A :class:`Piece` is a finite union of disjoint
half-open intervals with rational endpoints, kept in canonical (sorted,
merged) form. Valuations are piecewise-constant densities and are only
reachable through a :class:`QueryOracle`, which counts Robertson-Webb
queries per agent.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DenominatorBudgetExceeded, InsufficientValue, OverlapError

Rat = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def as_rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: a float silently carries binary rounding
    into every fairness predicate.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def rat_str(x: Fraction) -> str:
    x = as_rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _canonical(intervals: Iterable[Sequence]) -> tuple:
    ivs = []
    for lo, hi in intervals:
        lo, hi = as_rat(lo), as_rat(hi)
        if not (ZERO <= lo <= hi <= ONE):
            raise ValueError(f"interval [{lo}, {hi}) is not inside [0, 1]")
        if lo < hi:
            ivs.append((lo, hi))
    ivs.sort()
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return tuple(merged)


class Piece:
    """Canonical finite union of disjoint half-open subintervals of [0, 1).

    Pieces are immutable and hashable. The linear order of a piece is the
    concatenation of its intervals from left to right; prefixes, suffixes and
    trims are all taken in that order.
    """

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Sequence] = ()):
        object.__setattr__(self, "intervals", _canonical(intervals))

    def __setattr__(self, name, value):
        raise AttributeError("Piece is immutable")

    @classmethod
    def _trusted(cls, intervals: tuple) -> "Piece":
        p = object.__new__(cls)
        object.__setattr__(p, "intervals", intervals)
        return p

    @classmethod
    def interval(cls, lo, hi) -> "Piece":
        return cls([(lo, hi)])

    @classmethod
    def whole(cls) -> "Piece":
        return cls._trusted(((ZERO, ONE),))

    @classmethod
    def empty(cls) -> "Piece":
        return cls._trusted(())

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __bool__(self):
        return bool(self.intervals)

    def __eq__(self, other):
        return isinstance(other, Piece) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        if not self.intervals:
            return "Piece(∅)"
        body = " ∪ ".join(f"[{rat_str(lo)}, {rat_str(hi)})" for lo, hi in self.intervals)
        return f"Piece({body})"

    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def length(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), ZERO)

    @property
    def start(self) -> Fraction:
        return self.intervals[0][0] if self.intervals else ZERO

    @property
    def end(self) -> Fraction:
        return self.intervals[-1][1] if self.intervals else ZERO

    def is_disjoint(self, other: "Piece") -> bool:
        a, b = self.intervals, other.intervals
        i = j = 0
        while i < len(a) and j < len(b):
            if a[i][0] < b[j][1] and b[j][0] < a[i][1]:
                return False
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return True

    def union(self, other: "Piece") -> "Piece":
        if not self.is_disjoint(other):
            raise OverlapError(f"{self!r} and {other!r} overlap")
        return Piece(self.intervals + other.intervals)

    def subtract(self, other: "Piece") -> "Piece":
        out = []
        b = other.intervals
        j = 0
        for lo, hi in self.intervals:
            cur = lo
            while j < len(b) and b[j][1] <= cur:
                j += 1
            k = j
            while k < len(b) and b[k][0] < hi:
                if b[k][0] > cur:
                    out.append((cur, b[k][0]))
                cur = max(cur, b[k][1])
                if cur >= hi:
                    break
                k += 1
            if cur < hi:
                out.append((cur, hi))
        return Piece._trusted(tuple(out))

    def intersect(self, other: "Piece") -> "Piece":
        return self.subtract(self.subtract(other))

    def contains(self, other: "Piece") -> bool:
        return other.subtract(self).is_empty()

    def clip(self, x) -> "Piece":
        """The part of the piece at or to the right of ``x``."""
        if x is None:
            return self
        out = []
        for lo, hi in self.intervals:
            if hi <= x:
                continue
            out.append((max(lo, x), hi))
        return Piece._trusted(tuple(out))


def piece_union(a: Piece, b: Piece) -> Piece:
    return a.union(b)


def piece_subtract(a: Piece, b: Piece) -> Piece:
    return a.subtract(b)


def pieces_disjoint(a: Piece, b: Piece) -> bool:
    return a.is_disjoint(b)


def piece_length(a: Piece) -> Fraction:
    return a.length


def union_all(pieces: Iterable[Piece]) -> Piece:
    """Union of pairwise-disjoint pieces; raises OverlapError otherwise."""
    ivs = []
    for p in pieces:
        ivs.extend(p.intervals)
    ivs.sort()
    for (lo1, hi1), (lo2, _) in zip(ivs, ivs[1:]):
        if lo2 < hi1:
            raise OverlapError(f"intervals [{lo1}, {hi1}) and [{lo2}, ...) overlap")
    return Piece(ivs)


class ValuationDensity:
    """Piecewise-constant, normalised density on [0, 1].

    ``weights[i]`` is the density on ``[breakpoints[i], breakpoints[i+1])``.
    """

    __slots__ = ("breakpoints", "weights", "_cum")

    def __init__(self, breakpoints: Sequence, weights: Sequence):
        bps = tuple(as_rat(b) for b in breakpoints)
        ws = tuple(as_rat(w) for w in weights)
        if len(bps) < 2 or bps[0] != ZERO or bps[-1] != ONE:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(ws) != len(bps) - 1:
            raise ValueError("need exactly one weight per cell")
        if any(w < 0 for w in ws):
            raise ValueError("density weights must be nonnegative")
        cum = [ZERO]
        for w, b1, b2 in zip(ws, bps, bps[1:]):
            cum.append(cum[-1] + w * (b2 - b1))
        if cum[-1] != ONE:
            raise ValueError(f"density integrates to {cum[-1]}, not 1")
        self.breakpoints = bps
        self.weights = ws
        self._cum = tuple(cum)

    @classmethod
    def uniform(cls) -> "ValuationDensity":
        return cls((ZERO, ONE), (ONE,))

    def __eq__(self, other):
        return (isinstance(other, ValuationDensity)
                and self.breakpoints == other.breakpoints
                and self.weights == other.weights)

    def __repr__(self):
        cells = ", ".join(f"{rat_str(w)}@[{rat_str(a)},{rat_str(b)})"
                          for w, a, b in zip(self.weights, self.breakpoints, self.breakpoints[1:]))
        return f"ValuationDensity({cells})"

    def cdf(self, x: Fraction) -> Fraction:
        if x <= ZERO:
            return ZERO
        if x >= ONE:
            return ONE
        i = bisect_right(self.breakpoints, x) - 1
        return self._cum[i] + self.weights[i] * (x - self.breakpoints[i])

    def integrate(self, lo: Fraction, hi: Fraction) -> Fraction:
        return self.cdf(hi) - self.cdf(lo)

    def value(self, piece: Piece) -> Fraction:
        return sum((self.cdf(hi) - self.cdf(lo) for lo, hi in piece.intervals), ZERO)

    def cut(self, x: Fraction, alpha: Fraction) -> Fraction:
        """Minimal ``y >= x`` with ``integrate(x, y) == alpha``."""
        if not (ZERO <= x <= ONE):
            raise ValueError(f"cut start {x} outside [0, 1]")
        if alpha < 0:
            raise ValueError("cut value must be nonnegative")
        if alpha == 0:
            return x
        target = self.cdf(x) + alpha
        if target > ONE:
            raise InsufficientValue(f"only {ONE - self.cdf(x)} available right of {x}, asked {alpha}")
        i = bisect_left(self._cum, target)
        # cum[i-1] < target <= cum[i], so cell i-1 has positive weight.
        return self.breakpoints[i - 1] + (target - self._cum[i - 1]) / self.weights[i - 1]

    def cut_back(self, y: Fraction, alpha: Fraction) -> Fraction:
        """Maximal ``x <= y`` with ``integrate(x, y) == alpha``."""
        if not (ZERO <= y <= ONE):
            raise ValueError(f"cut end {y} outside [0, 1]")
        if alpha < 0:
            raise ValueError("cut value must be nonnegative")
        if alpha == 0:
            return y
        target = self.cdf(y) - alpha
        if target < 0:
            raise InsufficientValue(f"only {self.cdf(y)} available left of {y}, asked {alpha}")
        i = bisect_right(self._cum, target)
        # cum[i-1] <= target < cum[i], so cell i-1 has positive weight.
        return self.breakpoints[i - 1] + (target - self._cum[i - 1]) / self.weights[i - 1]


@dataclass
class QueryLedger:
    """Per-agent query counters.

    ``evals`` and ``cuts`` are raw Robertson-Webb counts (one evaluation per
    interval touched). ``touches`` counts protocol-level operations on whole
    pieces: one per piece evaluation, cut, or prefix cut.
    """

    evals: list = field(default_factory=list)
    cuts: list = field(default_factory=list)
    touches: list = field(default_factory=list)

    @classmethod
    def zeros(cls, n: int) -> "QueryLedger":
        return cls([0] * n, [0] * n, [0] * n)

    def copy(self) -> "QueryLedger":
        return QueryLedger(list(self.evals), list(self.cuts), list(self.touches))

    def minus(self, earlier: "QueryLedger") -> "QueryLedger":
        return QueryLedger(
            [a - b for a, b in zip(self.evals, earlier.evals)],
            [a - b for a, b in zip(self.cuts, earlier.cuts)],
            [a - b for a, b in zip(self.touches, earlier.touches)],
        )

    def plus(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(
            [a + b for a, b in zip(self.evals, other.evals)],
            [a + b for a, b in zip(self.cuts, other.cuts)],
            [a + b for a, b in zip(self.touches, other.touches)],
        )

    @property
    def total(self) -> int:
        return sum(self.evals) + sum(self.cuts)

    @property
    def touch_total(self) -> int:
        return sum(self.touches)

    def to_dict(self) -> dict:
        return {
            "eval": list(self.evals),
            "cut": list(self.cuts),
            "touch": list(self.touches),
            "total_eval": sum(self.evals),
            "total_cut": sum(self.cuts),
            "total": self.total,
            "touch_total": self.touch_total,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QueryLedger":
        return cls(list(d["eval"]), list(d["cut"]), list(d["touch"]))


class AuditChannel:
    """Uncounted read access to valuations, reserved for verification."""

    def __init__(self, densities):
        self._densities = densities

    def value(self, agent: int, piece: Piece) -> Fraction:
        return self._densities[agent].value(piece)


class QueryOracle:
    """The only protocol-side path to agents' valuations.

    Every call on this object is charged to the agent's ledger. Verifiers use
    :attr:`audit` instead, which never touches the ledger.
    """

    def __init__(self, densities: Sequence[ValuationDensity], max_denominator_bits: int | None = None):
        self._densities = tuple(densities)
        self.ledger = QueryLedger.zeros(len(self._densities))
        self.audit = AuditChannel(self._densities)
        self.max_denominator_bits = max_denominator_bits

    @property
    def n(self) -> int:
        return len(self._densities)

    def _check_bits(self, y: Fraction) -> None:
        if self.max_denominator_bits is not None and y.denominator.bit_length() > self.max_denominator_bits:
            raise DenominatorBudgetExceeded(
                f"cut point denominator has {y.denominator.bit_length()} bits "
                f"(budget {self.max_denominator_bits})")

    def _raw_eval(self, agent, lo, hi) -> Fraction:
        self.ledger.evals[agent] += 1
        return self._densities[agent].integrate(lo, hi)

    def _raw_cut(self, agent, x, alpha) -> Fraction:
        self.ledger.cuts[agent] += 1
        y = self._densities[agent].cut(as_rat(x), as_rat(alpha))
        self._check_bits(y)
        return y

    def eval_query(self, agent: int, piece: Piece) -> Fraction:
        """Value of ``piece`` to ``agent``; costs one evaluation per interval."""
        self.ledger.touches[agent] += 1
        return sum((self._raw_eval(agent, lo, hi) for lo, hi in piece.intervals), ZERO)

    value = eval_query

    def cut_query(self, agent: int, x, alpha) -> Fraction:
        """Leftmost ``y >= x`` with ``f_agent([x, y]) == alpha``."""
        self.ledger.touches[agent] += 1
        return self._raw_cut(agent, x, alpha)

    def cut_back_query(self, agent: int, y, alpha) -> Fraction:
        """Rightmost ``x <= y`` with ``f_agent([x, y]) == alpha``."""
        self.ledger.touches[agent] += 1
        return self._raw_cut_back(agent, y, alpha)

    def _raw_cut_back(self, agent, y, alpha) -> Fraction:
        self.ledger.cuts[agent] += 1
        x = self._densities[agent].cut_back(as_rat(y), as_rat(alpha))
        self._check_bits(x)
        return x

    def cut_suffix(self, agent: int, piece: Piece, beta) -> tuple[Piece, Piece]:
        """Split ``piece`` into a prefix and a minimal suffix worth ``beta``.

        Mirror image of :meth:`cut_prefix`: intervals are scanned right to
        left, the first interval is never evaluated.
        """
        beta = as_rat(beta)
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        self.ledger.touches[agent] += 1
        if beta == 0:
            return piece, Piece.empty()
        ivs = piece.intervals
        remaining = beta
        for i in range(len(ivs) - 1, -1, -1):
            lo, hi = ivs[i]
            if i > 0:
                v = self._raw_eval(agent, lo, hi)
                if v < remaining:
                    remaining -= v
                    continue
            try:
                x = self._raw_cut_back(agent, hi, remaining)
            except InsufficientValue:
                x = None
            if x is None or x < lo:
                raise InsufficientValue(f"agent {agent} values {piece!r} below {beta}")
            prefix = Piece._trusted(ivs[:i] + (((lo, x),) if x > lo else ()))
            suffix = Piece._trusted((((x, hi),) if x < hi else ()) + ivs[i + 1:])
            return prefix, suffix
        raise InsufficientValue(f"agent {agent} values {piece!r} below {beta}")

    def cut_prefix(self, agent: int, piece: Piece, alpha) -> tuple[Piece, Piece]:
        """Split ``piece`` into a minimal prefix worth ``alpha`` and the rest.

        Intervals are scanned left to right with one evaluation each; the
        interval where the prefix ends gets one cut query. The last interval
        is never evaluated, its cut query alone decides.
        """
        alpha = as_rat(alpha)
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.ledger.touches[agent] += 1
        if alpha == 0:
            return Piece.empty(), piece
        ivs = piece.intervals
        remaining = alpha
        for i, (lo, hi) in enumerate(ivs):
            if i < len(ivs) - 1:
                v = self._raw_eval(agent, lo, hi)
                if v < remaining:
                    remaining -= v
                    continue
            try:
                y = self._raw_cut(agent, lo, remaining)
            except InsufficientValue:
                y = None
            if y is None or y > hi:
                raise InsufficientValue(f"agent {agent} values {piece!r} below {alpha}")
            prefix = Piece._trusted(ivs[:i] + (((lo, y),) if y > lo else ()))
            suffix = Piece._trusted((((y, hi),) if y < hi else ()) + ivs[i + 1:])
            return prefix, suffix
        raise InsufficientValue(f"agent {agent} values {piece!r} below {alpha}")
