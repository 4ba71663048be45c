"""Exception hierarchy shared by the protocol engine and the CLI."""


class CakeError(Exception):
    """Base class for every error raised by localcake."""


class InsufficientValue(CakeError):
    """A cut asked for more value than the agent sees in the available cake."""


class OverlapError(CakeError):
    """Two pieces that must be disjoint intersect."""


class DenominatorBudgetExceeded(CakeError):
    """A cut point needs more denominator bits than the configured budget."""


class UnknownAgent(CakeError):
    pass


class InvalidGraph(CakeError):
    pass


class EmptyParticipants(CakeError):
    pass


class TooFewParticipants(CakeError):
    pass


class BenchmarkInfeasible(CakeError):
    """SubCore could not honour an agent's benchmark.

    Benchmarks passed to SubCore are admissible by construction, so this
    signals a logic error and aborts the run.
    """


class CapExceeded(CakeError):
    """A loop with an analytic iteration cap ran past the cap."""


class NotAdjacent(CakeError):
    pass


class NotParticipants(CakeError):
    pass


class PoolTooSmall(CakeError):
    pass


class NotDominant(CakeError):
    pass


class InvalidFamily(CakeError):
    pass


class ParseError(CakeError):
    pass


class AuditMismatch(CakeError):
    pass
