"""Exception hierarchy shared by services and routers.

None of these derive from ValueError so that raising them inside a pydantic
validator surfaces the exception itself instead of a ValidationError.
"""


class LcltError(Exception):
    """Base class for every domain failure"""


class ParseError(LcltError):
    """Measure file or vector text is malformed"""


class InvariantError(LcltError):
    """A measure violates mass, sign, steplength or dimension invariants"""


class DimensionMismatch(LcltError):
    pass


class SingularCovariance(LcltError):
    """Covariance inverse requested for a non-maximal measure"""


class DegenerateHull(LcltError):
    """Support hull has no interior"""


class PreconditionError(LcltError):
    pass


class ResourceLimit(LcltError):
    """Support or transform grid exceeds the configured cap"""


class NumericalFailure(LcltError):
    pass


class NotInterior(LcltError):
    """Tilt target lies outside the interior of the support hull"""


class NoConvergence(LcltError):
    pass


class PartitionOverflow(LcltError):
    pass


class TailBoundViolation(LcltError):
    """A deep-tail cell exceeds exp[-x^2/(2 d l^2 n)]"""


class ConfigError(LcltError):
    pass
