"""Exception hierarchy shared across the package.

Grouping mirrors the pipeline's failure classes: bad metric input, bad
parameters, candidate-pool exhaustion, and misuse of partially built maps.
"""
from __future__ import annotations


class AssouadError(Exception):
    """Base class for all package-specific failures."""


# -- metric / instance rejection ------------------------------------------

class MetricError(AssouadError):
    """The input does not describe a usable finite metric space."""


class InvalidMatrix(MetricError):
    """Matrix is not square, has a nonzero diagonal, or ids are malformed."""


class AsymmetricMatrix(MetricError):
    pass


class NegativeDistance(MetricError):
    pass


class ZeroOffDiagonal(MetricError):
    """Two distinct points at distance zero."""


class TriangleViolation(MetricError):
    """Triangle inequality fails; carries a witness triple (i, j, k)."""

    def __init__(self, triple, direct, via):
        self.triple = tuple(triple)
        self.direct = float(direct)
        self.via = float(via)
        i, j, k = self.triple
        super().__init__(
            f"d({i},{k}) = {self.direct} exceeds d({i},{j}) + d({j},{k}) = {self.via}"
        )


class TooFewPoints(MetricError):
    """Operation needs at least two points."""


class SizeOutOfRange(MetricError):
    """Generated instance size outside the supported range."""


# -- parameter rejection ----------------------------------------------------

class ParamError(AssouadError):
    """Embedding parameters fail one of the admissibility inequalities."""


class AlphaOutOfRange(ParamError):
    pass


class TauTooLarge(ParamError):
    """Scale parameter rejected; `inequality` names the first failed check."""

    def __init__(self, message, inequality=None):
        self.inequality = inequality
        super().__init__(message)


class DimensionTooSmall(ParamError):
    pass


class BadTau(ParamError):
    """Ladder construction needs 0 < tau < 1/2."""


class BadLambda(ParamError):
    """Covering bounds are only defined for radius factors >= 1."""


# -- candidate selection ----------------------------------------------------

class PackingError(AssouadError):
    pass


class Exhausted(PackingError):
    """Every supplied candidate sits inside some exclusion ball."""


class PackingExhausted(PackingError):
    """The whole candidate lattice is used up; decrease tau or increase m."""


# -- map assembly / evaluation ---------------------------------------------

class OrderViolation(AssouadError):
    """A vector needed by the scan order has not been assigned yet."""


class UnknownScale(AssouadError):
    """Scale index outside the ladder."""


class DimensionMismatch(AssouadError):
    """Map and space (or map and serialized form) do not belong together."""
