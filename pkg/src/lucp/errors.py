"""Exception hierarchy.

Every failure carries an optional ``witness`` so callers (and the report
writer) can show exactly which element, triple or pair broke an axiom.
"""


class LucpError(Exception):
    def __init__(self, message="", witness=None):
        super().__init__(message)
        self.witness = witness


class ShapeMismatch(LucpError, ValueError):
    pass


class FreeRankError(LucpError):
    """A quotient expected to be finite has a free part."""


class GroupAxiomError(LucpError):
    pass


# ring-core
class RingValidationError(LucpError):
    pass


class NonAssociative(RingValidationError):
    pass


class NotIdempotent(RingValidationError):
    pass


class NoLocalUnit(RingValidationError):
    pass


class NoCommonUnit(LucpError):
    pass


class NotMultiplicative(RingValidationError):
    pass


class UnitSetMismatch(RingValidationError):
    pass


# bimodule-core
class BimoduleError(LucpError):
    pass


class NotBimoduleMap(BimoduleError):
    pass


class NotSummandOfFreeR(BimoduleError):
    pass


class InvalidSplitData(BimoduleError):
    pass


class EnumerationCap(LucpError):
    pass


class Undecided(LucpError):
    """A bounded search ran out of budget. Never to be read as 'false'."""


class SearchExhausted(Undecided):
    pass


# picard
class NotInvertible(LucpError):
    pass


class NotAutomorphism(LucpError):
    pass


class ProductNotR(LucpError):
    pass


# cohomology
class NotAnAction(LucpError):
    pass


class CapExceeded(LucpError):
    pass


# crossed products
class FactorMapError(LucpError):
    pass


class AssocFail(FactorMapError):
    pass


class UnitFail(FactorMapError):
    pass


class NotIso(FactorMapError):
    pass


class NoSolution(LucpError):
    pass


class NotACocycle(LucpError):
    pass


class SimilarityWitnessMissing(LucpError):
    pass


# seven terms
class NotRRingAut(LucpError):
    pass


class NotInSubgroup(LucpError):
    pass


class NotZInvariant(NotInSubgroup):
    pass


class NotGInvariant(NotInSubgroup):
    pass


class LedgerIncomplete(LucpError):
    pass


class ValueNotInPic0(LucpError):
    pass


class NoRepresentative(LucpError):
    pass


# ingest
class ParseError(LucpError):
    pass


class ValidationError(LucpError):
    def __init__(self, location, message="", witness=None):
        super().__init__(f"{location}: {message}", witness)
        self.location = location


class SizeCap(LucpError):
    pass
