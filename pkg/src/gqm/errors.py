"""Exception hierarchy shared by every module."""


class GqmError(Exception):
    """Base class; `exit_code` is what the CLI returns when it escapes."""

    exit_code = 1


class ParseError(GqmError):
    exit_code = 2


class InvalidGenerator(ParseError):
    pass


class GroupMismatch(GqmError):
    pass


class InvalidGroup(GqmError):
    exit_code = 2


class ResourceLimit(GqmError):
    exit_code = 3


class PreconditionViolated(GqmError):
    pass


class Infeasible(GqmError):
    pass


class MissingValue(GqmError):
    pass


class MalformedComplex(GqmError):
    pass


class BoundaryMismatch(GqmError):
    pass


class NonIntegral(GqmError):
    pass


class ProductMismatch(GqmError):
    pass


class NonNormalArgument(GqmError):
    pass


class CentralityViolated(GqmError):
    pass


class EmptyPattern(GqmError):
    pass


class MissingDefectBound(GqmError):
    pass


class NonNormalSample(GqmError):
    pass


class NotClosed(GqmError):
    pass


class NotTransversal(GqmError):
    pass


class InfiniteCosetSpace(GqmError):
    pass


class NonpositiveDefect(GqmError):
    pass


class FalsifiedCertificate(GqmError):
    """A certificate failed re-verification (e.g. lower bound above upper bound)."""

    exit_code = 4
