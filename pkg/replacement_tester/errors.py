# coding: UTF-8
"""Exceptions raised by the replacement tester.

Every error derives from :class:`ReplacementTesterError`, so callers can catch the whole family.
Errors caused by bad arguments also derive from :class:`ValueError`.
"""


class ReplacementTesterError(Exception):
    pass


class ArityMismatch(ReplacementTesterError, ValueError):
    pass


class AlphabetMismatch(ReplacementTesterError, ValueError):
    pass


class DomainViolation(ReplacementTesterError, ValueError):
    pass


class PreconditionError(ReplacementTesterError, ValueError):
    pass


class InvalidTestSet(ReplacementTesterError, ValueError):
    pass


class ContextError(ReplacementTesterError, RuntimeError):
    """A context produced a run breaking the run invariants."""


class EmptyTestSetWarning(UserWarning):
    pass


class UnclassifiableCase(ReplacementTesterError, ValueError):
    pass


class InconsistentEff(ReplacementTesterError):

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)


class MissingUniverse(ReplacementTesterError, ValueError):
    pass


class SamplerCannotEqualize(ReplacementTesterError):
    pass


class UnsortedSeries(ReplacementTesterError, ValueError):
    pass


class InfiniteDomain(ReplacementTesterError, ValueError):
    pass


class EmptyClass(ReplacementTesterError):
    pass


class ExplosionGuard(ReplacementTesterError):
    pass


class InvalidGeneratorSpec(ReplacementTesterError, ValueError):
    pass


class MalformedSpec(ReplacementTesterError, ValueError):
    pass


class UnreachablePair(ReplacementTesterError, ValueError):
    pass


class NotATrafficRun(ReplacementTesterError, ValueError):
    pass


class ConfigError(ReplacementTesterError):
    pass


class CampaignAborted(ReplacementTesterError):
    """Raised when a campaign stops early. ``report`` holds what was computed so far."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ReportIoError(ReplacementTesterError, OSError):
    pass
