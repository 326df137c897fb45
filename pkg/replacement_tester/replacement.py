# coding: UTF-8
"""Replacement and equivalence of system tuples over a test set.

``S1`` can replace ``S2`` for ``P`` when ``P(t, C[S2](t)) => P(t, C[S1](t))`` for every tested
``t``; the two are equivalent for ``P`` when the verdicts agree everywhere. Over a finite test set
these are evidence; only a full enumeration of a finite domain on a memoryless context is
conclusive.
"""
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .core import DomainDescriptor, Outcome, TestCase, check_embedding, judge, run_experiment
from .errors import EmptyTestSetWarning, InvalidTestSet
from .seeding import check_seed, derive_seed


logger = logging.getLogger(__name__)

CASE_ID_WIDTH = 7


def case_id(prefix, index):
    return '%s%0*d' % (prefix, CASE_ID_WIDTH, index)


@dataclass(frozen=True)
class TestSet:
    """Finite, ordered test set ``T``. Ids are unique."""
    __test__ = False

    name: str
    cases: tuple
    domain: Optional[DomainDescriptor] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'cases', tuple(self.cases))
        seen = set()
        for case in self.cases:
            if case.id in seen:
                raise InvalidTestSet('duplicate test case id %r in %r' % (case.id, self.name))
            seen.add(case.id)

    @classmethod
    def from_payloads(cls, name, payloads, prefix, domain=None, start=1):
        cases = (TestCase.of(case_id(prefix, i), payload, domain)
                 for i, payload in enumerate(payloads, start))
        return cls(name, tuple(cases), domain)

    def __len__(self):
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    @property
    def ids(self):
        return tuple(case.id for case in self.cases)

    def payloads(self):
        return tuple(case.payload for case in self.cases)

    def by_id(self):
        return dict((case.id, case) for case in self.cases)

    def subset(self, ids, name=None):
        wanted = set(ids)
        return TestSet(name or self.name, (c for c in self.cases if c.id in wanted), self.domain)

    def union(self, other, name=None):
        known = self.by_id()
        extra = []
        for case in other:
            if case.id not in known:
                extra.append(case)
            elif known[case.id] != case:
                raise InvalidTestSet('id %r names two different test cases' % case.id)
        return TestSet(name or self.name, self.cases + tuple(extra), self.domain or other.domain)

    def sorted(self):
        return TestSet(self.name, sorted(self.cases, key=lambda c: c.id), self.domain)


@dataclass(frozen=True)
class Experiment:
    case: TestCase
    run: object
    verdict: object


def evaluate(context, systems, property, testset, seed, jobs=1):
    """Run and judge every test case of ``testset``.

    Case ``t`` runs with seed ``derive_seed(seed, t.id)``, so results do not depend on the order
    or parallelism of execution.

    Returns
    -------
    dict
        ``{test id: Experiment}`` in id order.
    """
    seed = check_seed(seed)
    systems = list(systems)
    check_embedding(context, systems)

    def experiment(case):
        members = [s.fresh() for s in systems] if jobs > 1 else systems
        run = run_experiment(context, members, case, derive_seed(seed, case.id))
        return Experiment(case, run, judge(property, case, run))

    if jobs > 1 and len(testset) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(experiment, testset.cases))
    else:
        done = [experiment(case) for case in testset.cases]
    return dict((e.case.id, e) for e in sorted(done, key=lambda e: e.case.id))


def is_exhaustive(context, testset):
    """True when ``testset`` covers the whole enumerable domain of a memoryless context."""
    domain = context.input_domain
    if not context.memoryless or not domain.enumerable or not len(testset):
        return False
    payloads = set(testset.payloads())
    return len(payloads) == domain.size() and all(domain.contains(p) for p in payloads)


def evidence_kind(report):
    return 'conclusive' if report.conclusive else 'statistical'


@dataclass(frozen=True)
class Violation:
    """Verdicts of both sides on one test case."""
    case: TestCase
    candidate: object
    incumbent: object

    def to_record(self):
        return {
            'test_id': self.case.id,
            'candidate': self.candidate.outcome.value,
            'incumbent': self.incumbent.outcome.value,
            'evidence': self.candidate.evidence,
        }


@dataclass(frozen=True)
class ReplacementReport:
    violations: tuple
    indeterminate: tuple
    conclusive: bool
    cases_evaluated: int

    @property
    def holds(self):
        return not self.violations

    def to_record(self):
        return {
            'holds': self.holds,
            'violations': [v.to_record() for v in self.violations],
            'indeterminate': [v.to_record() for v in self.indeterminate],
            'conclusive': self.conclusive,
            'evidence_kind': evidence_kind(self),
            'cases_evaluated': self.cases_evaluated,
        }


@dataclass(frozen=True)
class Distinction:
    case: TestCase
    first: object
    second: object

    @property
    def indeterminate(self):
        return not (self.first.conclusive and self.second.conclusive)

    def to_record(self):
        return {
            'test_id': self.case.id,
            'first': self.first.outcome.value,
            'second': self.second.outcome.value,
            'indeterminate': self.indeterminate,
        }


@dataclass(frozen=True)
class EquivalenceReport:
    distinguishing_cases: tuple
    conclusive: bool
    cases_evaluated: int

    @property
    def equivalent(self):
        return not self.distinguishing_cases

    def to_record(self):
        return {
            'equivalent': self.equivalent,
            'distinguishing_cases': [d.to_record() for d in self.distinguishing_cases],
            'conclusive': self.conclusive,
            'evidence_kind': evidence_kind(self),
            'cases_evaluated': self.cases_evaluated,
        }


def replacement_from(candidate, incumbent, conclusive):
    """Build a :class:`ReplacementReport` from two :func:`evaluate` results."""
    violations, indeterminate = [], []
    for test_id in sorted(candidate):
        mine, theirs = candidate[test_id].verdict, incumbent[test_id].verdict
        pair = Violation(candidate[test_id].case, mine, theirs)
        if not (mine.conclusive and theirs.conclusive):
            indeterminate.append(pair)
        elif theirs.outcome is Outcome.PASS and mine.outcome is Outcome.FAIL:
            violations.append(pair)
    return ReplacementReport(tuple(violations), tuple(indeterminate), conclusive, len(candidate))


def equivalence_from(first, second, conclusive):
    distinguishing = tuple(
        Distinction(first[i].case, first[i].verdict, second[i].verdict)
        for i in sorted(first) if first[i].verdict.outcome is not second[i].verdict.outcome)
    return EquivalenceReport(distinguishing, conclusive, len(first))


def _warn_empty(testset):
    message = 'test set %r is empty; the relation holds vacuously' % testset.name
    logger.warning(message)
    warnings.warn(message, EmptyTestSetWarning, stacklevel=3)


def can_replace(context, candidate, incumbent, property, testset, seed, jobs=1):
    """Check whether ``candidate`` can replace ``incumbent`` for ``property`` over ``testset``.

    A violation is a test case where the incumbent passes and the candidate fails. Cases where
    either verdict is Inconclusive go to ``indeterminate`` and never count as violations.
    Both tuples run with the same per-case seed.

    Returns
    -------
    ReplacementReport
        ``conclusive`` only for a full enumeration on a memoryless context.
    """
    check_embedding(context, list(candidate))
    check_embedding(context, list(incumbent))
    if not len(testset):
        _warn_empty(testset)
        return ReplacementReport((), (), False, 0)
    mine = evaluate(context, candidate, property, testset, seed, jobs)
    theirs = evaluate(context, incumbent, property, testset, seed, jobs)
    report = replacement_from(mine, theirs, is_exhaustive(context, testset))
    logger.info('replacement over %s: holds=%s, %d violations, %d indeterminate',
                testset.name, report.holds, len(report.violations), len(report.indeterminate))
    return report


def equivalent(context, systems1, systems2, property, testset, seed, jobs=1):
    """Check whether ``property`` distinguishes two system tuples over ``testset``.

    A verdict pair differing only by Inconclusive still distinguishes and is flagged
    ``indeterminate`` in the report record.
    """
    check_embedding(context, list(systems1))
    check_embedding(context, list(systems2))
    if not len(testset):
        _warn_empty(testset)
        return EquivalenceReport((), False, 0)
    first = evaluate(context, systems1, property, testset, seed, jobs)
    second = evaluate(context, systems2, property, testset, seed, jobs)
    report = equivalence_from(first, second, is_exhaustive(context, testset))
    logger.info('equivalence over %s: equivalent=%s, %d distinguishing cases',
                testset.name, report.equivalent, len(report.distinguishing_cases))
    return report


def enumerate_domain(context):
    """Return the whole input domain as a test set, or None when it cannot be enumerated.

    The set is returned for every enumerable domain; reports built from it are conclusive only
    when the context is also memoryless.
    """
    domain = context.input_domain
    if not domain.enumerable:
        return None
    return TestSet.from_payloads('exhaustive:' + domain.name, domain.enumerate(), 'e', domain)
