# coding: UTF-8
"""Efficiency and score functions, and audits of the requirements they should meet.

An efficiency function ``eff(T) ∈ [0, 1]`` says how thoroughly a test set explores behaviour
relevant to ``P``. A score function ``sc(T, R)`` says how likely the system meets ``P``; here it is
the pass fraction with an exact (Clopper–Pearson) confidence interval.

The audits check empirically, over sampled test sets, that an ``(eff, sc)`` pair is

- monotone: ``T1 ⊆ T2`` implies ``eff(T1) <= eff(T2)``,
- consistent: ``t1 ≈P t2`` implies ``eff({t1}) = eff({t2})``,
- reproducible: ``eff(T1) = eff(T2)`` implies similar scores,
- union-compatible: equal efficiencies stay equal under union,
- accurate: scores of increasingly efficient sets have non-widening intervals.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from scipy.stats import beta

from .core import Outcome
from .errors import (
    MissingUniverse, PreconditionError, SamplerCannotEqualize, UnsortedSeries)
from .replacement import TestSet, evaluate
from .seeding import derive_seed, make_rng


logger = logging.getLogger(__name__)

EFF_TOLERANCE = 1e-12
WIDTH_TOLERANCE = 1e-9


class EfficiencyFunction:

    def __init__(self, name, evaluate, classifier=None):
        self.name = name
        self.evaluate = evaluate
        self.classifier = classifier

    def __call__(self, testset):
        value = float(self.evaluate(testset))
        if not 0.0 <= value <= 1.0:
            raise ValueError('%s returned %r outside [0, 1]' % (self.name, value))
        return value

    def __repr__(self):
        return 'EfficiencyFunction(%r)' % self.name


def class_coverage_eff(classifier):
    """Weighted share of universe classes holding at least one test case.

    Parameters
    ----------
    classifier : EquivalenceClassifier
        Must declare a non-empty universe.

    Returns
    -------
    EfficiencyFunction
    """
    if not classifier.universe:
        raise MissingUniverse('%s declares no class universe' % classifier.name)
    total = classifier.total_weight()

    def coverage(testset):
        covered = set(classifier(case) for case in testset)
        return sum(classifier.weight(k) for k in classifier.universe if k in covered) / total

    return EfficiencyFunction('class-coverage(%s)' % classifier.name, coverage, classifier)


def predicate_coverage_eff(features, weights=None, name='feature-coverage'):
    """Functional coverage: weighted share of feature predicates some test case exercises.

    Parameters
    ----------
    features : dict
        ``{feature name: predicate(testcase) -> bool}``.
    weights : dict, optional
        Positive weight per feature, 1 by default.
    """
    if not features:
        raise MissingUniverse('no features to cover')
    weights = dict(weights or {})
    order = list(features)
    total = float(sum(weights.get(f, 1.0) for f in order))

    def coverage(testset):
        cases = list(testset)
        hit = [f for f in order if any(features[f](case) for case in cases)]
        return sum(weights.get(f, 1.0) for f in hit) / total

    return EfficiencyFunction(name, coverage)


def clopper_pearson(successes, trials, confidence_level):
    """Exact binomial confidence interval ``(low, high)``."""
    alpha = 1.0 - confidence_level
    low = 0.0 if successes == 0 else float(
        beta.ppf(alpha / 2, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(
        beta.isf(alpha / 2, successes + 1, trials - successes))
    return low, high


@dataclass(frozen=True)
class ScoreRecord:
    """Pass fraction over conclusive verdicts with its confidence interval.

    With no conclusive verdict the record is degenerate: estimate and bounds are None.
    """
    point_estimate: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    confidence_level: float
    n_pass: int
    n_fail: int
    n_inconclusive: int

    def __post_init__(self):
        if self.point_estimate is not None and not (
                self.ci_low <= self.point_estimate <= self.ci_high):
            raise ValueError('confidence interval must contain the point estimate')

    @property
    def degenerate(self):
        return self.point_estimate is None

    @property
    def width(self):
        return 1.0 if self.degenerate else self.ci_high - self.ci_low

    def to_record(self):
        return {
            'point_estimate': self.point_estimate,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'confidence_level': self.confidence_level,
            'n_pass': self.n_pass,
            'n_fail': self.n_fail,
            'n_inconclusive': self.n_inconclusive,
        }


def success_score(verdicts, confidence_level=0.95):
    """Score a list of verdicts. Inconclusive verdicts are counted apart."""
    if not 0.0 < confidence_level < 1.0:
        raise PreconditionError('confidence level must lie in (0, 1), got %r'
                                % (confidence_level,))
    outcomes = [v.outcome for v in verdicts]
    n_pass = outcomes.count(Outcome.PASS)
    n_fail = outcomes.count(Outcome.FAIL)
    n_inconclusive = outcomes.count(Outcome.INCONCLUSIVE)
    n = n_pass + n_fail
    if not n:
        logger.warning('no conclusive verdict among %d; score is degenerate', n_inconclusive)
        return ScoreRecord(None, None, None, confidence_level, 0, 0, n_inconclusive)
    point = n_pass / n
    low, high = clopper_pearson(n_pass, n, confidence_level)
    return ScoreRecord(point, min(low, point), max(high, point), confidence_level,
                       n_pass, n_fail, n_inconclusive)


@dataclass(frozen=True)
class SimilarityDegree:
    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise PreconditionError('similarity degree must be non-negative')

    def similar(self, first, second):
        if first.degenerate or second.degenerate:
            return first.degenerate and second.degenerate
        return abs(first.point_estimate - second.point_estimate) <= self.delta


class Requirement(Enum):
    MONOTONICITY = 'Monotonicity'
    CONSISTENCY = 'Consistency'
    REPRODUCIBILITY = 'Reproducibility'
    UNION_COMPATIBILITY = 'UnionCompatibility'
    ACCURACY_TREND = 'AccuracyTrend'


@dataclass(frozen=True)
class AuditReport:
    requirement: Requirement
    trials: int
    violations: tuple

    @property
    def passed(self):
        return not self.violations

    def to_record(self):
        return {
            'requirement': self.requirement.value,
            'trials': self.trials,
            'violations': list(self.violations),
            'passed': self.passed,
        }


class TestSetSampler:
    """Draws test sets from a pool for the audits.

    Parameters
    ----------
    pool : TestSet
        Cases to draw from.
    classifier : EquivalenceClassifier, optional
        Needed by the class-aware draws.
    per_class : int
        Cases drawn per selected class (fewer when the class is smaller).
    mode : {'stratified', 'set', 'value'}
        How :meth:`equal_efficiency_pair` aligns its two sets: both over every class, both over
        one random set of classes, or over independent class sets whose efficiencies match.
    attempts : int
        Draws tried before giving up on equal efficiency.
    """
    __test__ = False

    MODES = ('stratified', 'set', 'value')

    def __init__(self, pool, classifier=None, per_class=1, mode='set', attempts=100):
        if mode not in self.MODES:
            raise PreconditionError('unknown sampler mode %r' % (mode,))
        if per_class < 1 or attempts < 1:
            raise PreconditionError('per_class and attempts must be positive')
        self.pool = pool
        self.classifier = classifier
        self.per_class = per_class
        self.mode = mode
        self.attempts = attempts
        self.members = OrderedDict()
        if classifier is not None:
            grouped = {}
            for case in pool:
                grouped.setdefault(classifier(case), []).append(case)
            for key in classifier.universe or sorted(grouped):
                if key in grouped:
                    self.members[key] = tuple(grouped[key])

    def subset(self, rng):
        mask = rng.random(len(self.pool)) < 0.5
        return TestSet('subset', (c for c, keep in zip(self.pool, mask) if keep), self.pool.domain)

    def superset(self, rng, base):
        known = set(base.ids)
        rest = [c for c in self.pool if c.id not in known]
        extra = [c for c, keep in zip(rest, rng.random(len(rest)) < 0.5) if keep]
        if rest and not extra:
            extra = [rest[int(rng.integers(len(rest)))]]
        return base.union(TestSet('extra', extra), 'superset')

    def class_keys(self, rng):
        """Random non-empty selection of populated classes."""
        keys = list(self.members)
        if not keys:
            raise PreconditionError('the sampler has no classified cases')
        chosen = [k for k, keep in zip(keys, rng.random(len(keys)) < 0.5) if keep]
        return chosen or [keys[int(rng.integers(len(keys)))]]

    def draw(self, rng, keys, name='sample'):
        cases = []
        for key in keys:
            members = self.members[key]
            take = min(self.per_class, len(members))
            picked = sorted(int(i) for i in rng.choice(len(members), take, replace=False))
            cases.extend(members[i] for i in picked)
        return TestSet(name, cases, self.pool.domain)

    def equal_efficiency_pair(self, rng, eff):
        for _ in range(self.attempts):
            if self.mode == 'stratified':
                first = second = list(self.members)
            elif self.mode == 'set':
                first = second = self.class_keys(rng)
            else:
                first, second = self.class_keys(rng), self.class_keys(rng)
            one, two = self.draw(rng, first, 'T1'), self.draw(rng, second, 'T2')
            if abs(eff(one) - eff(two)) <= EFF_TOLERANCE:
                return one, two
        raise SamplerCannotEqualize('no equally efficient pair after %d attempts'
                                    % self.attempts)


def _check_trials(trials):
    if trials < 1:
        raise PreconditionError('an audit needs at least one trial, got %r' % (trials,))


def _report(requirement, trials, violations):
    report = AuditReport(requirement, trials, tuple(violations))
    log = logger.info if report.passed else logger.warning
    log('%s audit: %d trials, %d violations', requirement.value, trials, len(violations))
    return report


def audit_monotonicity(eff, sampler, trials, seed):
    """Draw ``T1`` and a superset ``T2``; a witness is ``eff(T1) > eff(T2)``."""
    _check_trials(trials)
    violations = []
    for trial in range(trials):
        rng = make_rng(seed, 'monotonicity', trial)
        smaller = sampler.subset(rng)
        larger = sampler.superset(rng, smaller)
        low, high = eff(smaller), eff(larger)
        if low > high + EFF_TOLERANCE:
            violations.append('trial %d: eff(T1)=%r > eff(T2)=%r for |T1|=%d, |T2|=%d'
                              % (trial, low, high, len(smaller), len(larger)))
    return _report(Requirement.MONOTONICITY, trials, violations)


def audit_consistency(eff, classifier, sampler, trials, seed):
    """Draw within-class pairs; a witness is a pair with different singleton efficiencies.

    Without any class of two or more pool cases the audit passes vacuously.
    """
    _check_trials(trials)
    classes = {}
    for case in sampler.pool:
        classes.setdefault(classifier(case), []).append(case)
    keys = [k for k in (classifier.universe or sorted(classes)) if len(classes.get(k, ())) > 1]
    violations = []
    for trial in range(trials):
        if not keys:
            continue
        rng = make_rng(seed, 'consistency', trial)
        members = classes[keys[int(rng.integers(len(keys)))]]
        i, j = (int(x) for x in rng.choice(len(members), 2, replace=False))
        one, two = members[i], members[j]
        first = eff(TestSet('singleton', (one,)))
        second = eff(TestSet('singleton', (two,)))
        if abs(first - second) > EFF_TOLERANCE:
            violations.append('trial %d: eff({%s})=%r but eff({%s})=%r'
                              % (trial, one.id, first, two.id, second))
    return _report(Requirement.CONSISTENCY, trials, violations)


def audit_reproducibility(eff, context, systems, property, sampler, similarity, trials, seed,
                          confidence_level=0.95, jobs=1):
    """Run two equally efficient test sets per trial and compare their scores."""
    _check_trials(trials)
    violations = []
    for trial in range(trials):
        rng = make_rng(seed, 'reproducibility', trial)
        first, second = sampler.equal_efficiency_pair(rng, eff)
        run_seed = derive_seed(seed, 'reproducibility', trial)
        scores = [
            success_score([e.verdict for e in evaluate(
                context, systems, property, t, run_seed, jobs).values()], confidence_level)
            for t in (first, second)]
        if not similarity.similar(*scores):
            violations.append('trial %d: scores %r and %r differ by more than %r'
                              % (trial, scores[0].point_estimate, scores[1].point_estimate,
                                 similarity.delta))
    return _report(Requirement.REPRODUCIBILITY, trials, violations)


def audit_union_compatibility(eff, sampler, trials, seed):
    """Draw ``eff(T1) = eff(T2)``, ``eff(T3) = eff(T4)``; a witness breaks equality of unions."""
    _check_trials(trials)
    violations = []
    for trial in range(trials):
        rng = make_rng(seed, 'union-compatibility', trial)
        one, two = sampler.equal_efficiency_pair(rng, eff)
        three, four = sampler.equal_efficiency_pair(rng, eff)
        left, right = eff(one.union(three)), eff(two.union(four))
        if abs(left - right) > EFF_TOLERANCE:
            violations.append('trial %d: eff(T1 ∪ T3)=%r but eff(T2 ∪ T4)=%r'
                              % (trial, left, right))
    return _report(Requirement.UNION_COMPATIBILITY, trials, violations)


def audit_accuracy_trend(series):
    """Check that interval widths do not grow along ``[(eff value, ScoreRecord), ...]``.

    Raises
    ------
    UnsortedSeries
        Unless efficiencies strictly increase along the series.
    """
    for (before, _), (after, _) in zip(series, series[1:]):
        if not after > before:
            raise UnsortedSeries('efficiencies must strictly increase: %r then %r'
                                 % (before, after))
    violations = []
    for index, ((_, before), (_, after)) in enumerate(zip(series, series[1:])):
        if after.width > before.width + WIDTH_TOLERANCE:
            violations.append('entry %d: width %r grows to %r'
                              % (index + 1, before.width, after.width))
    return _report(Requirement.ACCURACY_TREND, max(len(series) - 1, 0), violations)
