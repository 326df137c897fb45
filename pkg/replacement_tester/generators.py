# coding: UTF-8
"""Test case generators.

Usually :func:`generate` is all you need: it dispatches a :class:`GeneratorSpec` to one of the
strategies below.

- ``Exhaustive`` : :func:`generate_exhaustive`
- ``Random`` : :func:`generate_random`
- ``Stratified`` : :func:`generate_stratified`
- ``Adaptive`` : :func:`generate_adaptive`
- ``BoundedSequence`` : :func:`generate_bounded_sequences`

Every strategy is deterministic for a given seed.
"""
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from math import floor
from typing import Optional

from .core import DomainKind, Outcome, TestCase, sequence_domain
from .errors import (
    EmptyClass, ExplosionGuard, InfiniteDomain, InvalidGeneratorSpec, MissingUniverse,
    PreconditionError)
from .replacement import TestSet, case_id, evaluate
from .seeding import check_seed, make_rng


logger = logging.getLogger(__name__)

ENUMERATION_GUARD = 10 ** 6
ATTEMPTS_PER_CASE = 1000


class Strategy(Enum):
    EXHAUSTIVE = 'Exhaustive'
    RANDOM = 'Random'
    STRATIFIED = 'Stratified'
    ADAPTIVE = 'Adaptive'
    BOUNDED_SEQUENCE = 'BoundedSequence'


@dataclass(frozen=True)
class GeneratorSpec:
    strategy: Strategy
    count: Optional[int] = None
    max_length: Optional[int] = None
    classifier_ref: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        check_seed(self.seed)
        for name in ('count', 'max_length'):
            value = getattr(self, name)
            if value is not None and (int(value) != value or value < 1):
                raise InvalidGeneratorSpec('%s must be a positive integer, got %r'
                                           % (name, value))
        if self.strategy in (Strategy.STRATIFIED, Strategy.ADAPTIVE):
            if self.classifier_ref is None:
                raise InvalidGeneratorSpec('%s generation needs a classifier'
                                           % self.strategy.value)
        if self.strategy in (Strategy.RANDOM, Strategy.STRATIFIED, Strategy.ADAPTIVE):
            if self.count is None:
                raise InvalidGeneratorSpec('%s generation needs a count' % self.strategy.value)
        if self.strategy is Strategy.BOUNDED_SEQUENCE and self.max_length is None:
            raise InvalidGeneratorSpec('bounded sequence generation needs max_length')


def generate(spec, context, classifier=None, systems=None, property=None,
             guard=ENUMERATION_GUARD, jobs=1):
    """Generate the test set described by ``spec`` for ``context``.

    Parameters
    ----------
    spec : GeneratorSpec
    context : Context
        Supplies the input domain (and runs experiments for the adaptive strategy).
    classifier : EquivalenceClassifier, optional
        Resolved ``spec.classifier_ref``.
    systems, property : optional
        Needed by the adaptive strategy only.
    guard : int
        Largest enumeration allowed.
    """
    domain = context.input_domain
    if spec.strategy is Strategy.EXHAUSTIVE:
        return generate_exhaustive(domain, guard)
    if spec.strategy is Strategy.RANDOM:
        return generate_random(domain, spec.count, spec.seed)
    if spec.strategy is Strategy.STRATIFIED:
        return generate_stratified(domain, classifier, spec.count, spec.seed, guard)
    if spec.strategy is Strategy.ADAPTIVE:
        if systems is None or property is None:
            raise InvalidGeneratorSpec('adaptive generation needs systems and a property')
        return generate_adaptive(context, systems, property, classifier, spec.count, spec.seed,
                                 guard, jobs)
    if domain.kind is not DomainKind.SEQUENCE:
        raise InvalidGeneratorSpec('bounded sequences need a sequence input domain')
    return generate_bounded_sequences(domain.values, spec.max_length, spec.count, spec.seed,
                                      guard)


def generate_exhaustive(domain, guard=ENUMERATION_GUARD):
    """Every value of an enumerable domain once, in declaration order."""
    if not domain.enumerable:
        raise InfiniteDomain('domain %r cannot be enumerated' % domain.name)
    if domain.size() > guard:
        raise ExplosionGuard('domain %r has %d values, more than %d'
                             % (domain.name, domain.size(), guard))
    return TestSet.from_payloads('exhaustive:' + domain.name, domain.enumerate(), 'e', domain)


def generate_random(domain, count, seed):
    """``count`` independent draws with replacement. Repeated payloads keep distinct ids."""
    if count is None or count < 1:
        raise PreconditionError('random generation needs count >= 1, got %r' % (count,))
    rng = make_rng(seed, 'random')
    payloads = [domain.sample(rng) for _ in range(count)]
    return TestSet.from_payloads('random:' + domain.name, payloads, 'r', domain)


def apportion(count, weights):
    """Largest-remainder apportionment of ``count`` seats; ties go to the earlier entry.

    >>> apportion(8, [3, 1])
    [6, 2]
    >>> apportion(10, [1, 1, 1])
    [4, 3, 3]
    """
    total = float(sum(weights))
    if not total > 0:
        raise PreconditionError('apportionment needs a positive total weight')
    exact = [count * w / total for w in weights]
    seats = [int(floor(x)) for x in exact]
    left = count - sum(seats)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - seats[i]), i))
    for i in order[:left]:
        seats[i] += 1
    return seats


def stratified_quotas(count, classifier):
    """Per-class quotas in universe order; every class gets one when ``count`` allows."""
    weights = [classifier.weight(k) for k in classifier.universe]
    quotas = apportion(count, weights)
    if count >= len(quotas):
        for i, quota in enumerate(quotas):
            if quota == 0:
                donor = max(range(len(quotas)), key=lambda j: (quotas[j], -j))
                quotas[donor] -= 1
                quotas[i] = 1
    return quotas


class ClassDraws:
    """Draws domain values of a requested class.

    Small enumerable domains are bucketed once and drawn uniformly per class; other domains are
    sampled and bucketed until the class is hit, keeping surplus draws for later requests.
    """

    def __init__(self, domain, classifier, rng, guard=ENUMERATION_GUARD):
        self.domain = domain
        self.classifier = classifier
        self.rng = rng
        self.buckets = None
        self.reservoir = {}
        if domain.enumerable and domain.size() <= guard:
            self.buckets = {}
            for payload in domain.enumerate():
                self.buckets.setdefault(self._key(payload), []).append(payload)

    def _key(self, payload):
        return self.classifier(TestCase.of('probe', payload, self.domain))

    def draw(self, key, count):
        if self.buckets is not None:
            members = self.buckets.get(key)
            if not members:
                raise EmptyClass('no value of %r falls in class %r' % (self.domain.name, key))
            return [members[int(i)] for i in self.rng.integers(len(members), size=count)]
        queue = self.reservoir.setdefault(key, deque())
        attempts = ATTEMPTS_PER_CASE * count
        while len(queue) < count:
            if attempts == 0:
                raise EmptyClass('could not sample class %r of %r'
                                 % (key, self.domain.name))
            attempts -= 1
            payload = self.domain.sample(self.rng)
            self.reservoir.setdefault(self._key(payload), deque()).append(payload)
        return [queue.popleft() for _ in range(count)]


def _require_universe(classifier):
    if classifier is None or not classifier.universe:
        raise MissingUniverse('generation by class needs a classifier with a universe')


def generate_stratified(domain, classifier, count, seed, guard=ENUMERATION_GUARD):
    """Draw per-class quotas proportional to the class weights.

    Parameters
    ----------
    domain : DomainDescriptor
    classifier : EquivalenceClassifier
        With universe and weights.
    count : int
        At least the number of classes.
    seed : int
    """
    _require_universe(classifier)
    if count is None or count < len(classifier.universe):
        raise PreconditionError('stratified generation needs count >= %d classes, got %r'
                                % (len(classifier.universe), count))
    quotas = stratified_quotas(count, classifier)
    draws = ClassDraws(domain, classifier, make_rng(seed, 'stratified'), guard)
    payloads = []
    for key, quota in zip(classifier.universe, quotas):
        if quota:
            payloads.extend(draws.draw(key, quota))
    logger.debug('stratified quotas %s', dict(zip(classifier.universe, quotas)))
    return TestSet.from_payloads('stratified:' + domain.name, payloads, 's', domain)


def generate_adaptive(context, systems, property, classifier, budget, seed,
                      guard=ENUMERATION_GUARD, jobs=1):
    """Oracle-guided generation.

    Starts with one case per class in descending weight order. Each following batch of at most
    ``|universe|`` cases is apportioned by class score = (normalised weight while the class is
    uncovered) + observed Fail rate; when every score is zero the weights are used. Stops at
    exactly ``budget`` cases.
    """
    if budget is None or budget < 1:
        raise PreconditionError('adaptive generation needs budget >= 1, got %r' % (budget,))
    _require_universe(classifier)
    domain = context.input_domain
    universe = classifier.universe
    weights = [classifier.weight(k) for k in universe]
    total = sum(weights)
    draws = ClassDraws(domain, classifier, make_rng(seed, 'adaptive'), guard)
    cases = []
    passed = dict((k, 0) for k in universe)
    failed = dict((k, 0) for k in universe)
    drawn = dict((k, 0) for k in universe)

    def extend(allocation):
        batch = []
        for key, quota in allocation:
            for payload in draws.draw(key, quota) if quota else ():
                batch.append(TestCase.of(case_id('a', len(cases) + len(batch) + 1), payload,
                                         domain))
            drawn[key] += quota
        experiments = evaluate(context, systems, property, TestSet('batch', batch), seed, jobs)
        for case in batch:
            outcome = experiments[case.id].verdict.outcome
            key = classifier(case)
            if outcome is Outcome.PASS:
                passed[key] += 1
            elif outcome is Outcome.FAIL:
                failed[key] += 1
        cases.extend(batch)

    order = sorted(range(len(universe)), key=lambda i: (-weights[i], i))
    extend([(universe[i], 1) for i in order[:budget]])
    while len(cases) < budget:
        size = min(len(universe), budget - len(cases))
        scores = []
        for key, weight in zip(universe, weights):
            judged = passed[key] + failed[key]
            rate = failed[key] / judged if judged else 0.0
            scores.append((weight / total if not drawn[key] else 0.0) + rate)
        allocation = apportion(size, scores if any(scores) else weights)
        logger.debug('adaptive batch %s', dict(zip(universe, allocation)))
        extend(zip(universe, allocation))
    return TestSet('adaptive:' + domain.name, cases, domain)


def generate_bounded_sequences(alphabet, max_length, count=None, seed=0,
                               guard=ENUMERATION_GUARD):
    """Sequences of length 1..max_length.

    Without ``count`` all of them in length-lexicographic order; with ``count`` a uniform,
    reproducible sample of that space.
    """
    if max_length is None or max_length < 1:
        raise PreconditionError('max_length must be >= 1, got %r' % (max_length,))
    domain = sequence_domain('sequences', alphabet, max_length)
    if count is None:
        if domain.size() > guard:
            raise ExplosionGuard('%d sequences exceed the enumeration guard of %d'
                                 % (domain.size(), guard))
        payloads = domain.enumerate()
    else:
        if count < 1:
            raise PreconditionError('count must be >= 1, got %r' % (count,))
        rng = make_rng(seed, 'bounded-sequences')
        payloads = [domain.sample(rng) for _ in range(count)]
    return TestSet.from_payloads('bounded-sequences', payloads, 'b', domain)
