# coding: UTF-8
"""Domain model of black-box experiments.

An experiment embeds systems ``S1, ..., Sn`` into a context ``C`` and applies a test case ``t``
to obtain a run ``r = C[S1, ..., Sn](t)``. A property ``P`` then judges the pair ``(t, r)``.

This module defines the value types (domains, test cases, runs, verdicts), the abstract
collaborators (systems, contexts, properties), and the two primitive operations
:func:`run_experiment` and :func:`judge`.

Example
-------
>>> digits = finite_domain('digits', range(10))
>>> context = SingleStepContext('identity', digits, digits)
>>> run = run_experiment(context, [identity_system(digits)], TestCase('t7', 7), seed=0)
>>> run.observations
(7,)
>>> judge(output_equals_input(), TestCase('t7', 7), run).outcome
<Outcome.PASS: 'PASS'>
"""
import copy
import json
import logging
import re
from dataclasses import dataclass, field, fields, is_dataclass
from enum import Enum
from functools import cached_property
from itertools import product
from typing import Callable, Optional

from .errors import (
    AlphabetMismatch, ArityMismatch, ContextError, DomainViolation, InfiniteDomain,
    PreconditionError)
from .seeding import check_seed


logger = logging.getLogger(__name__)


class DomainKind(Enum):
    FINITE = 'finite-enumerable'
    SEQUENCE = 'sequence-over-alphabet'
    STRUCTURED = 'structured-scenario'


def count_sequences(alphabet_size, max_length):
    """Number of sequences of length 1..max_length over an alphabet."""
    return sum(alphabet_size ** length for length in range(1, max_length + 1))


def iter_sequences(alphabet, max_length):
    """Yield all sequences of length 1..max_length in length-lexicographic order."""
    for length in range(1, max_length + 1):
        for sequence in product(alphabet, repeat=length):
            yield sequence


@dataclass(frozen=True)
class DomainDescriptor:
    """Declared domain ``Dom(x)`` or ``Dom(y)``.

    Parameters
    ----------
    name : str
        Identifies the domain. Systems embed into a context only if their alphabets are equal
        descriptors, so two domains with the same name and values are interchangeable.
    kind : DomainKind
        ``FINITE`` exposes a total enumeration through ``values``. ``SEQUENCE`` ranges over
        tuples of symbols from ``values`` (the alphabet), optionally bounded by ``max_length``.
        ``STRUCTURED`` delegates membership to ``check`` and sampling to ``sampler``.
    values : tuple
        Value set or alphabet.
    max_length : int, optional
        Longest sequence, sequence kinds only.
    ranges : tuple
        ``(field, low, high)`` triples documenting structured fields.
    check : callable, optional
        Membership predicate of a structured domain.
    sampler : callable, optional
        ``sampler(rng) -> value`` for structured domains.
    enumerator : callable, optional
        ``enumerator() -> iterable`` listing every member of a finite structured domain.
    """
    name: str
    kind: DomainKind
    values: tuple = ()
    max_length: Optional[int] = None
    ranges: tuple = ()
    check: Optional[Callable] = field(default=None, compare=False, repr=False)
    sampler: Optional[Callable] = field(default=None, compare=False, repr=False)
    enumerator: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(self.values))
        object.__setattr__(self, 'ranges', tuple(tuple(r) for r in self.ranges))
        if self.max_length is not None:
            if self.kind is not DomainKind.SEQUENCE:
                raise PreconditionError('max_length only applies to sequence domains')
            if int(self.max_length) != self.max_length or self.max_length < 1:
                raise PreconditionError('max_length must be a positive integer')
        if self.kind in (DomainKind.FINITE, DomainKind.SEQUENCE):
            if not self.values:
                raise PreconditionError('domain %r declares no values' % self.name)
            if len(set(self.values)) != len(self.values):
                raise PreconditionError('domain %r declares duplicate values' % self.name)

    @cached_property
    def members(self):
        return frozenset(self.values)

    @cached_property
    def _structured_size(self):
        return sum(1 for _ in self.enumerator())

    @property
    def enumerable(self):
        if self.kind is DomainKind.SEQUENCE:
            return self.max_length is not None
        return self.kind is DomainKind.FINITE or self.enumerator is not None

    def size(self):
        """Number of values, or None for domains without a total enumeration."""
        if self.kind is DomainKind.FINITE:
            return len(self.values)
        if not self.enumerable:
            return None
        if self.kind is DomainKind.SEQUENCE:
            return count_sequences(len(self.values), self.max_length)
        return self._structured_size

    def enumerate(self):
        if self.kind is DomainKind.FINITE:
            return iter(self.values)
        if not self.enumerable:
            raise InfiniteDomain('domain %r has no total enumeration' % self.name)
        if self.kind is DomainKind.SEQUENCE:
            return iter_sequences(self.values, self.max_length)
        return iter(self.enumerator())

    def contains(self, value):
        try:
            if self.kind is DomainKind.FINITE:
                return value in self.members
            if self.kind is DomainKind.SEQUENCE:
                if not isinstance(value, tuple) or not value:
                    return False
                if self.max_length is not None and len(value) > self.max_length:
                    return False
                return all(symbol in self.members for symbol in value)
        except TypeError:
            # unhashable values are never members
            return False
        return self.check is None or bool(self.check(value))

    def sample(self, rng):
        """Draw one value uniformly (finite and bounded sequence kinds) or from ``sampler``.

        Bounded sequences draw the length ``k`` with probability ``|alphabet|**k / size``, the
        ratio taken over exact integer counts, then each symbol; sizes beyond int64 are fine.
        """
        if self.kind is DomainKind.FINITE:
            return self.values[int(rng.integers(len(self.values)))]
        if self.kind is DomainKind.SEQUENCE and self.enumerable:
            base = len(self.values)
            counts = [base ** k for k in range(1, self.max_length + 1)]
            total = sum(counts)
            length = int(rng.choice(len(counts), p=[c / total for c in counts])) + 1
            return tuple(self.values[int(i)] for i in rng.integers(base, size=length))
        if self.sampler is None:
            raise InfiniteDomain('domain %r cannot be sampled' % self.name)
        return self.sampler(rng)

    def case_length(self, payload):
        if self.kind is DomainKind.SEQUENCE:
            return len(payload)
        return getattr(payload, 'length', 1)


def finite_domain(name, values):
    return DomainDescriptor(name, DomainKind.FINITE, tuple(values))


def product_domain(name, *value_sets):
    """Finite domain of tuples, e.g. ``product_domain('bits2', (0, 1), (0, 1))``."""
    return finite_domain(name, product(*value_sets))


def sequence_domain(name, alphabet, max_length=None):
    return DomainDescriptor(name, DomainKind.SEQUENCE, tuple(alphabet), max_length)


def structured_domain(name, check=None, sampler=None, ranges=(), enumerator=None):
    return DomainDescriptor(name, DomainKind.STRUCTURED, ranges=ranges, check=check,
                            sampler=sampler, enumerator=enumerator)


@dataclass(frozen=True)
class TestCase:
    """A test case ``t``. ``length`` counts input symbols (1 for scalar payloads)."""
    __test__ = False

    id: str
    payload: object
    length: int = 1

    @classmethod
    def of(cls, id, payload, domain=None):
        length = domain.case_length(payload) if domain is not None else 1
        return cls(id, payload, length)


class Outcome(Enum):
    PASS = 'PASS'
    FAIL = 'FAIL'
    INCONCLUSIVE = 'INCONCLUSIVE'

    @classmethod
    def parse(cls, text):
        for outcome in cls:
            if outcome.value.lower() == str(text).strip().lower():
                return outcome
        raise ValueError('unknown verdict %r' % (text,))


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    evidence: Optional[str] = None

    @classmethod
    def passed(cls, evidence=None):
        return cls(Outcome.PASS, evidence)

    @classmethod
    def failed(cls, evidence=None):
        return cls(Outcome.FAIL, evidence)

    @classmethod
    def inconclusive(cls, evidence=None):
        return cls(Outcome.INCONCLUSIVE, evidence)

    @property
    def conclusive(self):
        return self.outcome is not Outcome.INCONCLUSIVE


@dataclass(frozen=True)
class Step:
    tick: int
    observation: object


@dataclass(frozen=True)
class Run:
    """The observed behaviour ``r`` of one experiment, as logical-time steps."""
    steps: tuple
    terminated: bool
    seed: int

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    @property
    def observations(self):
        return tuple(step.observation for step in self.steps)

    @property
    def ticks(self):
        return tuple(step.tick for step in self.steps)

    @property
    def last_tick(self):
        return self.steps[-1].tick if self.steps else 0

    def to_record(self):
        return {
            'steps': [{'tick': s.tick, 'observation': plain(s.observation)} for s in self.steps],
            'terminated': self.terminated,
            'seed': self.seed,
        }


def plain(value):
    """Convert observations and payloads into JSON-compatible values."""
    if isinstance(value, Enum):
        return value.name
    if is_dataclass(value) and not isinstance(value, type):
        return dict((f.name, plain(getattr(value, f.name))) for f in fields(value)
                    if f.compare)
    if isinstance(value, dict):
        return dict((str(k), plain(v)) for k, v in value.items())
    if isinstance(value, (tuple, list)):
        return [plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((plain(v) for v in value), key=repr)
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        return value.item()
    return value


def serialize_run(run):
    """Canonical text form of a run: one record per step, then the trailer."""
    lines = [json.dumps({'tick': s.tick, 'observation': plain(s.observation)}, sort_keys=True)
             for s in run.steps]
    lines.append(json.dumps({'terminated': run.terminated, 'seed': run.seed}, sort_keys=True))
    return '\n'.join(lines)


class SystemUnderTest:
    """A black box ``S``: ``reset(seed)`` followed by ``react(stimulus)`` interactions.

    Implementations must be deterministic: the same seed and stimulus sequence produce the same
    responses. ``stimuli`` and ``responses`` declare the alphabets the system speaks.
    """

    def __init__(self, name, stimuli, responses):
        self.name = name
        self.stimuli = stimuli
        self.responses = responses
        self.seed = None

    def reset(self, seed):
        self.seed = seed

    def react(self, stimulus):
        raise NotImplementedError

    def fresh(self):
        """Independent copy for concurrent experiments."""
        return copy.copy(self)

    def __repr__(self):
        return '%s(%r)' % (type(self).__name__, self.name)


class FunctionSystem(SystemUnderTest):
    """Stateless system answering ``function(stimulus)``."""

    def __init__(self, name, function, stimuli, responses):
        super().__init__(name, stimuli, responses)
        self.function = function

    def react(self, stimulus):
        return self.function(stimulus)


def identity_system(domain):
    return FunctionSystem('identity', lambda x: x, domain, domain)


class Context:
    """An embedding ``C`` producing runs ``y = C[S1, ..., Sn](x)``.

    ``memoryless`` must only be set when each run depends on the current payload alone; it gates
    the conclusiveness of exhaustive testing.
    """

    def __init__(self, name, arity, input_domain, output_domain, stimuli, responses,
                 memoryless=False):
        if arity < 0:
            raise ArityMismatch('arity must be non-negative, got %r' % (arity,))
        self.name = name
        self.arity = arity
        self.input_domain = input_domain
        self.output_domain = output_domain
        self.stimuli = stimuli
        self.responses = responses
        self.memoryless = memoryless

    def accepts(self, system):
        return system.stimuli == self.stimuli and system.responses == self.responses

    def apply(self, systems, testcase, seed):
        raise NotImplementedError

    def __repr__(self):
        return '%s(%r)' % (type(self).__name__, self.name)


class SingleStepContext(Context):
    """Memoryless context: one stimulus, one observation at tick 0."""

    def __init__(self, name, input_domain, output_domain, stimuli=None, responses=None):
        super().__init__(name, 1, input_domain, output_domain,
                         stimuli if stimuli is not None else input_domain,
                         responses if responses is not None else output_domain,
                         memoryless=True)

    def apply(self, systems, testcase, seed):
        system, = systems
        system.reset(seed)
        return Run((Step(0, system.react(testcase.payload)),), terminated=True, seed=seed)


class OracleKind(Enum):
    MONITOR = 'automated-monitor'
    RECORDED = 'recorded-human-verdicts'


class Property:
    """Success predicate ``P(t, r)``, realised by an oracle returning a :class:`Verdict`."""

    def __init__(self, name, judge, oracle_kind=OracleKind.MONITOR, domain=None):
        self.name = name
        self.judge = judge
        self.oracle_kind = oracle_kind
        self.domain = domain

    def __call__(self, testcase, run):
        return self.judge(testcase, run)

    def __repr__(self):
        return 'Property(%r)' % self.name


def _final(run):
    return run.steps[-1].observation if run.steps else None


def output_equals_input():
    def check(testcase, run):
        observed = _final(run)
        if observed == testcase.payload:
            return Verdict.passed()
        return Verdict.failed('expected %r, observed %r' % (testcase.payload, observed))
    return Property('output equals input', check)


def expected_output(reference, name='output correct'):
    """Property passing when the final observation equals ``reference(payload)``."""
    def check(testcase, run):
        expected = reference(testcase.payload)
        observed = _final(run)
        if observed == expected:
            return Verdict.passed()
        return Verdict.failed('expected %r, observed %r' % (expected, observed))
    return Property(name, check)


_INTEGER = re.compile(r'^-?\d+$')


def parse_tokens(text, as_tuple=False):
    """Parse a space-separated token field. Integer-looking tokens become ints.

    >>> parse_tokens('1 0')
    (1, 0)
    >>> parse_tokens('a')
    'a'
    >>> parse_tokens('a', as_tuple=True)
    ('a',)
    """
    tokens = tuple(int(t) if _INTEGER.match(t) else t for t in text.split())
    if len(tokens) == 1 and not as_tuple:
        return tokens[0]
    return tokens


def format_tokens(value):
    if isinstance(value, tuple):
        return ' '.join(str(v) for v in value)
    return str(value)


class RecordedVerdicts(Property):
    """Oracle replaying pre-recorded human verdicts.

    ``records`` maps ``(payload, observations)`` to an :class:`Outcome`. Pairs without a record
    are Inconclusive.
    """

    def __init__(self, name, records, domain=None):
        super().__init__(name, self._lookup, OracleKind.RECORDED, domain)
        self.records = dict(records)

    def _lookup(self, testcase, run):
        outcome = self.records.get((testcase.payload, run.observations))
        if outcome is None:
            return Verdict.inconclusive('no recorded verdict')
        return Verdict(outcome, 'recorded')

    @classmethod
    def load(cls, path, name=None, domain=None):
        """Read ``payload<TAB>observation<TAB>verdict`` lines; ``#`` starts a comment."""
        records = {}
        with open(path, encoding='utf-8') as f:
            for number, line in enumerate(f, 1):
                line = line.split('#', 1)[0].rstrip('\n')
                if not line.strip():
                    continue
                parts = line.split('\t')
                if len(parts) != 3:
                    raise PreconditionError('%s:%d: expected 3 tab-separated fields'
                                            % (path, number))
                payload, observation = parse_tokens(parts[0]), parse_tokens(parts[1])
                records[payload, (observation,)] = Outcome.parse(parts[2])
        return cls(name or str(path), records, domain)


def check_run(run, output_domain=None):
    """Raise unless ticks strictly increase and observations lie in ``output_domain``."""
    previous = None
    for step in run.steps:
        if step.tick < 0 or (previous is not None and step.tick <= previous):
            raise ContextError('run ticks must be non-negative and strictly increasing')
        previous = step.tick
        if output_domain is not None and not output_domain.contains(step.observation):
            raise DomainViolation('observation %r outside %r'
                                  % (step.observation, output_domain.name))


def check_embedding(context, systems):
    if len(systems) != context.arity:
        raise ArityMismatch('%s expects %d systems, got %d'
                            % (context.name, context.arity, len(systems)))
    for system in systems:
        if not context.accepts(system):
            raise AlphabetMismatch('%r cannot be embedded in %r' % (system, context))


def run_experiment(context, systems, testcase, seed):
    """Run one experiment ``C[S1, ..., Sn](t)``.

    Parameters
    ----------
    context : Context
    systems : sequence of SystemUnderTest
        Exactly ``context.arity`` systems whose alphabets match the context.
    testcase : TestCase
    seed : int
        64-bit seed; every random choice of the experiment flows from it.

    Returns
    -------
    Run
        Deterministic for fixed arguments.
    """
    seed = check_seed(seed)
    systems = list(systems)
    check_embedding(context, systems)
    if not context.input_domain.contains(testcase.payload):
        raise DomainViolation('payload of %s outside %r'
                              % (testcase.id, context.input_domain.name))
    run = context.apply(systems, testcase, seed)
    check_run(run, context.output_domain)
    logger.debug('%s on %s: %d steps', context.name, testcase.id, len(run.steps))
    return run


def judge(property, testcase, run):
    """Evaluate ``P(t, r)``."""
    if property.domain is not None and not property.domain.contains(testcase.payload):
        raise DomainViolation('payload of %s outside the domain of %s'
                              % (testcase.id, property.name))
    verdict = property(testcase, run)
    if not isinstance(verdict, Verdict):
        raise TypeError('%s returned %r instead of a Verdict' % (property.name, verdict))
    return verdict
