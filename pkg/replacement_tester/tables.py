# coding: UTF-8
"""Finite lookup-table systems and their single-step contexts.

A memoryless system on a finite domain is fully described by a table of its answers; so is a
question-answering system whose questions have bounded length. :func:`tabulate_system` builds that
table from any such system by exhaustive experiment, and the result is indistinguishable from the
original under every property.

Table file format
-----------------
One entry per line, input and output separated by a single tab; inside a field tokens are
separated by spaces and integer-looking tokens are read as integers. ``#`` starts a comment::

    # replacement-tester table v1
    0 0<TAB>0
    0 1<TAB>1

A function table maps each input to one output value (a one-token output is a scalar). A dialogue
table maps a question (token sequence) to an answer (token sequence).
"""
import logging
from dataclasses import dataclass

from .core import (
    DomainKind, SingleStepContext, SystemUnderTest, TestCase, check_embedding, finite_domain,
    format_tokens, parse_tokens, sequence_domain, structured_domain)
from .errors import DomainViolation, InfiniteDomain, PreconditionError
from .replacement import case_id
from .seeding import derive_seed


logger = logging.getLogger(__name__)

NO_ANSWER_TOKEN = '<no-answer>'
NO_ANSWER = (NO_ANSWER_TOKEN,)
TABLE_HEADER = '# replacement-tester table v1'


@dataclass(frozen=True)
class FunctionTable:
    """Total map from a finite domain to codomain values."""
    domain: object
    codomain: object
    entries: tuple

    def __post_init__(self):
        entries = dict(self.entries)
        missing = [x for x in self.domain.enumerate() if x not in entries]
        if missing:
            raise PreconditionError('table is not total, missing %r' % (missing[:5],))
        for x, y in entries.items():
            if not self.domain.contains(x):
                raise DomainViolation('table input %r outside %r' % (x, self.domain.name))
            if self.codomain is not None and not self.codomain.contains(y):
                raise DomainViolation('table output %r outside %r' % (y, self.codomain.name))
        object.__setattr__(self, 'entries', tuple((x, entries[x]) for x in self.domain.enumerate()))

    @classmethod
    def of(cls, domain, codomain, mapping):
        return cls(domain, codomain, tuple(dict(mapping).items()))

    @classmethod
    def from_function(cls, domain, codomain, function):
        return cls(domain, codomain, tuple((x, function(x)) for x in domain.enumerate()))

    def lookup(self, x):
        return self.mapping[x]

    @property
    def mapping(self):
        return dict(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class DialogueTable:
    """Question-answer correspondence over questions of length ``1..max_length``.

    Questions without an entry are answered with :data:`NO_ANSWER`.
    """
    alphabet: tuple
    max_length: int
    pairs: tuple

    def __post_init__(self):
        if self.max_length < 1:
            raise PreconditionError('max_length must be >= 1, got %r' % (self.max_length,))
        pairs = dict((tuple(q), tuple(a)) for q, a in self.pairs)
        if len(pairs) != len(self.pairs):
            raise PreconditionError('a question has more than one answer')
        symbols = set(self.alphabet)
        for question in pairs:
            if not question or len(question) > self.max_length:
                raise DomainViolation('question %r longer than %d' % (question, self.max_length))
            if not symbols.issuperset(question):
                raise DomainViolation('question %r uses tokens outside the alphabet' % (question,))
        object.__setattr__(self, 'alphabet', tuple(self.alphabet))
        object.__setattr__(self, 'pairs', tuple(sorted(pairs.items(), key=_question_order)))

    def lookup(self, question):
        return self.mapping.get(tuple(question), NO_ANSWER)

    @property
    def mapping(self):
        return dict(self.pairs)

    def __len__(self):
        return len(self.pairs)


def _question_order(pair):
    return len(pair[0]), tuple(repr(token) for token in pair[0])


class TableSystem(SystemUnderTest):
    """Pure lookup-table system. The table is read-only and shared by copies."""

    def __init__(self, name, table, stimuli, responses):
        super().__init__(name, stimuli, responses)
        self.table = table

    def react(self, stimulus):
        return self.table.lookup(stimulus)


def bits_domain(width):
    """Finite domain of ``width``-bit tuples, e.g. ``bits2 = {(0, 0), (0, 1), (1, 0), (1, 1)}``."""
    return finite_domain('bits%d' % width, _bit_tuples(width))


def _bit_tuples(width):
    if width == 0:
        return [()]
    return [rest + (bit,) for rest in _bit_tuples(width - 1) for bit in (0, 1)]


BIT = finite_domain('bit', (0, 1))


def make_function_context(domain, codomain):
    """Memoryless context for a function on a finite domain."""
    if domain.kind is not DomainKind.FINITE:
        raise InfiniteDomain('function contexts need a finite domain, got %r' % domain.name)
    return SingleStepContext('function:%s->%s' % (domain.name, codomain.name), domain, codomain)


def answer_domain(answer_alphabet=None):
    """Output domain of dialogue contexts: token sequences, optionally over an alphabet."""
    if answer_alphabet is None:
        return structured_domain('answers', check=lambda v: isinstance(v, tuple) and bool(v))
    alphabet = tuple(answer_alphabet)
    if NO_ANSWER_TOKEN not in alphabet:
        alphabet += (NO_ANSWER_TOKEN,)
    return sequence_domain('answers', alphabet)


def make_dialogue_context(question_alphabet, max_length, answer_alphabet=None):
    """Memoryless context asking one question of length ``<= max_length`` per test case."""
    if max_length < 1:
        raise PreconditionError('max_length must be >= 1, got %r' % (max_length,))
    questions = sequence_domain('questions', question_alphabet, max_length)
    return SingleStepContext('dialogue:L%d' % max_length, questions, answer_domain(answer_alphabet))


def tabulate_system(context, reference, seed=0):
    """Replace ``reference`` with the table of its answers on the whole domain.

    Parameters
    ----------
    context : Context
        Memoryless, with an enumerable input domain.
    reference : SystemUnderTest
    seed : int
        Seed of the tabulating experiments; each domain value gets its own sub-seed.

    Returns
    -------
    TableSystem
        A :class:`FunctionTable` system for finite domains, a :class:`DialogueTable` system for
        bounded sequence domains.
    """
    domain = context.input_domain
    if not domain.enumerable:
        raise InfiniteDomain('cannot tabulate over %r' % domain.name)
    if not context.memoryless:
        raise PreconditionError('%s keeps state between stimuli; it cannot be tabulated'
                                % context.name)
    check_embedding(context, [reference])
    answers = []
    for index, payload in enumerate(domain.enumerate(), 1):
        case = TestCase.of(case_id('e', index), payload, domain)
        system = reference.fresh()
        run = context.apply([system], case, derive_seed(seed, case.id))
        answers.append((payload, run.observations[-1] if run.steps else NO_ANSWER))
    if domain.kind is DomainKind.FINITE:
        table = FunctionTable(domain, context.output_domain, tuple(answers))
    else:
        table = DialogueTable(domain.values, domain.max_length, tuple(answers))
    logger.info('tabulated %s: %d entries', reference.name, len(table))
    return TableSystem('table(%s)' % reference.name, table, context.stimuli, context.responses)


def _read_entries(path):
    with open(path, encoding='utf-8') as f:
        for number, line in enumerate(f, 1):
            line = line.split('#', 1)[0].rstrip('\n')
            if not line.strip():
                continue
            fields = line.split('\t')
            if len(fields) != 2:
                raise PreconditionError('%s:%d: expected input<TAB>output' % (path, number))
            yield fields


def load_function_table(path, domain=None, codomain=None):
    """Read a function table; domains default to the values in file order."""
    entries = [(parse_tokens(x), parse_tokens(y)) for x, y in _read_entries(path)]
    if domain is None:
        domain = finite_domain(str(path), [x for x, _ in entries])
    if codomain is None:
        codomain = finite_domain(str(path) + ':out', dict.fromkeys(y for _, y in entries))
    return FunctionTable.of(domain, codomain, entries)


def load_dialogue_table(path, alphabet=None, max_length=None):
    """Read a dialogue table; alphabet and bound default to what the questions use."""
    pairs = [(parse_tokens(q, as_tuple=True), parse_tokens(a, as_tuple=True))
             for q, a in _read_entries(path)]
    if alphabet is None:
        alphabet = tuple(dict.fromkeys(token for q, _ in pairs for token in q))
    if max_length is None:
        max_length = max((len(q) for q, _ in pairs), default=1)
    return DialogueTable(tuple(alphabet), max_length, tuple(pairs))


def format_table(table):
    rows = table.entries if isinstance(table, FunctionTable) else table.pairs
    lines = [TABLE_HEADER] + ['%s\t%s' % (format_tokens(x), format_tokens(y)) for x, y in rows]
    return '\n'.join(lines) + '\n'


def write_table(table, path):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_table(table))
