# coding: UTF-8

import os
import tempfile
from collections import Counter
from unittest import TestCase

import numpy as np
from hypothesis import given, strategies as st

from replacement_tester import core
from replacement_tester.core import (
    FunctionSystem, Outcome, Run, SingleStepContext, Step, Verdict, finite_domain,
    identity_system, sequence_domain, structured_domain)
from replacement_tester.errors import (
    AlphabetMismatch, ArityMismatch, ContextError, DomainViolation, InfiniteDomain,
    PreconditionError)


DIGITS = finite_domain('digits', range(10))


class DomainTests(TestCase):

    def test_finite_domain(self):
        self.assertTrue(DIGITS.enumerable)
        self.assertEqual(DIGITS.size(), 10)
        self.assertEqual(list(DIGITS.enumerate()), list(range(10)))
        self.assertTrue(DIGITS.contains(3))
        self.assertFalse(DIGITS.contains(10))
        self.assertFalse(DIGITS.contains([1]))

    def test_duplicate_values_rejected(self):
        with self.assertRaises(PreconditionError):
            finite_domain('dup', (1, 1))

    def test_bounded_sequences(self):
        domain = sequence_domain('ab', 'ab', 2)
        self.assertEqual(domain.size(), 6)
        self.assertEqual(list(domain.enumerate()),
                         [('a',), ('b',), ('a', 'a'), ('a', 'b'), ('b', 'a'), ('b', 'b')])
        self.assertTrue(domain.contains(('a', 'b')))
        self.assertFalse(domain.contains(('a', 'b', 'a')))
        self.assertFalse(domain.contains(()))
        self.assertEqual(domain.case_length(('a', 'b')), 2)

    def test_unbounded_sequences_do_not_enumerate(self):
        domain = sequence_domain('ab', 'ab')
        self.assertFalse(domain.enumerable)
        self.assertIsNone(domain.size())
        with self.assertRaises(InfiniteDomain):
            domain.enumerate()

    def test_max_length_checked(self):
        with self.assertRaises(PreconditionError):
            sequence_domain('ab', 'ab', 0)
        with self.assertRaises(PreconditionError):
            core.DomainDescriptor('x', core.DomainKind.FINITE, (1,), max_length=2)

    def test_structured_domain_with_enumerator(self):
        domain = structured_domain('evens', check=lambda v: v % 2 == 0,
                                   enumerator=lambda: range(0, 10, 2))
        self.assertTrue(domain.enumerable)
        self.assertEqual(domain.size(), 5)
        self.assertTrue(domain.contains(4))
        self.assertFalse(domain.contains(3))
        plain = structured_domain('any')
        self.assertFalse(plain.enumerable)
        with self.assertRaises(InfiniteDomain):
            plain.sample(None)

    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=4))
    def test_enumeration_counts(self, size, length):
        alphabet = tuple(range(size))
        listed = list(core.iter_sequences(alphabet, length))
        self.assertEqual(len(listed), core.count_sequences(size, length))
        self.assertEqual(len(set(listed)), len(listed))

    def test_sequence_lengths_follow_their_share(self):
        domain = core.sequence_domain('ab', 'ab', 3)
        rng = np.random.default_rng(4)
        lengths = Counter(len(domain.sample(rng)) for _ in range(3000))
        for length, share in ((1, 2 / 14), (2, 4 / 14), (3, 8 / 14)):
            self.assertLess(abs(lengths[length] / 3000 - share), 0.05)

    @given(st.integers(min_value=64, max_value=200), st.integers(min_value=0, max_value=2 ** 32))
    def test_sequences_beyond_int64_are_sampled(self, max_length, seed):
        domain = core.sequence_domain('bits', (0, 1), max_length)
        self.assertGreater(domain.size(), 2 ** 63)
        value = domain.sample(np.random.default_rng(seed))
        self.assertTrue(domain.contains(value))


class ExperimentTests(TestCase):

    def setUp(self):
        self.context = SingleStepContext('identity', DIGITS, DIGITS)

    def test_run_experiment(self):
        case = core.TestCase('t7', 7)
        run = core.run_experiment(self.context, [identity_system(DIGITS)], case, seed=5)
        self.assertEqual(run.observations, (7,))
        self.assertEqual(run.seed, 5)
        self.assertTrue(run.terminated)
        self.assertEqual(core.judge(core.output_equals_input(), case, run).outcome, Outcome.PASS)

    def test_arity_mismatch(self):
        with self.assertRaises(ArityMismatch):
            core.run_experiment(self.context, [], core.TestCase('t', 1), 0)

    def test_alphabet_mismatch(self):
        other = finite_domain('letters', 'abc')
        system = FunctionSystem('f', lambda x: x, other, other)
        with self.assertRaises(AlphabetMismatch):
            core.run_experiment(self.context, [system], core.TestCase('t', 1), 0)

    def test_payload_outside_domain(self):
        with self.assertRaises(DomainViolation):
            core.run_experiment(self.context, [identity_system(DIGITS)], core.TestCase('t', 11), 0)

    def test_observation_outside_domain(self):
        system = FunctionSystem('plus', lambda x: x + 1, DIGITS, DIGITS)
        with self.assertRaises(DomainViolation):
            core.run_experiment(self.context, [system], core.TestCase('t', 9), 0)

    def test_ticks_must_increase(self):
        run = Run((Step(1, 0), Step(1, 0)), True, 0)
        with self.assertRaises(ContextError):
            core.check_run(run)

    def test_judge_requires_verdict(self):
        run = Run((Step(0, 1),), True, 0)
        prop = core.Property('broken', lambda t, r: True)
        with self.assertRaises(TypeError):
            core.judge(prop, core.TestCase('t', 1), run)

    def test_expected_output(self):
        prop = core.expected_output(lambda x: x % 3)
        run = Run((Step(0, 2),), True, 0)
        self.assertEqual(prop(core.TestCase('t', 5), run).outcome, Outcome.PASS)
        verdict = prop(core.TestCase('t', 4), run)
        self.assertEqual(verdict.outcome, Outcome.FAIL)
        self.assertIn('expected 1', verdict.evidence)

    def test_serialize_run_is_stable(self):
        run = Run((Step(0, (1, 2)), Step(3, 'x')), False, 9)
        text = core.serialize_run(run)
        self.assertEqual(text, core.serialize_run(Run(run.steps, False, 9)))
        self.assertEqual(text.splitlines()[-1], '{"seed": 9, "terminated": false}')

    def test_verdict(self):
        self.assertTrue(Verdict.passed().conclusive)
        self.assertFalse(Verdict.inconclusive('why').conclusive)
        self.assertEqual(Outcome.parse(' fail '), Outcome.FAIL)
        with self.assertRaises(ValueError):
            Outcome.parse('maybe')


class RecordedVerdictsTests(TestCase):

    def test_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'verdicts.tsv')
            with open(path, 'w', encoding='utf-8') as f:
                f.write('# payload, observation, verdict\n1\t1\tPASS\n2\t3\tFAIL\n')
            prop = core.RecordedVerdicts.load(path)
        self.assertEqual(prop.oracle_kind, core.OracleKind.RECORDED)
        self.assertEqual(prop(core.TestCase('a', 1), Run((Step(0, 1),), True, 0)).outcome,
                         Outcome.PASS)
        self.assertEqual(prop(core.TestCase('b', 2), Run((Step(0, 3),), True, 0)).outcome,
                         Outcome.FAIL)
        self.assertEqual(prop(core.TestCase('c', 2), Run((Step(0, 2),), True, 0)).outcome,
                         Outcome.INCONCLUSIVE)

    def test_malformed_line(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'verdicts.tsv')
            with open(path, 'w', encoding='utf-8') as f:
                f.write('1\tPASS\n')
            with self.assertRaises(PreconditionError):
                core.RecordedVerdicts.load(path)

    def test_written_outcomes_load_back(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'verdicts.tsv')
            with open(path, 'w', encoding='utf-8') as f:
                for payload, outcome in ((1, Outcome.PASS), (2, Outcome.FAIL)):
                    f.write('%s\t%s\t%s\n' % (core.format_tokens(payload),
                                              core.format_tokens(payload), outcome.value))
            prop = core.RecordedVerdicts.load(path)
        self.assertEqual(Outcome.PASS.value, 'PASS')
        self.assertEqual(prop(core.TestCase('a', 1), Run((Step(0, 1),), True, 0)).outcome,
                         Outcome.PASS)
        self.assertEqual(prop(core.TestCase('b', 2), Run((Step(0, 2),), True, 0)).outcome,
                         Outcome.FAIL)
