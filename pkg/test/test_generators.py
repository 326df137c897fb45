# coding: UTF-8

from collections import Counter
from unittest import TestCase

from hypothesis import given, strategies as st

from replacement_tester import core, generators
from replacement_tester.core import FunctionSystem, SingleStepContext, finite_domain
from replacement_tester.errors import (
    EmptyClass, ExplosionGuard, InfiniteDomain, InvalidGeneratorSpec, MissingUniverse,
    PreconditionError)
from replacement_tester.generators import GeneratorSpec, Strategy, generate
from replacement_tester.partition import EquivalenceClassifier
from replacement_tester.tables import bits_domain


NUMBERS = finite_domain('numbers', range(21))


def by_fives(weights=None):
    return EquivalenceClassifier('fives', lambda t: t.payload // 5, weights, range(4))


class ExhaustiveTests(TestCase):

    def test_every_value_once(self):
        testset = generators.generate_exhaustive(bits_domain(2))
        self.assertEqual(testset.payloads(), ((0, 0), (0, 1), (1, 0), (1, 1)))
        self.assertEqual(testset.ids, ('e0000001', 'e0000002', 'e0000003', 'e0000004'))

    def test_guards(self):
        with self.assertRaises(InfiniteDomain):
            generators.generate_exhaustive(core.sequence_domain('ab', 'ab'))
        with self.assertRaises(ExplosionGuard):
            generators.generate_exhaustive(bits_domain(4), guard=10)


class RandomTests(TestCase):

    def test_reproducible(self):
        first = generators.generate_random(NUMBERS, 30, 5)
        self.assertEqual(first, generators.generate_random(NUMBERS, 30, 5))
        self.assertNotEqual(first.payloads(), generators.generate_random(NUMBERS, 30, 6).payloads())
        self.assertEqual(len(first), 30)
        self.assertEqual(first.ids[-1], 'r0000030')

    def test_count_checked(self):
        with self.assertRaises(PreconditionError):
            generators.generate_random(NUMBERS, 0, 5)

    def test_bounded_sequence_domain_stays_in_domain(self):
        domain = core.sequence_domain('ab', 'ab', 3)
        testset = generators.generate_random(domain, 50, 1)
        self.assertTrue(all(domain.contains(p) for p in testset.payloads()))

    def test_long_sequences(self):
        testset = generators.generate_bounded_sequences((0, 1), 70, count=20, seed=3)
        self.assertEqual(len(testset), 20)
        self.assertTrue(all(1 <= len(p) <= 70 for p in testset.payloads()))
        self.assertEqual(testset, generators.generate_bounded_sequences((0, 1), 70, 20, 3))


class StratifiedTests(TestCase):

    @given(st.integers(min_value=0, max_value=200),
           st.lists(st.integers(min_value=1, max_value=9), min_size=1, max_size=8))
    def test_apportion_hands_out_every_seat(self, count, weights):
        seats = generators.apportion(count, weights)
        self.assertEqual(sum(seats), count)
        total = float(sum(weights))
        for seat, weight in zip(seats, weights):
            self.assertLess(abs(seat - count * weight / total), 1)

    def test_quotas_follow_weights(self):
        quotas = generators.stratified_quotas(12, by_fives({'0': 3, '1': 1, '2': 1, '3': 1}))
        self.assertEqual(quotas, [6, 2, 2, 2])

    def test_every_class_gets_one(self):
        quotas = generators.stratified_quotas(4, by_fives({'0': 97, '1': 1, '2': 1, '3': 1}))
        self.assertEqual(quotas, [1, 1, 1, 1])

    def test_stratified_covers_classes(self):
        domain = finite_domain('n20', range(20))
        testset = generators.generate_stratified(domain, by_fives(), 60, 3)
        counts = Counter(t.payload // 5 for t in testset)
        self.assertEqual(counts, Counter({0: 15, 1: 15, 2: 15, 3: 15}))
        self.assertTrue(testset.ids[0].startswith('s'))

    def test_rejection_sampling_for_structured_domains(self):
        domain = core.structured_domain('draws', sampler=lambda rng: int(rng.integers(20)))
        testset = generators.generate_stratified(domain, by_fives(), 8, 1)
        self.assertEqual(Counter(t.payload // 5 for t in testset), Counter({0: 2, 1: 2, 2: 2, 3: 2}))

    def test_empty_class(self):
        classifier = EquivalenceClassifier('fives', lambda t: t.payload // 5, universe=range(5))
        with self.assertRaises(EmptyClass):
            generators.generate_stratified(finite_domain('n', range(20)), classifier, 10, 1)

    def test_preconditions(self):
        with self.assertRaises(MissingUniverse):
            generators.generate_stratified(NUMBERS, EquivalenceClassifier('open', str), 5, 1)
        with self.assertRaises(PreconditionError):
            generators.generate_stratified(NUMBERS, by_fives(), 3, 1)


class AdaptiveTests(TestCase):

    def test_budget_goes_to_failing_class(self):
        domain = finite_domain('n20', range(20))
        outputs = finite_domain('n21', range(21))
        context = SingleStepContext('f', domain, outputs)
        system = FunctionSystem('class-2-wrong', lambda x: x + 1 if x // 5 == 2 else x,
                                domain, outputs)
        testset = generators.generate_adaptive(context, [system], core.output_equals_input(),
                                               by_fives(), 20, 4)
        self.assertEqual(len(testset), 20)
        self.assertEqual(testset.ids[-1], 'a0000020')
        counts = Counter(t.payload // 5 for t in testset)
        self.assertEqual(counts[2], 17)
        self.assertEqual(counts[0], 1)

    def test_small_budget(self):
        domain = finite_domain('n20', range(20))
        context = SingleStepContext('f', domain, domain)
        testset = generators.generate_adaptive(
            context, [core.identity_system(domain)], core.output_equals_input(),
            by_fives({'3': 5}), 1, 4)
        self.assertEqual([t.payload // 5 for t in testset], [3])


class BoundedSequenceTests(TestCase):

    def test_all_sequences(self):
        testset = generators.generate_bounded_sequences('abc', 3)
        self.assertEqual(len(testset), 3 + 9 + 27)
        self.assertEqual(testset.payloads()[:4], (('a',), ('b',), ('c',), ('a', 'a')))
        self.assertEqual(testset.cases[-1].length, 3)

    def test_sampled(self):
        testset = generators.generate_bounded_sequences('ab', 10, count=25, seed=2)
        self.assertEqual(len(testset), 25)
        self.assertTrue(all(1 <= len(p) <= 10 for p in testset.payloads()))
        self.assertEqual(testset, generators.generate_bounded_sequences('ab', 10, 25, 2))

    def test_guard(self):
        with self.assertRaises(ExplosionGuard):
            generators.generate_bounded_sequences('ab', 30)


class DispatchTests(TestCase):

    def test_spec_validation(self):
        with self.assertRaises(InvalidGeneratorSpec):
            GeneratorSpec(Strategy.RANDOM)
        with self.assertRaises(InvalidGeneratorSpec):
            GeneratorSpec(Strategy.STRATIFIED, count=4)
        with self.assertRaises(InvalidGeneratorSpec):
            GeneratorSpec(Strategy.BOUNDED_SEQUENCE)
        with self.assertRaises(InvalidGeneratorSpec):
            GeneratorSpec(Strategy.RANDOM, count=0)

    def test_generate(self):
        context = SingleStepContext('q', core.sequence_domain('q', 'xy', 2), NUMBERS)
        testset = generate(GeneratorSpec(Strategy.BOUNDED_SEQUENCE, max_length=2), context)
        self.assertEqual(len(testset), 6)
        testset = generate(GeneratorSpec(Strategy.EXHAUSTIVE), context)
        self.assertEqual(len(testset), 6)
        with self.assertRaises(InvalidGeneratorSpec):
            generate(GeneratorSpec(Strategy.ADAPTIVE, count=3, classifier_ref='x'), context,
                     by_fives())
