# coding: UTF-8

import os
import tempfile
from unittest import TestCase

from hypothesis import given, strategies as st

from replacement_tester import core
from replacement_tester.core import FunctionSystem, SingleStepContext, finite_domain
from replacement_tester.errors import ConfigError, InconsistentEff, UnclassifiableCase
from replacement_tester.metrics import EfficiencyFunction, class_coverage_eff
from replacement_tester.partition import (
    EquivalenceClassifier, detect_adversarial, load_classifier_config, metamorphic_falsify,
    partition)
from replacement_tester.replacement import TestSet


NUMBERS = finite_domain('numbers', range(21))


def by_fives():
    return EquivalenceClassifier('fives', lambda t: t.payload // 5, universe=range(4))


class PlantedFixture(object):
    """Identity on 0..19 except 13, which answers 14; class 2 mixes Pass and Fail."""

    def __init__(self):
        self.context = SingleStepContext('identity', NUMBERS, NUMBERS)
        self.system = FunctionSystem('planted', lambda x: 14 if x == 13 else x, NUMBERS, NUMBERS)
        self.testset = TestSet.from_payloads('all', range(20), 'e', NUMBERS)
        self.classifier = by_fives()


class PartitionTests(TestCase):

    def test_classes_in_universe_order(self):
        testset = TestSet.from_payloads('t', [12, 3, 11, 1], 'r')
        report = partition(testset, by_fives())
        self.assertEqual(list(report.classes), ['0', '2'])
        self.assertEqual(report.classes['0'], ('r0000002', 'r0000004'))
        self.assertEqual(report.uncovered, ('1', '3'))

    def test_without_universe_keys_sort(self):
        classifier = EquivalenceClassifier('parity', lambda t: t.payload % 2)
        report = partition(TestSet.from_payloads('t', [3, 2, 5], 'r'), classifier)
        self.assertEqual(list(report.classes), ['0', '1'])
        self.assertEqual(report.uncovered, ())

    def test_unclassifiable(self):
        with self.assertRaises(UnclassifiableCase):
            partition(TestSet.from_payloads('t', [20], 'r'), by_fives())
        broken = EquivalenceClassifier('broken', lambda t: t.payload['key'])
        with self.assertRaises(UnclassifiableCase):
            partition(TestSet.from_payloads('t', [1], 'r'), broken)

    def test_weights_need_known_classes(self):
        with self.assertRaises(ValueError):
            EquivalenceClassifier('w', str, weights={'z': 1}, universe=['a'])
        with self.assertRaises(ValueError):
            EquivalenceClassifier('w', str, weights={'a': 0}, universe=['a'])


class FalsificationTests(TestCase):

    def setUp(self):
        self.fixture = PlantedFixture()

    def falsify(self):
        f = self.fixture
        return metamorphic_falsify(f.context, [f.system], core.output_equals_input(),
                                   f.classifier, f.testset, 0)

    def test_planted_class_is_flagged(self):
        report = self.falsify()
        self.assertEqual([a.class_key for a in report.anomalies], ['2'])
        anomaly = report.anomalies[0]
        self.assertEqual((anomaly.first.payload, anomaly.second.payload), (10, 13))
        self.assertEqual(anomaly.to_record()['second_verdict'], 'FAIL')
        self.assertEqual(len(report.divergent['2']), 5)
        self.assertFalse(report.certified)

    def test_certified_under_class_coverage(self):
        certified = detect_adversarial(self.falsify(), class_coverage_eff(self.fixture.classifier))
        self.assertTrue(certified.certified)
        self.assertEqual([a.class_key for a in certified.anomalies], ['2'])

    def test_inconsistent_eff_lists_pairs(self):
        def by_value(testset):
            return sum(c.payload for c in testset) / 20.0
        with self.assertRaises(InconsistentEff) as caught:
            detect_adversarial(self.falsify(), EfficiencyFunction('value', by_value))
        self.assertEqual([p[:2] for p in caught.exception.pairs], [('e0000011', 'e0000014')])

    def test_consistent_system_has_no_anomaly(self):
        f = self.fixture
        identity = core.identity_system(NUMBERS)
        report = metamorphic_falsify(f.context, [identity], core.output_equals_input(),
                                     f.classifier, f.testset, 0)
        self.assertEqual(report.anomalies, ())

    @given(st.lists(st.booleans(), min_size=20, max_size=20), st.integers(1, 5))
    def test_every_mixed_class_is_found(self, wrong, k):
        f = self.fixture
        system = FunctionSystem('random', lambda x: x + 1 if wrong[x] else x, NUMBERS, NUMBERS)
        classifier = EquivalenceClassifier('mod', lambda t: t.payload % k, universe=range(k))
        report = metamorphic_falsify(f.context, [system], core.output_equals_input(),
                                     classifier, f.testset, 0)
        expected = []
        for key in range(k):
            members = [x for x in range(20) if x % k == key]
            pairs = [(x, y) for x in members for y in members if x < y and wrong[x] != wrong[y]]
            if pairs:
                first = members[0]
                second = next(y for y in members if wrong[y] != wrong[first])
                expected.append((str(key), first, second, len(members)))
        self.assertEqual([(a.class_key, a.first.payload, a.second.payload,
                           len(report.divergent[a.class_key])) for a in report.anomalies],
                         expected)


class ClassifierConfigTests(TestCase):

    def write(self, directory, text):
        path = os.path.join(directory, 'classes.yaml')
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def test_load(self):
        with tempfile.TemporaryDirectory() as directory:
            loaded = load_classifier_config(self.write(
                directory, 'schema_version: 1\nuniverse: [a, b]\nweights: {a: 3}\n'))
        self.assertEqual(loaded, {'universe': ['a', 'b'], 'weights': {'a': 3}})
        configured = by_fives().configured(['0', '1'], {'0': 3})
        self.assertEqual(configured.universe, ('0', '1'))
        self.assertEqual(configured.total_weight(), 4.0)

    def test_unknown_keys(self):
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ConfigError):
                load_classifier_config(self.write(directory, 'classes: [a]\n'))
