# coding: UTF-8
"""Observational equivalence of test cases.

Two test cases are equivalent for ``P`` when ``P`` cannot tell their runs apart. That relation is
not computable for black boxes, so it is approximated by a user-supplied
:class:`EquivalenceClassifier`. The classifier is used two ways: to partition test sets (one
representative per class suffices when ``P`` holds), and as a hypothesis that
:func:`metamorphic_falsify` tries to refute. A refutation inside one class whose members are
equally efficient is an adversarial example.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError, InconsistentEff, UnclassifiableCase
from .replacement import TestSet, evaluate


logger = logging.getLogger(__name__)


class EquivalenceClassifier:
    """Approximation of ``≈P`` as a class key per test case.

    Parameters
    ----------
    name : str
    classify : callable
        ``classify(testcase) -> key``. Keys are converted to ``str``.
    weights : dict, optional
        Positive significance weight per class key. Missing keys weigh 1.
    universe : sequence of str, optional
        Every class the domain can populate, in a fixed order.
    """

    def __init__(self, name, classify, weights=None, universe=None):
        self.name = name
        self.classify = classify
        self.universe = tuple(str(k) for k in universe) if universe is not None else None
        self.weights = dict((str(k), float(w)) for k, w in (weights or {}).items())
        for key, weight in self.weights.items():
            if not weight > 0:
                raise ValueError('weight of class %r must be positive' % key)
            if self.universe is not None and key not in self.universe:
                raise ValueError('weighted class %r is not in the universe' % key)

    def __call__(self, testcase):
        try:
            key = str(self.classify(testcase))
        except (KeyError, IndexError, TypeError, ValueError, AttributeError) as e:
            raise UnclassifiableCase('%s cannot classify %s: %s'
                                     % (self.name, testcase.id, e)) from e
        if self.universe is not None and key not in self.universe:
            raise UnclassifiableCase('%s put %s in class %r outside its universe'
                                     % (self.name, testcase.id, key))
        return key

    def weight(self, key):
        return self.weights.get(key, 1.0)

    def total_weight(self):
        return sum(self.weight(k) for k in self.universe)

    def configured(self, universe=None, weights=None):
        """Copy with the universe and/or weights replaced."""
        return EquivalenceClassifier(
            self.name, self.classify,
            weights if weights is not None else self.weights,
            universe if universe is not None else self.universe)

    def __repr__(self):
        return 'EquivalenceClassifier(%r)' % self.name


def load_classifier_config(path):
    """Read ``universe`` and ``weights`` for a classifier from a YAML file.

    ::

        schema_version: 1
        universe: [low/short, low/long]
        weights: {low/short: 3, low/long: 1}
    """
    with open(path, encoding='utf-8') as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError('%s: expected a mapping' % path)
    unknown = set(data) - {'schema_version', 'universe', 'weights'}
    if unknown:
        raise ConfigError('%s: unknown keys %s' % (path, ', '.join(sorted(unknown))))
    if data.get('schema_version', 1) != 1:
        raise ConfigError('%s: unsupported schema_version %r' % (path, data['schema_version']))
    universe = data.get('universe')
    return {
        'universe': [str(k) for k in universe] if universe is not None else None,
        'weights': dict((str(k), v) for k, v in (data.get('weights') or {}).items()),
    }


@dataclass(frozen=True)
class PartitionReport:
    classes: dict
    uncovered: tuple

    def to_record(self):
        return {'classes': dict((k, list(v)) for k, v in self.classes.items()),
                'uncovered': list(self.uncovered)}


def class_keys(testset, classifier):
    return dict((case.id, classifier(case)) for case in testset)


def partition(testset, classifier):
    """Split ``testset`` into classes of ``classifier``.

    Classes follow universe order (sorted keys without a universe); ids inside a class are sorted.
    """
    members = {}
    for case in testset:
        members.setdefault(classifier(case), []).append(case.id)
    if classifier.universe is not None:
        order = [k for k in classifier.universe if k in members]
        uncovered = tuple(k for k in classifier.universe if k not in members)
    else:
        order, uncovered = sorted(members), ()
    classes = OrderedDict((k, tuple(sorted(members[k]))) for k in order)
    return PartitionReport(classes, uncovered)


@dataclass(frozen=True)
class Anomaly:
    """Two cases of one class that ``P`` judged differently."""
    class_key: str
    first: object
    second: object
    first_verdict: object
    second_verdict: object

    def to_record(self):
        return {
            'class_key': self.class_key,
            'first': self.first.id,
            'second': self.second.id,
            'first_verdict': self.first_verdict.outcome.value,
            'second_verdict': self.second_verdict.outcome.value,
        }


@dataclass(frozen=True)
class AnomalyReport:
    anomalies: tuple
    divergent: dict = field(default_factory=dict)
    certified: bool = False

    def to_record(self):
        return {
            'anomalies': [a.to_record() for a in self.anomalies],
            'divergent': dict((k, [list(p) for p in v]) for k, v in self.divergent.items()),
            'certified': self.certified,
        }


def falsify_from(experiments, classifier):
    """Scan evaluated experiments (see :func:`replacement.evaluate`) for mixed classes."""
    groups = OrderedDict()
    for test_id in sorted(experiments):
        experiment = experiments[test_id]
        groups.setdefault(classifier(experiment.case), []).append(experiment)
    keys = [k for k in (classifier.universe or sorted(groups)) if k in groups]
    anomalies, divergent = [], OrderedDict()
    for key in keys:
        judged = [e for e in groups[key] if e.verdict.conclusive]
        if len(set(e.verdict.outcome for e in judged)) < 2:
            continue
        first = judged[0]
        second = next(e for e in judged if e.verdict.outcome is not first.verdict.outcome)
        anomalies.append(Anomaly(key, first.case, second.case, first.verdict, second.verdict))
        divergent[key] = tuple((e.case.id, e.verdict.outcome.value) for e in judged)
    if anomalies:
        logger.info('%d of %d classes of %s mix Pass and Fail',
                    len(anomalies), len(keys), classifier.name)
    return AnomalyReport(tuple(anomalies), divergent)


def metamorphic_falsify(context, systems, property, classifier, testset, seed, jobs=1):
    """Try to falsify the classifier as an approximation of ``≈P``.

    Every test case is run and judged. For each class holding both Pass and Fail verdicts the
    report certifies one pair: the first judged case by id and the first case after it with the
    other verdict. ``divergent`` lists every judged case of every mixed class. Inconclusive
    verdicts are ignored.
    """
    experiments = evaluate(context, systems, property, testset, seed, jobs)
    return falsify_from(experiments, classifier)


def detect_adversarial(anomalies, eff):
    """Keep the anomalies whose two cases are equally efficient singletons.

    Such pairs are adversarial examples: ``t1 ≈P t2`` and ``eff({t1}) = eff({t2})`` while the
    verdicts differ.

    Raises
    ------
    InconsistentEff
        When ``eff`` assigns different values to the singletons of some anomaly pair. Every
        offending pair is listed on the exception.
    """
    retained, inconsistent = [], []
    for anomaly in anomalies.anomalies:
        first = eff(TestSet('singleton', (anomaly.first,)))
        second = eff(TestSet('singleton', (anomaly.second,)))
        if first == second:
            retained.append(anomaly)
        else:
            inconsistent.append((anomaly.first.id, anomaly.second.id, first, second))
    if inconsistent:
        logger.warning('%s distinguishes %d within-class pairs', eff.name, len(inconsistent))
        raise InconsistentEff('%s is inconsistent with the classifier on %s'
                              % (eff.name, ', '.join('(%s, %s)' % p[:2] for p in inconsistent)),
                              inconsistent)
    return AnomalyReport(tuple(retained), anomalies.divergent, certified=True)

