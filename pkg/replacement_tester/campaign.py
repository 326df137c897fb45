# coding: UTF-8
"""Replacement-testing campaigns.

A campaign generates one test set, runs every configured system tuple on it, judges the runs,
and summarises them: scores and efficiency, replacement and equivalence of the first tuple (the
candidate) against the second (the incumbent), falsification of the classifier, and the
requested audits. Reports are deterministic for a configuration and seed.

Configuration (YAML, ``schema_version: 1``)::

    schema_version: 1
    seed: 7
    context: {kind: traffic, network: crossing, vehicles: 3}
    systems: [cautious, greedy]
    property: collision_free
    generator: {strategy: Exhaustive}
    classifier: {name: scenario-bands}
    audit: {trials: 100, delta: 0.1, requirements: [Monotonicity, Consistency]}
    sweep: [10, 100, 1000]
    output: {directory: out, formats: [json, csv]}
"""
import csv
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
import yaml

from . import registry
from .errors import (
    CampaignAborted, ConfigError, InconsistentEff, ReplacementTesterError, ReportIoError)
from .generators import GeneratorSpec, Strategy, generate
from .metrics import (
    Requirement, ScoreRecord, SimilarityDegree, TestSetSampler, audit_accuracy_trend,
    audit_consistency, audit_monotonicity, audit_reproducibility, audit_union_compatibility,
    success_score)
from .partition import detect_adversarial, falsify_from
from .replacement import equivalence_from, evaluate, is_exhaustive, replacement_from
from .seeding import check_seed, derive_seed


logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CONFIG_KEYS = ('schema_version', 'seed', 'context', 'systems', 'property', 'generator',
               'classifier', 'audit', 'sweep', 'output')
FORMATS = ('json', 'csv', 'plotdata')
MODES = ('run', 'audit', 'replace')
FILE_NAMES = {'json': 'report.json', 'csv': 'cases.csv', 'plotdata': 'plotdata.tsv'}
DEFAULT_AUDIT = {'trials': 100, 'delta': 0.1, 'confidence_level': 0.95,
                 'requirements': [r.value for r in Requirement],
                 'sampler': {'mode': 'set', 'per_class': 1}}


@dataclass
class CampaignConfig:
    seed: int
    context: dict
    systems: list
    property: object
    generator: dict
    classifier: object = None
    audit: Optional[dict] = None
    sweep: Optional[list] = None
    output: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION
    base_dir: str = field(default='.', compare=False)

    @classmethod
    def from_dict(cls, data, base_dir='.'):
        if not isinstance(data, dict):
            raise ConfigError('a campaign configuration must be a mapping')
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError('unknown configuration keys: %s' % ', '.join(sorted(unknown)))
        if data.get('schema_version') != SCHEMA_VERSION:
            raise ConfigError('schema_version must be %d, got %r'
                              % (SCHEMA_VERSION, data.get('schema_version')))
        for key in ('seed', 'context', 'systems', 'property', 'generator'):
            if data.get(key) is None:
                raise ConfigError('the configuration needs %r' % key)
        try:
            check_seed(data['seed'])
        except ReplacementTesterError as e:
            raise ConfigError(str(e))
        systems = data['systems']
        if not isinstance(systems, list) or not 1 <= len(systems) <= 2:
            raise ConfigError('systems must list one or two system tuples')
        formats = (data.get('output') or {}).get('formats', ['json'])
        if set(formats) - set(FORMATS):
            raise ConfigError('unknown report formats %r' % sorted(set(formats) - set(FORMATS)))
        return cls(**dict((k, v) for k, v in data.items() if v is not None), base_dir=base_dir)

    def to_dict(self):
        return dict((f.name, getattr(self, f.name)) for f in fields(self) if f.compare)

    def generator_spec(self):
        spec = dict(self.generator)
        try:
            strategy = Strategy(spec.pop('strategy'))
        except (KeyError, ValueError):
            raise ConfigError('generator.strategy must be one of %s'
                              % ', '.join(s.value for s in Strategy))
        unknown = set(spec) - {'count', 'max_length', 'classifier'}
        if unknown:
            raise ConfigError('unknown generator keys: %s' % ', '.join(sorted(unknown)))
        classifier = spec.get('classifier')
        if classifier is None and self.classifier is not None:
            classifier = self.classifier if isinstance(self.classifier, str) \
                else self.classifier.get('name')
        try:
            return GeneratorSpec(strategy, spec.get('count'), spec.get('max_length'), classifier,
                                 derive_seed(self.seed, 'generator'))
        except ReplacementTesterError as e:
            raise ConfigError(str(e))


def load_config(path, seed=None):
    """Read a campaign configuration; ``seed`` overrides the configured seed."""
    try:
        with open(path, encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError('cannot read %s: %s' % (path, e))
    except yaml.YAMLError as e:
        raise ConfigError('%s is not valid YAML: %s' % (path, e))
    if seed is not None and isinstance(data, dict):
        data['seed'] = seed
    return CampaignConfig.from_dict(data, os.path.dirname(os.path.abspath(path)))


@dataclass
class CampaignReport:
    """Plain-data campaign report; every section is present, absent ones are None."""
    config: dict
    complete: bool = True
    error: Optional[str] = None
    test_set: Optional[dict] = None
    cases: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    eff: Optional[float] = None
    replacement: Optional[dict] = None
    equivalence: Optional[dict] = None
    anomalies: Optional[dict] = None
    audits: Optional[list] = None
    sweep: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + '\n'

    @property
    def failure_found(self):
        """Replacement refuted, or without a comparison a failing case; or a failed audit."""
        if any(not a['passed'] for a in self.audits or ()):
            return True
        if self.replacement is not None:
            return not self.replacement['holds']
        return any(s['n_fail'] for s in self.scores[:1])


def _prefix_sizes(total, sweep):
    if sweep is None:
        sizes = [math.ceil(total * q / 4) for q in range(1, 5)]
    else:
        sizes = [int(s) for s in sweep]
    return sorted(set(s for s in sizes if 0 < s <= total))


def _sweep(testset, experiments, sizes, eff, level):
    rows = []
    for size in sizes:
        prefix = testset.subset(testset.ids[:size], 'prefix%d' % size)
        score = success_score([experiments[i].verdict for i in prefix.ids], level)
        rows.append({'size': size, 'eff': eff(prefix) if eff is not None else None,
                     'score': score.to_record()})
    return rows


def _accuracy_series(rows):
    """The sweep entries along which efficiency strictly increases."""
    series = []
    for row in rows:
        if row['eff'] is None or (series and row['eff'] <= series[-1][0]):
            continue
        series.append((row['eff'], ScoreRecord(**row['score'])))
    return series


def _run_audits(components, testset, spec, sweep_rows, seed, jobs):
    spec = dict(DEFAULT_AUDIT, **spec)
    eff, classifier = components.eff, components.classifier
    if eff is None:
        raise ConfigError('audits need a classifier with a class universe')
    try:
        requirements = [Requirement(r) for r in spec['requirements']]
    except ValueError as e:
        raise ConfigError(str(e))
    sampler_spec = dict(DEFAULT_AUDIT['sampler'], **spec['sampler'])
    sampler = TestSetSampler(testset, classifier, sampler_spec['per_class'], sampler_spec['mode'])
    trials, reports = spec['trials'], []
    for requirement in requirements:
        audit_seed = derive_seed(seed, 'audit', requirement.value)
        if requirement is Requirement.MONOTONICITY:
            report = audit_monotonicity(eff, sampler, trials, audit_seed)
        elif requirement is Requirement.CONSISTENCY:
            report = audit_consistency(eff, classifier, sampler, trials, audit_seed)
        elif requirement is Requirement.REPRODUCIBILITY:
            report = audit_reproducibility(
                eff, components.context, components.tuples[0], components.property, sampler,
                SimilarityDegree(spec['delta']), trials, audit_seed, spec['confidence_level'],
                jobs)
        elif requirement is Requirement.UNION_COMPATIBILITY:
            report = audit_union_compatibility(eff, sampler, trials, audit_seed)
        else:
            report = audit_accuracy_trend(_accuracy_series(sweep_rows))
        reports.append(report.to_record())
    return reports


def _case_records(testset, experiments, classifier):
    records = []
    for case in sorted(testset, key=lambda c: c.id):
        records.append({
            'test_id': case.id,
            'class_key': classifier(case) if classifier is not None else None,
            'length': case.length,
            'verdicts': [e[case.id].verdict.outcome.value for e in experiments],
            'evidence': [e[case.id].verdict.evidence for e in experiments],
            'ticks': [e[case.id].run.last_tick for e in experiments],
        })
    return records


def _anomalies(experiments, classifier, eff):
    anomalies = falsify_from(experiments, classifier)
    record = anomalies.to_record()
    record['inconsistent_pairs'] = None
    if eff is not None and anomalies.anomalies:
        try:
            record = dict(detect_adversarial(anomalies, eff).to_record(), inconsistent_pairs=None)
        except InconsistentEff as e:
            record['inconsistent_pairs'] = [list(p) for p in e.pairs]
    return record


def run_campaign(config, jobs=1, mode='run'):
    """Run the campaign described by ``config``.

    Parameters
    ----------
    config : CampaignConfig
    jobs : int
        Worker threads for experiments; the report does not depend on it.
    mode : {'run', 'audit', 'replace'}
        ``run`` computes every section. ``audit`` only runs the audits (all of them unless
        configured). ``replace`` skips the audits.

    Returns
    -------
    CampaignReport

    Raises
    ------
    ConfigError
        Before any experiment, when a name or parameter does not resolve.
    CampaignAborted
        When an experiment, audit or metric fails; ``report`` holds what was computed.
    """
    if mode not in MODES:
        raise ValueError('unknown campaign mode %r' % (mode,))
    components = registry.resolve(config)
    spec = config.generator_spec()
    classifier = components.classifier
    if spec.classifier_ref is not None and classifier is None:
        raise ConfigError('the %s generator needs the classifier section' % spec.strategy.value)
    report = CampaignReport(config.to_dict())
    seed = derive_seed(config.seed, 'experiments')
    level = (config.audit or {}).get('confidence_level', DEFAULT_AUDIT['confidence_level'])
    try:
        testset = generate(spec, components.context, classifier, components.tuples[0],
                           components.property, jobs=jobs)
        report.test_set = {'name': testset.name, 'size': len(testset),
                           'conclusive_domain': is_exhaustive(components.context, testset)}
        logger.info('generated %d test cases with %s', len(testset), spec.strategy.value)
        experiments = [evaluate(components.context, systems, components.property, testset,
                                seed, jobs) for systems in components.tuples]
        report.timing = {
            'experiments': len(testset) * len(components.tuples),
            'simulated_ticks': sum(e.run.last_tick for done in experiments
                                   for e in done.values())}
        eff = components.eff
        report.sweep = _sweep(testset, experiments[0], _prefix_sizes(len(testset), config.sweep),
                              eff, level)
        if mode != 'audit':
            report.cases = _case_records(testset, experiments, classifier)
            report.scores = [success_score([e.verdict for e in done.values()], level).to_record()
                             for done in experiments]
            report.eff = eff(testset) if eff is not None else None
            if len(experiments) == 2:
                conclusive = is_exhaustive(components.context, testset)
                report.replacement = replacement_from(*experiments, conclusive).to_record()
                report.equivalence = equivalence_from(*experiments, conclusive).to_record()
            if classifier is not None:
                report.anomalies = _anomalies(experiments[0], classifier, eff)
        if mode == 'audit' or (mode == 'run' and config.audit is not None):
            report.audits = _run_audits(components, testset, config.audit or {}, report.sweep,
                                        derive_seed(config.seed, 'audits'), jobs)
    except ConfigError:
        raise
    except (ReplacementTesterError, ArithmeticError, LookupError, TypeError, ValueError) as e:
        report.complete = False
        report.error = '%s: %s' % (type(e).__name__, e)
        logger.error('campaign aborted: %s', report.error)
        raise CampaignAborted(report.error, report) from e
    logger.info('campaign done: %d experiments, failure found: %s',
                report.timing['experiments'], report.failure_found)
    return report


def _write(path, text):
    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise ReportIoError('cannot write %s: %s' % (path, e)) from e


def format_csv(report):
    tuples = len(report.config.get('systems', ()))
    header = ['test_id', 'class_key', 'length']
    header += ['verdict_%d' % (i + 1) for i in range(tuples)]
    header += ['ticks_%d' % (i + 1) for i in range(tuples)]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for case in report.cases:
        writer.writerow([case['test_id'], case['class_key'] or '', case['length']]
                        + case['verdicts'] + case['ticks'])
    return buffer.getvalue()


def plot_rows(report):
    """``(size, eff, score, ci_low, ci_high)`` per sweep entry; missing values are NaN."""
    def number(value):
        return np.nan if value is None else value
    return np.array([[row['size'], number(row['eff']), number(row['score']['point_estimate']),
                      number(row['score']['ci_low']), number(row['score']['ci_high'])]
                     for row in report.sweep], dtype=float).reshape(-1, 5)


def emit_report(report, directory, formats=('json',)):
    """Write the report in each format to ``directory``; returns the written paths."""
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise ReportIoError('cannot create %s: %s' % (directory, e)) from e
    written = []
    for fmt in formats:
        path = os.path.join(directory, FILE_NAMES[fmt])
        if fmt == 'json':
            _write(path, report.to_json())
        elif fmt == 'csv':
            _write(path, format_csv(report))
        else:
            try:
                np.savetxt(path, plot_rows(report), fmt='%.12g', delimiter='\t',
                           header='size\teff\tscore\tci_low\tci_high', comments='')
            except OSError as e:
                raise ReportIoError('cannot write %s: %s' % (path, e)) from e
        written.append(path)
        logger.info('wrote %s', path)
    return written
