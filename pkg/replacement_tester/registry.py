# coding: UTF-8
"""Resolve campaign configuration names to contexts, systems, properties and classifiers.

Usually :func:`resolve` is all you need: it turns the sections of a campaign configuration into
ready components. The context ``kind`` selects the builders:

- ``function`` : :func:`replacement_tester.tables.make_function_context`
- ``dialogue`` : :func:`replacement_tester.tables.make_dialogue_context`
- ``traffic`` : :func:`replacement_tester.traffic.make_traffic_context`

Systems are built-in names or ``table:<path>`` lookup tables. Unknown names raise
:class:`ConfigError`.
"""
import logging
import os
from dataclasses import dataclass
from typing import Optional

from . import tables, traffic
from .core import FunctionSystem, Property, RecordedVerdicts, Verdict, expected_output, \
    output_equals_input
from .errors import ConfigError, ReplacementTesterError
from .metrics import class_coverage_eff
from .network import load_network
from .partition import EquivalenceClassifier, load_classifier_config
from .policies import builtin_policies


logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

FUNCTIONS = {
    'xor': (2, lambda x: x[0] ^ x[1]),
    'and': (2, lambda x: x[0] & x[1]),
    'or': (2, lambda x: x[0] | x[1]),
    'nand': (2, lambda x: 1 - (x[0] & x[1])),
    'first': (2, lambda x: x[0]),
    'zero': (2, lambda x: 0),
    'majority': (3, lambda x: int(sum(x) >= 2)),
    'parity': (3, lambda x: sum(x) % 2),
}

ANSWERS = {
    'echo': lambda q: q,
    'reverse': lambda q: tuple(reversed(q)),
    'first-token': lambda q: q[:1],
    'constant': lambda q: ('ok',),
    'silent': lambda q: tables.NO_ANSWER,
}


@dataclass
class Components:
    """Everything a campaign needs, resolved from its configuration."""
    kind: str
    context: object
    tuples: list
    property: Property
    classifier: Optional[EquivalenceClassifier] = None
    network: object = None

    @property
    def eff(self):
        if self.classifier is None or not self.classifier.universe:
            return None
        return class_coverage_eff(self.classifier)


def data_path(name, base_dir='.', suffix=''):
    """Find ``name`` relative to ``base_dir``, else among the bundled data files."""
    for candidate in (os.path.join(base_dir, name), os.path.join(base_dir, name + suffix),
                      os.path.join(DATA_DIR, name), os.path.join(DATA_DIR, name + suffix)):
        if os.path.isfile(candidate):
            return candidate
    raise ConfigError('no file named %r' % name)


def _require(section, key, where):
    if key not in section:
        raise ConfigError('%s needs %r' % (where, key))
    return section[key]


def resolve_context(spec, base_dir='.'):
    """Build the context; returns ``(kind, context, network or None)``."""
    kind = _require(spec, 'kind', 'context')
    try:
        if kind == 'function':
            arity = FUNCTIONS[spec['function']][0] if 'function' in spec else spec.get('bits', 2)
            return kind, tables.make_function_context(tables.bits_domain(arity), tables.BIT), None
        elif kind == 'dialogue':
            alphabet = [str(a) for a in _require(spec, 'alphabet', 'dialogue context')]
            return kind, tables.make_dialogue_context(
                alphabet, _require(spec, 'max_length', 'dialogue context')), None
        elif kind == 'traffic':
            network = load_network(data_path(_require(spec, 'network', 'traffic context'),
                                             base_dir, '.map'))
            context = traffic.make_traffic_context(
                network, spec.get('vehicles', 1), spec.get('v_max'), spec.get('a_max'),
                spec.get('radius'), spec.get('horizon'))
            return kind, context, network
    except KeyError as e:
        raise ConfigError('unknown name %s in the context section' % e)
    raise ConfigError('unknown context kind %r' % (kind,))


def resolve_system(name, kind, context, base_dir='.'):
    name = str(name)
    if name.startswith('table:'):
        path = data_path(name[len('table:'):], base_dir)
        if kind == 'function':
            table = tables.load_function_table(path, context.input_domain, context.output_domain)
        elif kind == 'dialogue':
            domain = context.input_domain
            table = tables.load_dialogue_table(path, domain.values, domain.max_length)
        else:
            raise ConfigError('%s contexts take no table systems' % kind)
        return tables.TableSystem(name, table, context.stimuli, context.responses)
    if kind == 'function' and name in FUNCTIONS:
        return FunctionSystem(name, FUNCTIONS[name][1], context.stimuli, context.responses)
    if kind == 'dialogue' and name in ANSWERS:
        return FunctionSystem(name, ANSWERS[name], context.stimuli, context.responses)
    if kind == 'traffic' and name in builtin_policies():
        return builtin_policies()[name]
    raise ConfigError('unknown %s system %r' % (kind, name))


def resolve_tuple(entry, kind, context, base_dir='.'):
    """A system tuple: a list of names, or one name repeated to the context arity."""
    names = [entry] * context.arity if isinstance(entry, str) else list(entry)
    if len(names) != context.arity:
        raise ConfigError('%s takes %d systems, the tuple %r has %d'
                          % (context.name, context.arity, entry, len(names)))
    return [resolve_system(name, kind, context, base_dir) for name in names]


def answered():
    def check(testcase, run):
        answer = run.observations[-1] if run.steps else tables.NO_ANSWER
        if answer == tables.NO_ANSWER:
            return Verdict.failed('no answer to %r' % (testcase.payload,))
        return Verdict.passed()
    return Property('answered', check)


def resolve_property(spec, kind, context, network=None, base_dir='.'):
    if isinstance(spec, str):
        spec = {'name': spec}
    name = _require(spec, 'name', 'property')
    if name == 'collision_free' and kind == 'traffic':
        return traffic.collision_property()
    elif name == 'no_congestion' and kind == 'traffic':
        deadline = _require(spec, 'deadline', 'no_congestion')
        if deadline > context.horizon:
            raise ConfigError('deadline %r exceeds the horizon %d' % (deadline, context.horizon))
        return traffic.congestion_property(deadline)
    elif name == 'obeys_signals' and kind == 'traffic':
        return traffic.obeys_signals(network)
    elif name == 'matches' and kind == 'function':
        reference = _require(spec, 'reference', 'matches')
        if reference not in FUNCTIONS:
            raise ConfigError('unknown reference function %r' % (reference,))
        return expected_output(FUNCTIONS[reference][1], 'output = %s' % reference)
    elif name == 'matches' and kind == 'dialogue':
        reference = _require(spec, 'reference', 'matches')
        if reference not in ANSWERS:
            raise ConfigError('unknown reference answer %r' % (reference,))
        return expected_output(ANSWERS[reference], 'answer = %s' % reference)
    elif name == 'answered' and kind == 'dialogue':
        return answered()
    elif name == 'output_equals_input':
        return output_equals_input()
    elif name == 'recorded':
        return RecordedVerdicts.load(data_path(_require(spec, 'path', 'recorded'), base_dir))
    raise ConfigError('unknown %s property %r' % (kind, name))


def _bit_sum(testcase):
    return sum(testcase.payload)


def resolve_classifier(spec, kind, context, network=None, base_dir='.'):
    """Build the classifier, then apply ``universe``/``weights`` overrides and config files."""
    if spec is None:
        return None
    if isinstance(spec, str):
        spec = {'name': spec}
    name = _require(spec, 'name', 'classifier')
    domain = context.input_domain
    if name == 'scenario-bands' and kind == 'traffic':
        bands = traffic.ScenarioBands(tuple(spec.get('density', (0.1, 0.2))),
                                      tuple(spec.get('route', (4.0,))))
        classifier = traffic.scenario_classifier(network, bands)
    elif name == 'parity' and kind == 'function':
        classifier = EquivalenceClassifier(
            'parity', lambda t: 'odd' if _bit_sum(t) % 2 else 'even', universe=('even', 'odd'))
    elif name == 'weight' and kind == 'function':
        width = len(domain.values[0])
        classifier = EquivalenceClassifier('weight', _bit_sum, universe=range(width + 1))
    elif name == 'value' and domain.enumerable:
        classifier = EquivalenceClassifier(
            'value', lambda t: t.payload, universe=[str(v) for v in domain.enumerate()])
    elif name == 'length' and kind == 'dialogue':
        classifier = EquivalenceClassifier(
            'length', lambda t: len(t.payload), universe=range(1, domain.max_length + 1))
    else:
        raise ConfigError('unknown %s classifier %r' % (kind, name))
    overrides = {'universe': spec.get('universe'), 'weights': spec.get('weights')}
    if 'config' in spec:
        loaded = load_classifier_config(data_path(spec['config'], base_dir))
        overrides = dict((k, overrides[k] if overrides[k] is not None else loaded[k])
                         for k in overrides)
    try:
        return classifier.configured(overrides['universe'], overrides['weights'])
    except ValueError as e:
        raise ConfigError('classifier %s: %s' % (name, e))


def resolve(config):
    """Resolve every component a :class:`CampaignConfig` names."""
    base_dir = config.base_dir
    try:
        kind, context, network = resolve_context(config.context, base_dir)
        tuples = [resolve_tuple(entry, kind, context, base_dir) for entry in config.systems]
        prop = resolve_property(config.property, kind, context, network, base_dir)
        classifier = resolve_classifier(config.classifier, kind, context, network, base_dir)
    except ConfigError:
        raise
    except (ReplacementTesterError, OSError, TypeError, ValueError) as e:
        raise ConfigError('cannot resolve the configuration: %s' % e)
    logger.info('resolved %s with %d system tuples, property %r',
                context.name, len(tuples), prop.name)
    return Components(kind, context, tuples, prop, classifier, network)
