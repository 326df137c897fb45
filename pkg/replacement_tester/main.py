# coding: UTF-8
"""Command line entry point.

Example
-------
::

    replacement-tester run --config crossing.yaml --out out --format json --format csv
    replacement-tester replace --config xor.yaml
    replacement-tester simulate --network crossing --scenario collide.scn --policy greedy
    replacement-tester tabulate --config xor.yaml --system xor --out xor.tsv

Exit status is 0 when nothing failed, 1 when a failure was found (a failing case, a refuted
replacement or a failed audit), 2 on configuration errors and 3 on any other error.
"""
import argparse
import json
import logging
import sys

from . import registry
from .campaign import FORMATS, emit_report, load_config, run_campaign
from .core import Outcome, TestCase, judge, plain, run_experiment
from .errors import CampaignAborted, ConfigError, ReplacementTesterError
from .network import load_network
from .policies import builtin_policies
from .seeding import check_seed
from .tables import format_table, tabulate_system
from .traffic import collision_property, load_scenario, make_traffic_context, obeys_signals, \
    trajectories


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE_FOUND = 1
EXIT_CONFIG = 2
EXIT_ERROR = 3


def _campaign(args, mode):
    config = load_config(args.config, args.seed)
    if mode == 'replace' and len(config.systems) != 2:
        raise ConfigError('replace needs exactly two system tuples, got %d' % len(config.systems))
    directory = args.out or config.output.get('directory', 'out')
    formats = args.format or config.output.get('formats', ['json'])
    try:
        report = run_campaign(config, args.jobs, mode)
    except CampaignAborted as e:
        if e.report is not None:
            emit_report(e.report, directory, formats)
        raise
    emit_report(report, directory, formats)
    if mode == 'replace':
        replacement = report.replacement
        print('%s replaces %s: %s%s' % (
            config.systems[0], config.systems[1], replacement['holds'],
            '' if replacement['conclusive'] else ' (not conclusive on this test set)'))
    return EXIT_FAILURE_FOUND if report.failure_found else EXIT_OK


def run(args):
    return _campaign(args, 'run')


def audit(args):
    return _campaign(args, 'audit')


def replace(args):
    return _campaign(args, 'replace')


def simulate(args):
    """Drive one scenario and dump the trajectories with the safety verdicts."""
    network = load_network(registry.data_path(args.network, '.', '.map'))
    scenario = load_scenario(args.scenario)
    policies = builtin_policies()
    names = args.policy or ['cautious']
    if len(names) == 1:
        names = names * scenario.length
    if len(names) != scenario.length:
        raise ConfigError('%d policies for %d vehicles' % (len(names), scenario.length))
    unknown = [name for name in names if name not in policies]
    if unknown:
        raise ConfigError('unknown policies %s' % ', '.join(unknown))
    context = make_traffic_context(network, scenario.length, horizon=scenario.horizon)
    testcase = TestCase.of('scenario', scenario, context.input_domain)
    result = run_experiment(context, [policies[name].fresh() for name in names], testcase,
                            check_seed(args.seed or 0))
    verdicts = dict((prop.name, judge(prop, testcase, result))
                    for prop in (collision_property(), obeys_signals(network)))
    record = {
        'network': network.name,
        'policies': names,
        'scenario': plain(scenario),
        'terminated': result.terminated,
        'trajectories': plain(trajectories(result)),
        'verdicts': plain(verdicts),
    }
    text = json.dumps(record, sort_keys=True, indent=2) + '\n'
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info('wrote %s', args.out)
    else:
        sys.stdout.write(text)
    failed = any(v.outcome is Outcome.FAIL for v in verdicts.values())
    return EXIT_FAILURE_FOUND if failed else EXIT_OK


def tabulate(args):
    """Tabulate a memoryless system of the configured context."""
    config = load_config(args.config, args.seed)
    kind, context, _ = registry.resolve_context(config.context, config.base_dir)
    reference = registry.resolve_system(args.system, kind, context, config.base_dir)
    system = tabulate_system(context, reference, config.seed)
    text = format_table(system.table)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info('wrote %d entries to %s', len(system.table), args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _campaign_options(parser):
    parser.add_argument('--config', required=True, help='campaign configuration (YAML)')
    parser.add_argument('--seed', type=int, help='override the configured seed')
    parser.add_argument('--out', help='report directory')
    parser.add_argument('--format', action='append', choices=FORMATS,
                        help='report format; repeat for several')
    parser.add_argument('--jobs', type=int, default=1, help='worker threads')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='replacement-tester',
        description='Black-box replacement testing of reactive systems.')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    for name, handler, text in (
            ('run', run, 'run a campaign and write its report'),
            ('audit', audit, 'audit the efficiency function of a campaign'),
            ('replace', replace, 'decide whether the first tuple replaces the second')):
        command = commands.add_parser(name, help=text)
        _campaign_options(command)
        command.set_defaults(handler=handler)

    command = commands.add_parser('simulate', help='drive one traffic scenario')
    command.add_argument('--network', required=True, help='map file or bundled map name')
    command.add_argument('--scenario', required=True, help='scenario file')
    command.add_argument('--policy', action='append',
                         help='driver policy, once for all vehicles or once per vehicle')
    command.add_argument('--seed', type=int)
    command.add_argument('--out', help='output file, standard output by default')
    command.set_defaults(handler=simulate)

    command = commands.add_parser('tabulate', help='write the lookup table of a system')
    command.add_argument('--config', required=True)
    command.add_argument('--system', required=True)
    command.add_argument('--seed', type=int)
    command.add_argument('--out', help='table file, standard output by default')
    command.set_defaults(handler=tabulate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(name)s %(levelname)s %(message)s',
                        stream=sys.stderr)
    if getattr(args, 'jobs', 1) < 1:
        logger.error('--jobs must be at least 1')
        return EXIT_CONFIG
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error('configuration error: %s', e)
        return EXIT_CONFIG
    except CampaignAborted as e:
        logger.error('campaign aborted: %s', e)
        return EXIT_ERROR
    except (ReplacementTesterError, OSError, ValueError) as e:
        logger.error('%s: %s', type(e).__name__, e)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
