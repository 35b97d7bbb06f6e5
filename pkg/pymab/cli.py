"""The ``pymab`` command line.

Subcommands::

    pymab simulate --config <path> --out <dir> [--replications N] [--workers W]
    pymab replay --log <path> --out <dir> [--config <path>]
    pymab analyze --summary <path> [--family-alpha A]
    pymab validate --config <path>

Exit status is 0 on success, 1 on invalid input (usage errors included) and 2 on I/O
failure. Without ``--config``, ``replay`` uses the ``config_used.yaml`` written next to the
log, if any.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .analysis import pairwise_tests
from .config_file import dump_config, parse_config
from .engine import replay, run_experiment, run_replications
from .exceptions import MABException, MABOutputException, MABValidationException
from .logs import read_log
from .model import PolicyId
from .reports import format_summary_table, format_wald_table, read_summary, write_replications, \
    write_trace

_log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2

LOG_FORMAT = '%(levelname)8s  %(asctime)s  [%(module)s|%(lineno)d]  %(message)s'

def _simulate(args):
    parsed = parse_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    dump_config(parsed.config, parsed.environment, os.path.join(args.out, 'config_used.yaml'))

    if args.replications <= 1:
        trace = run_experiment(parsed.config, parsed.environment)
        write_trace(trace, args.out)
    else:
        results = run_replications(
            parsed.config, parsed.environment, args.replications, workers=args.workers
        )
        write_replications(results, args.out)

    print("wrote {}".format(args.out))

    return EXIT_OK

def _replay_config(args):
    if args.config:
        return parse_config(args.config).config

    # simulate writes the schedule next to its log
    used = os.path.join(os.path.dirname(os.path.abspath(args.log)), 'config_used.yaml')
    if os.path.exists(used):
        _log.debug("Replaying against %s", used)
        return parse_config(used).config

    return None

def _replay(args):
    trace = replay(read_log(args.log), _replay_config(args))
    write_trace(trace, args.out)

    print("wrote {}".format(args.out))

    return EXIT_OK

def _analyze(args):
    summaries = read_summary(args.summary)
    tests = {
        policy: pairwise_tests(summaries[policy], args.family_alpha)
        for policy in PolicyId if policy in summaries
    }

    print(format_summary_table(summaries))
    print()
    print(format_wald_table(tests))

    return EXIT_OK

def _validate(args):
    parsed = parse_config(args.config)

    print("valid: {} arms, {} weeks, seed {}".format(
        parsed.config.arms, parsed.config.horizon, parsed.config.seed))

    return EXIT_OK

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")

    return value

def build_parser():
    """Build the argument parser."""

    parser = argparse.ArgumentParser(
        prog='pymab', description="Batched UR / TS / TS† bandit experiments."
    )
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('--verbose', action='store_true', help="debug logging on stderr")

    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    simulate = commands.add_parser('simulate', help="simulate an experiment")
    simulate.add_argument('--config', required=True)
    simulate.add_argument('--out', required=True)
    simulate.add_argument('--replications', type=_positive_int, default=1)
    simulate.add_argument('--workers', type=_positive_int, default=1)
    simulate.set_defaults(handler=_simulate)

    replay_cmd = commands.add_parser('replay', help="replay an observation log")
    replay_cmd.add_argument('--log', required=True)
    replay_cmd.add_argument('--out', required=True)
    replay_cmd.add_argument('--config', help="schedule to replay against (default: config_used.yaml beside the log, else inferred)")
    replay_cmd.set_defaults(handler=_replay)

    analyze = commands.add_parser('analyze', help="Wald tests on a Table-1 shaped summary")
    analyze.add_argument('--summary', required=True)
    analyze.add_argument('--family-alpha', type=float, default=0.05)
    analyze.set_defaults(handler=_analyze)

    validate = commands.add_parser('validate', help="check a configuration file")
    validate.add_argument('--config', required=True)
    validate.set_defaults(handler=_validate)

    return parser

def _configure_logging(verbose):
    if not verbose:
        return

    log = logging.getLogger('pymab')
    log.setLevel(logging.DEBUG)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(handler)

def main(argv=None):
    """Run the command line.

    Args:
        argv (list): Arguments without the program name; ``sys.argv[1:]`` when None.

    Returns:
        int: The exit status.
    """

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as err:
        # usage errors; --help and --version exit 0
        return EXIT_OK if not err.code else EXIT_INVALID

    _configure_logging(args.verbose)

    try:
        return args.handler(args)

    except MABValidationException as err:
        for violation in err.violations:
            print("error: {}".format(violation), file=sys.stderr)
        return EXIT_INVALID

    except (OSError, MABOutputException) as err:
        print("error: {}".format(err), file=sys.stderr)
        return EXIT_IO

    except MABException as err:
        print("error: {}: {}".format(err.code, err.message), file=sys.stderr)
        return EXIT_INVALID
