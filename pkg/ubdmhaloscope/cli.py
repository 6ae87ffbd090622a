"""Command-line entry point: ``ubdmhaloscope <command> [options]``."""
import argparse
import json
import logging
import sys

from .base import ConfigError, DomainError, NumericalError, TruncationError, UBDMError, UsageError
from .commands import command_mapping, run_command
from .config import load_config, resolve_config_path
from . import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TRUNCATION = 4

commands = sorted(command_mapping) + ['sweep']


def _sweep_value(text):
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f'{text!r} is not a number')
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise argparse.ArgumentTypeError(f'{text!r} is not a number')
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog='ubdmhaloscope',
                                     description='Open-quantum-system models of UBDM haloscopes.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('command', choices=commands)
    parser.add_argument('--config', default=None,
                        help='JSON run configuration (default: $UBDMHALOSCOPE_CONFIG if set).')
    parser.add_argument('--preset', action='append', default=[],
                        help='Preset name or path, applied before --config. May repeat.')
    parser.add_argument('--out', default='.', help='Output directory.')
    parser.add_argument('--seed', type=int, default=None, help='Override numerics.seed.')
    parser.add_argument('--workers', type=int, default=None, help='Override numerics.workers.')
    parser.add_argument('--axis', default=None, help='Sweep axis as a dotted key, e.g. axion.mass_eV.')
    parser.add_argument('--values', nargs='*', type=_sweep_value, default=None, help='Sweep values.')
    parser.add_argument('--sweep-command', default=None, help='Command run at each sweep point.')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    return parser


def _overrides(args):
    overrides = {}
    numerics = {}
    if args.seed is not None:
        numerics['seed'] = args.seed
    if args.workers is not None:
        numerics['workers'] = args.workers
    if numerics:
        overrides['numerics'] = numerics
    sweep = {}
    if args.axis is not None:
        sweep['axis'] = args.axis
    if args.values is not None:
        sweep['values'] = args.values
    if args.sweep_command is not None:
        sweep['command'] = args.sweep_command
    if sweep:
        overrides['sweep'] = sweep
    return overrides


def exit_code(error):
    if isinstance(error, TruncationError):
        return EXIT_TRUNCATION
    if isinstance(error, (NumericalError, DomainError)):
        return EXIT_NUMERICAL
    if isinstance(error, (ConfigError, UsageError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s: %(message)s')

    config_path = resolve_config_path(args.config)
    try:
        config = load_config(config_path, presets=args.preset, overrides=_overrides(args))
        summary = run_command(args.command, config, args.out)
    except UBDMError as e:
        where = f' (config: {config_path})' if config_path else ''
        logger.error('%s: %s%s', type(e).__name__, e, where)
        print(f'error: {e}{where}', file=sys.stderr)
        return exit_code(e)
    logger.info('summary: %s', summary)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
