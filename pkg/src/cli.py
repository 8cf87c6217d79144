"""
Command-line front end.

    hdc run <experiment> [--config exp.ini] [--param key=value ...] [--<key> <value> ...]
    hdc list
    hdc codebook gen --kind bipolar --m 1000 --d 8192 --seed 1 --out cb.hdc
    hdc codebook stats cb.hdc
    hdc ingest data.csv --label-column label --normalize minmax

This is the only place where exceptions become exit codes: 0 when every
check passed, 1 when an experiment check failed, 2 for schema and input
errors, 3 when a resource cap is exceeded.
"""
# Standard library imports
import argparse
import logging
import sys
from configparser import ConfigParser, Error as ConfigParserError
from typing import Dict, List, Optional, Sequence

# Local application imports
from . import codebook as cbmod
from .config import config
from .constants import CodebookKind, ConfigError, ExitCode, HDCError, OutputFormat, ResourceLimitError
from .datasets import NORMALIZE_MINMAX, NORMALIZE_NONE, ingest_csv
from .experiments import ALIASES, REGISTRY, RunContext, run_experiment
from .persistence import load_codebook, save_codebook
from .reporting import format_report, write_report

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
GENERATED_KINDS = (CodebookKind.BIPOLAR, CodebookKind.GAUSSIAN, CodebookKind.SPARSE,
                   CodebookKind.ORTHOGONAL)


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hdc', allow_abbrev=False,
                                     description='Hyperdimensional computing experiment harness')
    parser.add_argument('-v', '--verbose', action='store_true', help='Mirror log records to stderr')
    parser.add_argument('--settings', default=None, help='Settings file (default: hdc.ini)')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    run = commands.add_parser('run', allow_abbrev=False, help='Run one experiment',
                              description='Run one experiment. Parameters not listed here are '
                                          'passed as --<name> <value> or --param name=value.')
    run.add_argument('experiment', nargs='?', help="Experiment name (see 'hdc list')")
    run.add_argument('--config', help='Experiment INI file with [experiment] and [parameters]')
    run.add_argument('--param', action='append', default=[], metavar='KEY=VALUE',
                     help='Set one parameter (repeatable)')
    run.add_argument('--seed', type=int, help='Base seed')
    run.add_argument('--trials', type=int, help='Number of trials')

    output = run.add_argument_group('Output', 'Where and how reports are written.')
    output.add_argument('--out', help='Report directory')
    output.add_argument('--format', choices=(OutputFormat.CSV, OutputFormat.JSONL),
                        help='Per-trial file format')
    output.add_argument('--no-banner', action='store_true',
                        help='Omit the parameter/timestamp line so reruns diff cleanly')

    execution = run.add_argument_group('Execution')
    execution.add_argument('--workers', type=int, help='Worker threads for trials')
    execution.add_argument('--progress', action='store_true', help='Show a progress bar')
    execution.add_argument('--allow-large', action='store_true', help='Lift the resource caps')

    data = run.add_argument_group('Data', 'Run on an ingested CSV instead of synthetic inputs.')
    data.add_argument('--data', help='CSV file')
    data.add_argument('--label-column', help='Label column (name or 0-based position)')
    data.add_argument('--normalize', choices=(NORMALIZE_NONE, NORMALIZE_MINMAX),
                      default=NORMALIZE_NONE, help='Feature normalization')

    commands.add_parser('list', help='List experiments and their parameters')

    cb = commands.add_parser('codebook', help='Generate or inspect codebook files')
    cb_commands = cb.add_subparsers(dest='codebook_command', metavar='action')
    cb_commands.required = True
    gen = cb_commands.add_parser('gen', allow_abbrev=False, help='Generate a codebook file')
    gen.add_argument('--kind', choices=GENERATED_KINDS, default=CodebookKind.BIPOLAR)
    gen.add_argument('--m', type=int, required=True, help='Alphabet size')
    gen.add_argument('--d', type=int, required=True, help='Dimension')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--p', type=float, help='Density of a sparse codebook')
    gen.add_argument('--sigma', type=float, default=1.0, help='Standard deviation of a Gaussian codebook')
    gen.add_argument('--fixed-weight', action='store_true', help='Sparse rows with exactly round(p d) ones')
    gen.add_argument('--allow-large', action='store_true', help='Lift the resource caps')
    gen.add_argument('--out', required=True, help='Destination file')
    stats = cb_commands.add_parser('stats', help='Print the statistics of a codebook file')
    stats.add_argument('path')

    ingest = commands.add_parser('ingest', allow_abbrev=False, help='Check a CSV dataset')
    ingest.add_argument('path')
    ingest.add_argument('--label-column', help='Label column (name or 0-based position)')
    ingest.add_argument('--normalize', choices=(NORMALIZE_NONE, NORMALIZE_MINMAX),
                        default=NORMALIZE_NONE)
    return parser


def extra_params(tokens: Sequence[str]) -> Dict[str, str]:
    """
    Turn leftover '--name value' / '--name=value' tokens into parameters.

    Raises:
        ConfigError: a token that is not an option, or an option without a value
    """
    params: Dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith('--') or len(token) == 2:
            raise ConfigError(f"Unexpected argument '{token}'")
        key = token[2:]
        if '=' in key:
            key, value = key.split('=', 1)
            i += 1
        else:
            if i + 1 >= len(tokens) or tokens[i + 1].startswith('--'):
                raise ConfigError(f"Parameter '--{key}' needs a value")
            value = tokens[i + 1]
            i += 2
        params[key.replace('-', '_')] = value
    return params


def _key_values(items: Sequence[str]) -> Dict[str, str]:
    params = {}
    for item in items:
        if '=' not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got '{item}'")
        key, value = item.split('=', 1)
        params[key.strip().replace('-', '_')] = value.strip()
    return params


def read_experiment_config(path: str) -> Dict[str, object]:
    """
    Read an experiment INI file.

    [experiment] may name the experiment and set output / format; every key of
    [parameters] becomes a raw parameter value.

    Raises:
        ConfigError: missing or unreadable file
    """
    cfg = ConfigParser()
    try:
        if not cfg.read(path, encoding='utf-8'):
            raise ConfigError(f"Experiment config '{path}' not found")
    except ConfigParserError as e:
        raise ConfigError(f"Experiment config '{path}' is malformed: {e}") from e
    section = cfg['experiment'] if cfg.has_section('experiment') else {}
    return {
        'name': section.get('name'),
        'output': section.get('output'),
        'format': section.get('format'),
        'parameters': dict(cfg['parameters']) if cfg.has_section('parameters') else {},
    }


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_run(args: argparse.Namespace, extra: Sequence[str]) -> int:
    file_cfg = read_experiment_config(args.config) if args.config else {
        'name': None, 'output': None, 'format': None, 'parameters': {}}
    name = args.experiment or file_cfg['name']
    if not name:
        raise ConfigError("No experiment named (give one or set [experiment] name)")

    raw: Dict[str, object] = dict(file_cfg['parameters'])
    raw.update(_key_values(args.param))
    raw.update(extra_params(extra))
    if args.seed is not None:
        raw['seed'] = args.seed
    if args.trials is not None:
        raw['trials'] = args.trials

    fmt = (args.format or file_cfg['format'] or config.OUTPUT_FORMAT).lower()
    if fmt not in (OutputFormat.CSV, OutputFormat.JSONL):
        raise ConfigError(f"Unknown output format '{fmt}' (expected csv or jsonl)")
    out = args.out or file_cfg['output'] or config.OUTPUT_DIRECTORY

    data = None
    if args.data:
        data = ingest_csv(args.data, label_column=args.label_column, normalize=args.normalize)
    elif args.label_column is not None:
        raise ConfigError("--label-column needs --data")

    report = run_experiment(name, raw, workers=args.workers or config.WORKERS,
                            progress=args.progress or config.PROGRESS,
                            allow_large=args.allow_large, data=data)
    print(format_report(report))
    paths = write_report(report, out, fmt, banner=config.BANNER and not args.no_banner)
    print(f"\nTrials:  {paths[0]}\nSummary: {paths[1]}")
    return ExitCode.OK if report.passed else ExitCode.EXPERIMENT_FAILED


def cmd_list(args: argparse.Namespace) -> int:
    aliases = {target: alias for alias, target in ALIASES.items()}
    for name in sorted(REGISTRY):
        experiment = REGISTRY[name]
        title = f"{name} (alias: {aliases[name]})" if name in aliases else name
        print(f"{title}\n    {experiment.summary}")
        if experiment.uses_data:
            print("    accepts --data")
        for p in experiment.params:
            choices = f" [{'|'.join(p.choices)}]" if p.choices else ''
            print(f"    --{p.name:<18} {p.kind.__name__:<6} default={p.default!s:<10}{choices} {p.help}")
        print()
    return ExitCode.OK


def cmd_codebook(args: argparse.Namespace) -> int:
    if args.codebook_command == 'gen':
        limits = RunContext(allow_large=args.allow_large)
        limits.require_alphabet(args.m)
        limits.require_dimension(args.d)
        if args.kind == CodebookKind.ORTHOGONAL:
            cb = cbmod.orthogonal(args.m, args.d)
        else:
            cb = cbmod.generate(args.kind, args.m, args.d, args.seed, p=args.p, sigma=args.sigma,
                                fixed_weight=args.fixed_weight)
        save_codebook(cb, args.out)
        print(f"Wrote {args.kind} codebook m={cb.m} d={cb.d} seed={cb.seed} to {args.out}")
        return ExitCode.OK

    cb = load_codebook(args.path)
    rows = dict(kind=cb.kind, m=cb.m, d=cb.d, seed=cb.seed)
    rows.update(cb.stats.to_dict())
    rows.update(cbmod.norm_concentration(cb))
    width = max(len(k) for k in rows)
    for key, value in rows.items():
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"{key.ljust(width)}  {shown}")
    return ExitCode.OK


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = ingest_csv(args.path, label_column=args.label_column, normalize=args.normalize)
    for key, value in dataset.summary().items():
        print(f"{key}: {value}")
    print(f"feature_names: {', '.join(dataset.feature_names)}")
    return ExitCode.OK


# ============================================================================
# ENTRY POINT
# ============================================================================

def _mirror_to_stderr() -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(logging.DEBUG)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and return its exit code.

    argparse usage errors exit with status 2 through SystemExit.
    """
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != 'run':
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    if args.verbose:
        _mirror_to_stderr()
    if args.settings:
        config.load_config(args.settings)

    try:
        if args.command == 'run':
            return cmd_run(args, extra)
        if args.command == 'list':
            return cmd_list(args)
        if args.command == 'codebook':
            return cmd_codebook(args)
        return cmd_ingest(args)
    except ResourceLimitError as e:
        logger.error(f"Resource limit: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        return ExitCode.RESOURCE_LIMIT
    except HDCError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        return ExitCode.SCHEMA_ERROR
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        return ExitCode.EXPERIMENT_FAILED


__all__ = [
    'build_parser',
    'extra_params',
    'read_experiment_config',
    'cmd_run',
    'cmd_list',
    'cmd_codebook',
    'cmd_ingest',
    'main',
]
