import argparse
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import pandas as pd
import yaml
from loguru import logger

from errors import BadConfig, BoundsError, InputError, NumericError
from generators import construction_profile, generate, source_from_dict
from profiles import resolve_profile
from solvers import Method, bound_table, sigma_p, sigma_tilde_p
from spectra import load_spectrum, spectrum_to_json
from util import parse_float_list, parse_grid, setup_logging, table_to_csv, to_json, write_output
from verify import SuiteSettings, global_checks, log_outcome, run_suite, spectrum_checks

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'configs')
DEFAULT_CONFIGS = {'verify': 'verify.yml', 'sweep': 'sweep.yml'}
DEFAULT_FORMATS = {'bounds': 'csv', 'verify': 'json', 'generate': 'json', 'sweep': 'csv'}
BOUND_COLUMNS = ['p', 'method', 'value', 'residual', 'iterations']
CONFIG_KEYS = {'spectrum', 'profile', 'm', 'p', 'p_grid', 'format', 'out', 'seed', 'tol', 'log_level', 'suite'}


@dataclass
class RunConfig:
    command: str
    spectrum: Optional[str] = None
    profile: Optional[str] = None
    m: Optional[int] = None
    p: list = field(default_factory=list)
    p_grid: Optional[str] = None
    format: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    tol: Optional[float] = None
    log_level: str = 'WARNING'
    catalog: Optional[str] = None
    source: dict = field(default_factory=dict)
    suite: SuiteSettings = field(default_factory=SuiteSettings)

    def validate(self):
        if self.m is not None and (isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 1):
            raise InputError(f'--m must be a positive integer, got {self.m!r}')
        if any(p < 0 for p in self.p):
            raise InputError(f'exponents must be >= 0, got {self.p}')
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise InputError(f'seed must be an integer, got {self.seed!r}')
        if self.tol is not None and not isinstance(self.tol, (int, float)):
            raise InputError(f'--tol must be a number, got {self.tol!r}')
        if self.tol is not None and not self.tol > 0:
            raise InputError(f'--tol must be positive, got {self.tol}')
        if self.format not in ('json', 'csv'):
            raise InputError(f'--format must be json or csv, got {self.format!r}')

    def require(self, *names):
        missing = [f'--{n.replace("_", "-")}' for n in names if getattr(self, n) is None]
        if missing:
            raise InputError(f'{self.command} needs {", ".join(missing)}')


def load_config(path) -> dict:
    """
    Read a YAML run configuration. Only known keys are accepted; the suite
    block is checked against the suite settings.
    """
    try:
        with open(path, 'r') as f:
            config = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise BadConfig(f'{path} is not valid YAML: {e}')
    except OSError as e:
        raise BadConfig(f'cannot read config {path}: {e.strerror}')
    if not isinstance(config, dict):
        raise BadConfig(f'{path} must hold a mapping')
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise BadConfig(f'unknown keys in {path}: {sorted(unknown)}')
    suite = config.get('suite') or {}
    if not isinstance(suite, dict):
        raise BadConfig(f'"suite" in {path} must be a mapping')
    unknown = set(suite) - {f.name for f in fields(SuiteSettings)}
    if unknown:
        raise BadConfig(f'unknown suite settings in {path}: {sorted(unknown)}')
    for key, value in config.items():
        logger.info(f'{key}:\t{value}')
    return config


def build_config(args) -> RunConfig:
    """Defaults, then the YAML file, then flags given on the command line."""
    config_path = args.config
    if config_path is None and args.command in DEFAULT_CONFIGS:
        candidate = os.path.join(CONFIG_DIR, DEFAULT_CONFIGS[args.command])
        config_path = candidate if os.path.isfile(candidate) else None
    loaded = load_config(config_path) if config_path else {}

    run = RunConfig(command=args.command, format=DEFAULT_FORMATS[args.command])
    run.suite = SuiteSettings(**(loaded.pop('suite', None) or {}))
    for key, value in loaded.items():
        if key == 'p':
            value = parse_float_list(value)
        setattr(run, key, value)

    for key in ('spectrum', 'profile', 'm', 'p_grid', 'format', 'out', 'seed', 'tol', 'log_level', 'catalog'):
        value = getattr(args, key, None)
        if value is not None:
            setattr(run, key, value)
    if getattr(args, 'p_list', None) is not None:
        run.p = parse_float_list(args.p_list)
        # --p on the command line wins over a grid from the config file
        if getattr(args, 'p_grid', None) is None:
            run.p_grid = None
    if args.command == 'generate':
        run.source = generate_source(args)
    if run.tol is not None:
        run.suite.family_rtol = run.tol
    run.validate()
    return run


def generate_source(args) -> dict:
    if args.source:
        try:
            with open(args.source, 'r') as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise InputError(f'cannot read spectrum source {args.source}: {e}')
        return data
    if args.kind is None:
        raise InputError('generate needs --kind or --source')
    source = {'kind': args.kind, 'count': args.count}
    optional = {
        'sides': parse_float_list(args.sides) if args.sides is not None else None,
        'length': args.length, 'grid': args.grid,
        'lx': args.lx, 'ly': args.ly, 'nx': args.nx, 'ny': args.ny,
        'p': args.p_coeff, 'q': args.q_coeff, 'density': args.density,
        'interval': parse_float_list(args.interval) if args.interval is not None else None,
    }
    source.update({k: v for k, v in optional.items() if v is not None})
    return source


def _emit_table(df: pd.DataFrame, run: RunConfig, records: list):
    write_output(table_to_csv(df) if run.format == 'csv' else to_json(records), run.out)


def cmd_bounds(run: RunConfig) -> int:
    run.require('spectrum', 'profile', 'm')
    spectrum = load_spectrum(run.spectrum)
    profile = resolve_profile(run.profile)
    rows = bound_table(profile, spectrum, int(run.m), run.p)
    df = pd.DataFrame([{'p': r.p, 'method': r.method.value, 'value': r.value, 'residual': r.residual,
                        'iterations': r.iterations} for r in rows], columns=BOUND_COLUMNS)
    _emit_table(df, run, [r.to_dict() for r in rows])
    failed = [r for r in rows if r.error is not None]
    if failed:
        logger.error(f'{len(failed)} of {len(rows)} bounds failed')
        return NumericError.exit_code
    return 0


def _catalog_reports(run: RunConfig) -> list:
    config = load_catalog(run.catalog)
    groups = []
    for entry in config['sources']:
        source = source_from_dict({k: v for k, v in entry.items() if k != 'name'})
        spectrum = generate(source)
        profile = construction_profile(source)
        for m in config['m_values']:
            reports = spectrum_checks(profile, spectrum, int(m), run.suite)
            log_outcome(reports, f'{entry.get("name", source.kind)} m={m}')
            groups.append({'source': entry.get('name', source.kind), 'm': int(m), 'reports': reports})
    groups.append({'source': None, 'm': None, 'reports': global_checks(run.suite, run.seed)})
    return groups


def load_catalog(path) -> dict:
    try:
        with open(path, 'r') as f:
            config = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise BadConfig(f'cannot read catalog {path}: {e}')
    if not isinstance(config, dict) or set(config) != {'m_values', 'sources'}:
        raise BadConfig(f'catalog {path} needs exactly "m_values" and "sources"')
    return config


def cmd_verify(run: RunConfig) -> int:
    if run.catalog:
        groups = _catalog_reports(run)
    else:
        run.require('spectrum', 'profile', 'm')
        spectrum = load_spectrum(run.spectrum)
        profile = resolve_profile(run.profile)
        groups = [{'source': run.spectrum, 'm': int(run.m),
                   'reports': run_suite(profile, spectrum, int(run.m), run.suite, run.seed)}]
    reports = [r for group in groups for r in group['reports']]
    if run.format == 'csv':
        df = pd.DataFrame([{'source': group['source'], 'm': group['m'], 'check': r.check, 'pass': r.passed,
                            'slack': r.slack, 'tolerance': r.tolerance}
                           for group in groups for r in group['reports']])
        write_output(table_to_csv(df), run.out)
    elif run.catalog:
        write_output(to_json([{**g, 'reports': [r.to_dict() for r in g['reports']]} for g in groups]), run.out)
    else:
        write_output(to_json([r.to_dict() for r in reports]), run.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_generate(run: RunConfig) -> int:
    source = source_from_dict(run.source)
    spectrum = generate(source)
    logger.info(f'generated {len(spectrum)} eigenvalues from {source.kind}')
    write_output(spectrum_to_json(spectrum), run.out)
    return 0


def sweep_grid(run: RunConfig) -> list:
    if run.p_grid is not None:
        return parse_grid(run.p_grid)
    if run.p:
        return sorted(set(run.p))
    raise InputError('sweep needs --p-grid or --p')


def cmd_sweep(run: RunConfig) -> int:
    """sigma_p for p <= 2 and sigma_tilde_p above, one row per grid point."""
    run.require('spectrum', 'profile', 'm')
    spectrum = load_spectrum(run.spectrum)
    profile = resolve_profile(run.profile)
    rows = []
    for p in sweep_grid(run):
        method = Method.SIGMA_P if p <= 2 else Method.SIGMA_TILDE_P
        solver = sigma_p if p <= 2 else sigma_tilde_p
        try:
            result = solver(profile, spectrum, int(run.m), p)
            rows.append({'p': p, 'method': method.value, 'value': result.value, 'flagged': result.flagged})
        except BoundsError as e:
            logger.warning(f'sweep p = {p:g} left empty: {e}')
            rows.append({'p': p, 'method': method.value, 'value': float('nan'), 'flagged': True})
    df = pd.DataFrame(rows, columns=['p', 'method', 'value', 'flagged'])
    _emit_table(df, run, rows)
    if not df['value'].notna().any():
        logger.error('every point of the sweep failed')
        return NumericError.exit_code
    return 0


COMMANDS = {'bounds': cmd_bounds, 'verify': cmd_verify, 'generate': cmd_generate, 'sweep': cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cli.py', description='Universal upper bounds for eigenvalues.')
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='YAML run configuration')
    common.add_argument('--format', choices=['json', 'csv'], default=None)
    common.add_argument('--out', type=str, default=None, help='output file (default: standard output)')
    common.add_argument('--log-level', dest='log_level', type=str, default=None)

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument('--spectrum', type=str, default=None, help='spectrum JSON file')
    problem.add_argument('--profile', type=str, default=None, help='inline profile (classical:n=2) or JSON file')
    problem.add_argument('--m', type=int, default=None, help='number of known eigenvalues')

    bounds = sub.add_parser('bounds', parents=[common, problem], help='bound table for lambda_(m+1)')
    bounds.add_argument('--p', dest='p_list', type=str, default=None, help='comma separated exponents')

    verify = sub.add_parser('verify', parents=[common, problem], help='run the verification suite')
    verify.add_argument('--seed', type=int, default=None)
    verify.add_argument('--tol', type=float, default=None, help='relative tolerance of the family inequalities')
    verify.add_argument('--catalog', type=str, default=None, help='YAML catalog of generated spectra')

    gen = sub.add_parser('generate', parents=[common], help='write a spectrum with known ground truth')
    gen.add_argument('--source', type=str, default=None, help='spectrum source as JSON or YAML')
    gen.add_argument('--kind', type=str, default=None)
    gen.add_argument('--count', type=int, default=None)
    gen.add_argument('--sides', type=str, default=None)
    gen.add_argument('--length', type=float, default=None)
    gen.add_argument('--grid', type=int, default=None)
    gen.add_argument('--lx', type=float, default=None)
    gen.add_argument('--ly', type=float, default=None)
    gen.add_argument('--nx', type=int, default=None)
    gen.add_argument('--ny', type=int, default=None)
    gen.add_argument('--p', dest='p_coeff', type=str, default=None, help='Sturm-Liouville p, e.g. const:1')
    gen.add_argument('--q', dest='q_coeff', type=str, default=None, help='Sturm-Liouville q, e.g. const:0')
    gen.add_argument('--density', type=str, default=None, help='density q(x), e.g. affine:1,1')
    gen.add_argument('--interval', type=str, default=None, help='a,b')

    sweep = sub.add_parser('sweep', parents=[common, problem], help='bound as a function of p, as CSV')
    sweep.add_argument('--p', dest='p_list', type=str, default=None)
    sweep.add_argument('--p-grid', dest='p_grid', type=str, default=None, help='LO:HI:STEP')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.log_level or 'WARNING')
        run = build_config(args)
        if args.log_level is None and run.log_level != 'WARNING':
            setup_logging(run.log_level)
        return COMMANDS[run.command](run)
    except BoundsError as e:
        sys.stderr.write(f'error: {e}\n')
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
