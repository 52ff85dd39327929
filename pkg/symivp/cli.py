"""
Command-line interface.

    symivp solve-even --system linear9 --y0 1 --b 1
    symivp interval --system pendulum --y0 0.5 --b 2 --sublinear M1=0,M2=1
    symivp catalog

Settings come from flags, then from a flat ``key = value`` file given
with --config (keys are the long flag names with dashes or underscores),
then from built-in defaults. Files are written to --output-dir, or to
$SYMIVP_OUTPUT_DIR, or to the current directory.

Exit status is 0 on success, 1 when a solve fails (domain guard, parity,
containment or non-convergence) and 2 on usage errors.
"""
import argparse
import configparser
import json
import os
import sys

import numpy as np

from . import catalog
from .fields import DomainTube
from .oracle import OracleConfig
from .picard import (PicardConfig, solve_ivp, resolve_interval,
                     majorant_table)
from .symmetric import solve_even, solve_odd, FamilySpec, family_sweep
from .symmetry import field_parity_report


OUTPUT_DIR_VARIABLE = 'SYMIVP_OUTPUT_DIR'

# option name -> (default, converter)
DEFAULTS = {
    't0': (0.0, float),
    'b': (1.0, float),
    'grid': (512, int),
    'max_iterations': (40, int),
    'stop_tol': (1e-12, float),
    'estimation_samples': (512, int),
    'seed': (0, int),
    'M': (None, float),
    'K': (None, float),
    'L_cap': (None, float),
    'sublinear': (None, str),
    'radius': (1.0, float),
    'tol': (1e-10, float),
    'oracle_h': (None, float),
    'workers': (None, int),
    'output_dir': (None, str),
    'svg': (False, lambda s: str(s).lower() in ('1', 'true', 'yes', 'on')),
    'format': ('csv', str),
}

commands = ('solve', 'solve-even', 'solve-odd', 'sweep', 'interval',
            'check-parity', 'catalog', 'convergence')


class UsageError(Exception):
    """A request that cannot be run as given."""


def parse_vector(text):
    """Parse '1,0,-2' into a float array."""
    try:
        return np.array([float(v) for v in str(text).split(',')
                         if v.strip()])
    except ValueError:
        raise UsageError(f"Cannot read a vector from '{text}'")


def parse_pairs(items):
    """Parse 'key=value' strings into a dict of strings."""
    out = {}
    for item in items or []:
        if '=' not in item:
            raise UsageError(f"Parameters are written key=value, not '{item}'")
        key, value = item.split('=', 1)
        out[key.strip()] = value.strip()
    return out


def parse_sublinear(text):
    if text is None:
        return None
    consts = {}
    for part in text.split(','):
        if '=' not in part:
            raise UsageError("Sub-linear constants are written M1=..,M2=..")
        key, value = part.split('=', 1)
        consts[key.strip().upper()] = float(value)
    if set(consts) != {'M1', 'M2'}:
        raise UsageError("Sub-linear mode needs exactly M1 and M2")
    return consts['M1'], consts['M2']


def read_config(filename):
    """
    Read a flat key = value file into a dict keyed by option name.

    Keys may use dashes or underscores and any case, so M, m and
    L-cap all name their options.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(filename) as f:
        parser.read_string("[symivp]\n" + f.read())
    names = {name.lower(): name
             for name in list(DEFAULTS) + ['system', 'y0', 'eta']}
    config = {}
    for key, value in parser['symivp'].items():
        key = key.replace('-', '_')
        config[names.get(key.lower(), key)] = value
    return config


def resolve_settings(args):
    """
    Fill in every option not given on the command line from the config
    file and then the defaults, converting config strings as needed.
    """
    config = read_config(args.config) if args.config else {}
    for name, (default, convert) in DEFAULTS.items():
        if getattr(args, name, None) is not None:
            continue
        if name in config:
            try:
                setattr(args, name, convert(config[name]))
            except ValueError:
                raise UsageError(f"Bad value for {name} in {args.config}: "
                                 f"{config[name]}")
        else:
            setattr(args, name, default)
    for name in ('system', 'y0', 'eta'):
        if getattr(args, name, None) is None and name in config:
            setattr(args, name, config[name])
    if args.output_dir is None:
        args.output_dir = os.environ.get(OUTPUT_DIR_VARIABLE, '.')
    return args


def picard_config(args):
    try:
        return PicardConfig(grid_points_per_half=args.grid,
                            max_iterations=args.max_iterations,
                            stop_tol=args.stop_tol, M_override=args.M,
                            K_override=args.K,
                            samples_for_estimation=args.estimation_samples,
                            seed=args.seed, L_cap=args.L_cap,
                            sublinear=parse_sublinear(args.sublinear))
    except ValueError as err:
        raise UsageError(str(err))


def load_entry(args):
    if not args.system:
        raise UsageError("--system is required for this command")
    try:
        return catalog.lookup(args.system, parse_pairs(args.param))
    except KeyError as err:
        raise UsageError(err.args[0])
    except ValueError as err:
        raise UsageError(str(err))


def initial_vector(text, entry, name, default=None):
    if text is None:
        if default is None:
            return np.zeros(entry.dimension)
        return np.asarray(default, dtype=float)
    v = parse_vector(text)
    if len(v) != entry.dimension:
        raise UsageError(f"--{name} has {len(v)} components but "
                         f"'{entry.system_name}' has dimension "
                         f"{entry.dimension}")
    return v


def output_path(args, suffix):
    os.makedirs(args.output_dir, exist_ok=True)
    prefix = args.prefix or f"{args.system}_{args.command}".replace('-', '_')
    return os.path.join(args.output_dir, f"{prefix}{suffix}")


def write_trajectory(args, traj, suffix='_trajectory'):
    if args.format == 'fits':
        path = output_path(args, suffix + '.fits')
        traj.save_fits(path, overwrite=True)
    else:
        path = output_path(args, suffix + '.csv')
        traj.save_csv(path, overwrite=True)
    return path


def write_json(args, data, suffix):
    path = output_path(args, suffix)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2)
        f.write('\n')
    return path


def emit_run(args, traj, report):
    paths = [write_trajectory(args, traj),
             write_json(args, report.to_dict(), '_report.json')]
    if args.svg:
        from .plots import plot_trajectory
        path = output_path(args, '.svg')
        plot_trajectory(traj, path)
        paths.append(path)
    print(f"L = {report.L_used:.17g}")
    print(f"iterations = {report.iterations_run}")
    print(f"converged = {str(report.converged).lower()}")
    for path in paths:
        print(f"wrote {path}")
    return 0 if report.converged else 1


def cmd_solve(args):
    entry = load_entry(args)
    cfg = picard_config(args)
    y0 = initial_vector(args.y0, entry, 'y0', entry.check_center())
    eta = initial_vector(args.eta, entry, 'eta')
    tube = DomainTube(y0, eta, t0=args.t0, b=args.b)
    traj, report = solve_ivp(entry.field, tube, cfg)
    return emit_run(args, traj, report)


def cmd_solve_even(args):
    entry = load_entry(args)
    if args.eta is not None and np.any(parse_vector(args.eta)):
        raise UsageError("solve-even starts from rest; drop --eta or set it "
                         "to zero")
    cfg = picard_config(args)
    y0 = initial_vector(args.y0, entry, 'y0', entry.check_center())
    run = solve_even(entry.field, y0, args.t0, args.b, cfg)
    print(f"even defect = {run.defect:.3g}")
    return emit_run(args, run.trajectory, run.report)


def cmd_solve_odd(args):
    entry = load_entry(args)
    if args.y0 is not None and np.any(parse_vector(args.y0)):
        raise UsageError("solve-odd starts from the origin; drop --y0 or set "
                         "it to zero")
    if args.eta is None:
        raise UsageError("solve-odd needs --eta")
    cfg = picard_config(args)
    eta = initial_vector(args.eta, entry, 'eta')
    run = solve_odd(entry.field, eta, args.t0, args.b, cfg,
                    parity_tol=args.tol)
    print(f"odd defect = {run.defect:.3g}")
    return emit_run(args, run.trajectory, run.report)


def cmd_sweep(args):
    entry = load_entry(args)
    if not args.member:
        raise UsageError("sweep needs at least one --member")
    members = [initial_vector(m, entry, 'member') for m in args.member]
    cfg = picard_config(args)
    oracle_cfg = None if args.oracle_h is None else OracleConfig(args.oracle_h)
    spec = FamilySpec(entry.field, args.vary, members, t0=args.t0, b=args.b,
                      cfg=cfg, oracle_cfg=oracle_cfg)
    result = family_sweep(spec, workers=args.workers)
    path = output_path(args, '_summary.csv')
    formats = {name: '%.17g' for name in result.summary.colnames
               if result.summary[name].dtype.kind == 'f'}
    result.summary.write(path, format='ascii.csv', formats=formats,
                         overwrite=True)
    print(f"wrote {path}")
    for index, run in enumerate(result.runs):
        if run is not None:
            path = write_trajectory(args, run.trajectory,
                                    f'_member{index}_trajectory')
            print(f"wrote {path}")
    return 1 if result.failures else 0


def cmd_interval(args):
    entry = load_entry(args)
    cfg = picard_config(args)
    y0 = initial_vector(args.y0, entry, 'y0', entry.check_center())
    eta = initial_vector(args.eta, entry, 'eta')
    tube = DomainTube(y0, eta, t0=args.t0, b=args.b)
    L, M = resolve_interval(entry.field, tube, cfg)
    print(f"b = {args.b:.17g}")
    print(f"M = {M:.17g}")
    print(f"L = {L:.17g}")
    return 0


def cmd_check_parity(args):
    entry = load_entry(args)
    center = initial_vector(args.center, entry, 'center',
                            entry.check_center())
    report = field_parity_report(entry.field, center, args.radius,
                                 samples=args.estimation_samples,
                                 tol=args.tol, seed=args.seed)
    data = report.to_dict()
    data['declared_parity'] = entry.field.declared_parity
    text = json.dumps(data, indent=2)
    print(text)
    print(f"wrote {write_json(args, data, '_parity.json')}")
    return 0


def cmd_catalog(args):
    print(json.dumps(catalog.catalog_listing(), indent=2))
    return 0


def cmd_convergence(args):
    entry = load_entry(args)
    cfg = picard_config(args)
    y0 = initial_vector(args.y0, entry, 'y0', entry.check_center())
    eta = initial_vector(args.eta, entry, 'eta')
    tube = DomainTube(y0, eta, t0=args.t0, b=args.b)
    _, report = solve_ivp(entry.field, tube, cfg)
    table = majorant_table(report)
    table['increment'].format = '%.6e'
    table['majorant'].format = '%.6e'
    table.pprint(max_lines=-1, max_width=-1)
    path = output_path(args, '_convergence.csv')
    table.write(path, format='ascii.csv', overwrite=True,
                formats={'increment': '%.17g', 'majorant': '%.17g'})
    print(f"wrote {path}")
    if args.svg:
        from .plots import plot_convergence
        svg = output_path(args, '_convergence.svg')
        plot_convergence(report, svg)
        print(f"wrote {svg}")
    return 0 if report.converged else 1


handlers = {
    'solve': cmd_solve,
    'solve-even': cmd_solve_even,
    'solve-odd': cmd_solve_odd,
    'sweep': cmd_sweep,
    'interval': cmd_interval,
    'check-parity': cmd_check_parity,
    'catalog': cmd_catalog,
    'convergence': cmd_convergence,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--system', help="catalog name of the system")
    common.add_argument('--param', action='append', metavar='KEY=VALUE',
                        help="system parameter; repeat for several")
    common.add_argument('--y0', help="initial position, comma separated")
    common.add_argument('--eta', help="initial velocity, comma separated")
    common.add_argument('--t0', type=float, help="initial time")
    common.add_argument('--b', type=float, help="tube radius")
    common.add_argument('--grid', type=int,
                        help="grid points per half-interval")
    common.add_argument('--max-iterations', type=int)
    common.add_argument('--stop-tol', type=float)
    common.add_argument('--estimation-samples', type=int,
                        help="samples for M, K and parity estimates")
    common.add_argument('--seed', type=int)
    common.add_argument('--M', type=float, help="override the bound on |f|")
    common.add_argument('--K', type=float,
                        help="override the Lipschitz constant")
    common.add_argument('--L-cap', type=float, help="upper limit on L")
    common.add_argument('--sublinear', metavar='M1=..,M2=..',
                        help="bound M from |f(y)| <= M1 |y| + M2")
    common.add_argument('--config', help="flat key = value settings file")
    common.add_argument('--output-dir',
                        help=f"default ${OUTPUT_DIR_VARIABLE} or .")
    common.add_argument('--prefix', help="base name of the output files")
    common.add_argument('--format', choices=('csv', 'fits'),
                        help="trajectory file format")
    common.add_argument('--svg', action='store_true', default=None,
                        help="also write an SVG figure")

    parser = argparse.ArgumentParser(
        prog='symivp',
        description="Even and odd solutions of y'' = f(y) by successive "
                    "approximations")
    sub = parser.add_subparsers(dest='command', required=True)
    for name in commands:
        p = sub.add_parser(name, parents=[common])
        if name == 'sweep':
            p.add_argument('--vary', required=True,
                           choices=('initial_position', 'initial_velocity'))
            p.add_argument('--member', action='append',
                           help="one member's vector; repeat for several")
            p.add_argument('--oracle-h', type=float,
                           help="compare members with RK4 at this step")
            p.add_argument('--workers', type=int)
        if name == 'check-parity':
            p.add_argument('--center', help="centre of the sampled ball")
            p.add_argument('--radius', type=float)
        if name in ('check-parity', 'solve-odd'):
            p.add_argument('--tol', type=float,
                           help="parity classification tolerance")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve_settings(args)
        return handlers[args.command](args)
    except UsageError as err:
        parser.error(str(err))
    except (ValueError, RuntimeError) as err:
        # includes DomainGuardError, ParityError and ContainmentError
        print(f"error: {err}", file=sys.stderr)
        return 1
