"""
Even and odd solutions of y'' = f(y).

A zero initial velocity gives a solution that is even about t0, and a
zero initial position gives an odd one whenever f is odd.  The
constructors here build these runs and enforce their symmetry.
"""
import warnings
from multiprocessing.pool import ThreadPool

import numpy as np
from astropy.table import Table

from .fields import DomainTube
from .oracle import OracleConfig, rk4_solve, compare
from .picard import PicardConfig, solve_ivp, resolve_interval
from .symmetry import parity_defects, field_parity_report
from .utils import (Namespace, ParityError, CollisionObstructionError,
                    sup_norm)


run_kinds = Namespace('even', 'odd')

family_parameters = Namespace('initial_position', 'initial_velocity')

SYMMETRY_TOL = 1e-12


class SymmetricRun:
    """
    A solution built to be even or odd about its initial time.

    Attributes
    ----------
    trajectory: Trajectory

    report: ConvergenceReport

    parity: ParityReport
        Parity of the positions about t0

    velocity_parity: ParityReport
        Parity of the velocities about t0

    kind: str
        'even' or 'odd'

    interception: array
        Where the phase-plane orbit meets an axis at t0: the velocity
        y'(t0) of an even run (zero) or the position y(t0) of an odd run
        (zero)
    """

    def __init__(self, trajectory, report, kind):
        if kind not in run_kinds:
            raise ValueError(f"Unknown run kind '{kind}'")
        self.trajectory = trajectory
        self.report = report
        self.kind = kind
        self.parity = parity_defects(trajectory.positions())
        self.velocity_parity = parity_defects(trajectory.velocities())
        c = len(trajectory) // 2
        if kind == run_kinds.even:
            self.interception = trajectory.yp[c].copy()
        else:
            self.interception = trajectory.y[c].copy()

    def __repr__(self):
        return (f"SymmetricRun({self.kind}, {self.trajectory.field_name}, "
                f"L={self.report.L_used:.6g}, defect={self.defect:.3g})")

    @property
    def defect(self):
        """The position defect that should vanish for this kind of run."""
        if self.kind == run_kinds.even:
            return self.parity.even_defect
        return self.parity.odd_defect

    @property
    def velocity_defect(self):
        if self.kind == run_kinds.even:
            return self.velocity_parity.odd_defect
        return self.velocity_parity.even_defect

    def check(self, tol=SYMMETRY_TOL):
        """
        Raise ParityError unless positions and velocities have the
        mirror property of the run's kind within tol.
        """
        if self.defect > tol:
            raise ParityError(f"{self.kind.capitalize()} run of "
                              f"'{self.trajectory.field_name}' has position "
                              f"defect {self.defect:.3g} > {tol:g}",
                              defect=self.defect)
        if self.velocity_defect > tol:
            raise ParityError(f"{self.kind.capitalize()} run of "
                              f"'{self.trajectory.field_name}' has velocity "
                              f"defect {self.velocity_defect:.3g} > {tol:g}",
                              defect=self.velocity_defect)


def solve_even(f, y0, t0=0.0, b=1.0, cfg=None, tol=SYMMETRY_TOL):
    """
    Build the solution with y(t0) = y0 and y'(t0) = 0, which satisfies
    y(t0 + tau) = y(t0 - tau).

    No parity is required of f.

    Parameters
    ----------
    f: VectorField

    y0: array
        Initial position

    t0: float
        Initial time, the centre of symmetry

    b: float
        Tube radius

    cfg: PicardConfig or None

    tol: float
        Largest accepted mirror defect

    Returns
    -------
    run: SymmetricRun
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    tube = DomainTube(y0, np.zeros_like(y0), t0=t0, b=b)
    traj, report = solve_ivp(f, tube, cfg)
    run = SymmetricRun(traj, report, run_kinds.even)
    run.check(tol)
    return run


def _check_origin(f):
    zero = np.zeros(f.dimension)
    if not np.any(f.guarded(zero)):
        return
    message = (f"'{f.name}' is singular at the origin, so no solution can "
               "pass through y = 0 and odd solutions do not exist")
    if f.metadata.get('bodies'):
        message += ("; y(t0) = 0 means all of the point masses are in a "
                    "state of mutual collision")
    raise CollisionObstructionError(message, point=zero)


def solve_odd(f, eta, t0=0.0, b=1.0, cfg=None, parity_tol=1e-10,
              tol=SYMMETRY_TOL):
    """
    Build the solution with y(t0) = 0 and y'(t0) = eta, which satisfies
    y(t0 + tau) = -y(t0 - tau) when f is odd.

    Oddness of f is checked by sampling the ball |y| <= b + L |eta|
    that the tube sweeps over the existence interval.

    Parameters
    ----------
    f: VectorField

    eta: array
        Initial velocity

    t0: float
        Initial time, the centre of symmetry

    b: float
        Tube radius

    cfg: PicardConfig or None

    parity_tol: float
        Largest accepted sampled odd defect of f

    tol: float
        Largest accepted mirror defect of the run

    Returns
    -------
    run: SymmetricRun

    Raises
    ------
    CollisionObstructionError
        If f is singular at the origin
    ParityError
        If f is not odd on the swept ball
    """
    if cfg is None:
        cfg = PicardConfig()
    _check_origin(f)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    zero = np.zeros_like(eta)
    tube = DomainTube(zero, eta, t0=t0, b=b)
    L, _ = resolve_interval(f, tube, cfg)
    radius = b + L * sup_norm(eta) if np.isfinite(L) else b
    field_report = field_parity_report(f, zero, radius,
                                       samples=cfg.samples_for_estimation,
                                       tol=parity_tol, seed=cfg.seed)
    if field_report.odd_defect > parity_tol:
        raise ParityError(f"Field '{f.name}' is not odd on the ball of radius "
                          f"{radius:.6g}: sampled odd defect "
                          f"{field_report.odd_defect:.3g} > {parity_tol:g} "
                          f"(classified {field_report.classification})",
                          defect=field_report.odd_defect)
    traj, report = solve_ivp(f, tube, cfg)
    run = SymmetricRun(traj, report, run_kinds.odd)
    run.check(tol)
    return run


def oracle_deviation(run, f, cfg=None):
    """
    Largest position deviation of a run from the reference integrator,
    run forwards and backwards from t0 over the run's interval.
    """
    if cfg is None:
        cfg = OracleConfig()
    traj = run.trajectory
    c = len(traj) // 2
    worst = 0.0
    for span in (traj.tau[-1], traj.tau[0]):
        ref = rk4_solve(f, traj.y[c], traj.yp[c], traj.t0, span, cfg)
        worst = max(worst, compare(traj, ref)[0])
    return worst


class FamilySpec:
    """
    A family of symmetric runs of one field.

    Parameters
    ----------
    field: VectorField
        The base field

    vary: str
        'initial_position' for a family of even runs (zero initial
        velocity), or 'initial_velocity' for odd runs from the origin

    samples: list
        The initial positions or velocities, one per member

    t0: float
        Shared initial time

    b: float or callable
        Tube radius, or a function of the member's sample giving it

    cfg: PicardConfig or None
        Shared solver settings

    oracle_cfg: OracleConfig or None
        If given, every member is compared against the reference
        integrator
    """

    def __init__(self, field, vary, samples, t0=0.0, b=1.0, cfg=None,
                 oracle_cfg=None):
        if vary not in family_parameters:
            raise ValueError(f"Families vary one of:\n{family_parameters}\n"
                             f"not '{vary}'")
        samples = [np.atleast_1d(np.asarray(s, dtype=float)) for s in samples]
        if not samples:
            raise ValueError("A family needs at least one member")
        for s in samples:
            if s.shape != (field.dimension,):
                raise ValueError(f"Member {s} does not match the dimension "
                                 f"{field.dimension} of '{field.name}'")
        self.field = field
        self.vary = vary
        self.samples = samples
        self.t0 = float(t0)
        self.b = b
        self.cfg = PicardConfig() if cfg is None else cfg
        self.oracle_cfg = oracle_cfg

    @property
    def name(self):
        return self.field.name

    @property
    def kind(self):
        if self.vary == family_parameters.initial_position:
            return run_kinds.even
        return run_kinds.odd

    def radius(self, sample):
        return float(self.b(sample) if callable(self.b) else self.b)


class SweepResult:
    """
    The outcome of a family sweep.

    Attributes
    ----------
    runs: list
        One SymmetricRun per member in input order, None for failures

    summary: astropy.table.Table
        One row per successful member

    failures: list
        (member_index, message) for every failed member
    """

    def __init__(self, runs, summary, failures):
        self.runs = runs
        self.summary = summary
        self.failures = failures

    def __len__(self):
        return len(self.runs)

    @property
    def successful(self):
        return [run for run in self.runs if run is not None]


def family_sweep(spec, workers=None):
    """
    Solve every member of a family.

    Members are independent and run concurrently on a thread pool;
    results come back in input order. A member that fails is reported
    with a warning and in the result's failures, and the sweep goes on.

    Parameters
    ----------
    spec: FamilySpec

    workers: int or None
        Pool size; the number of CPUs if None

    Returns
    -------
    result: SweepResult

    Raises
    ------
    RuntimeError
        If every member fails
    """
    def member(index):
        sample = spec.samples[index]
        b = spec.radius(sample)
        try:
            if spec.kind == run_kinds.even:
                run = solve_even(spec.field, sample, spec.t0, b, spec.cfg)
            else:
                run = solve_odd(spec.field, sample, spec.t0, b, spec.cfg)
            dev = (np.nan if spec.oracle_cfg is None
                   else oracle_deviation(run, spec.field, spec.oracle_cfg))
        except (ValueError, RuntimeError) as err:
            return None, np.nan, str(err)
        return run, dev, None

    with ThreadPool(workers) as pool:
        outcomes = pool.map(member, range(len(spec.samples)))

    runs, rows, failures = [], [], []
    n = spec.field.dimension
    for index, (run, dev, error) in enumerate(outcomes):
        runs.append(run)
        if run is None:
            failures.append((index, error))
            warnings.warn(f"Member {index} of the '{spec.name}' family "
                          f"failed: {error}")
            continue
        rows.append([index] + list(spec.samples[index])
                    + [run.report.L_used, run.report.iterations_run,
                       run.defect, dev, run.report.converged])

    if not rows:
        raise RuntimeError(f"Every member of the '{spec.name}' family failed")

    names = (['member_index'] + [f'param_{i + 1}' for i in range(n)]
             + ['L', 'iterations', 'parity_defect', 'oracle_dev',
                'converged'])
    summary = Table(rows=rows, names=names)
    summary.meta['FIELD'] = spec.name
    summary.meta['VARY'] = spec.vary
    return SweepResult(runs, summary, failures)
