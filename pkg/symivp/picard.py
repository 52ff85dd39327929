"""
Successive approximations for y'' = f(y), y(t0) = y0, y'(t0) = eta.

The solution is the fixed point of

    phi(t) = y0 + (t - t0) eta + int_0^t int_0^u f(phi(s)) ds du

iterated from the affine seed on a grid mirrored about t0.  All work is
done in the offset tau = t - t0, which makes the problem autonomous in
the initial time.
"""
import json
import warnings

import numpy as np
from astropy.table import Table
from scipy.special import gammaln

from .fields import DomainTube
from .trajectory import Trajectory
from .utils import (ContainmentError, DomainGuardError, centred_cumulative,
                    check_mirrored, check_uniform, mirrored_grid, sup_norm,
                    induced_sup_norm, GridSymmetryError, Namespace)


QUADRATURE_FLOOR_FACTOR = 100.0
SAFETY_MARGIN = 0.05


stop_reasons = Namespace('stop_tol', 'quadrature_floor', 'max_iterations')


class PicardConfig:
    """
    Settings of a successive-approximation solve.

    Parameters
    ----------
    grid_points_per_half: int
        N >= 8; the grid has 2N + 1 points on [t0 - L, t0 + L]

    max_iterations: int
        Iteration cap J >= 1

    stop_tol: float
        Stop once the sup-norm increment is at most this

    M_override: float or None
        Use this bound on |f| instead of estimating it

    K_override: float or None
        Use this Lipschitz constant instead of estimating it

    samples_for_estimation: int
        Number of quasi-random tube points used by the estimators

    seed: int
        Seed of the quasi-random sampling

    L_cap: float or None
        Upper limit on the half-width; the interval is never enlarged
        beyond the existence interval

    sublinear: tuple or None
        Constants (M1, M2) of a growth bound |f(y)| <= M1 |y| + M2; when
        given, M is computed from them instead of sampled

    margin: float
        Relative safety margin applied to sampled M and K estimates
    """

    def __init__(self, grid_points_per_half=512, max_iterations=40,
                 stop_tol=1e-12, M_override=None, K_override=None,
                 samples_for_estimation=512, seed=0, L_cap=None,
                 sublinear=None, margin=SAFETY_MARGIN):
        if int(grid_points_per_half) < 8:
            raise ValueError("Need at least 8 grid points per half-interval")
        if int(max_iterations) < 1:
            raise ValueError("Need at least one iteration")
        if not stop_tol > 0:
            raise ValueError("Stopping tolerance must be positive")
        if int(samples_for_estimation) < 1:
            raise ValueError("Need at least one estimation sample")
        if M_override is not None and M_override < 0:
            raise ValueError("M override must be non-negative")
        if K_override is not None and K_override < 0:
            raise ValueError("K override must be non-negative")
        if L_cap is not None and not L_cap > 0:
            raise ValueError("L cap must be positive")
        if margin < 0:
            raise ValueError("Safety margin must be non-negative")
        if sublinear is not None:
            sublinear = tuple(float(c) for c in sublinear)
            if len(sublinear) != 2 or min(sublinear) < 0:
                raise ValueError("Sub-linear constants are two non-negative "
                                 f"numbers (M1, M2), not {sublinear}")
        self.grid_points_per_half = int(grid_points_per_half)
        self.max_iterations = int(max_iterations)
        self.stop_tol = float(stop_tol)
        self.M_override = M_override
        self.K_override = K_override
        self.samples_for_estimation = int(samples_for_estimation)
        self.seed = int(seed)
        self.L_cap = L_cap
        self.sublinear = sublinear
        self.margin = float(margin)

    _fields = ('grid_points_per_half', 'max_iterations', 'stop_tol',
               'M_override', 'K_override', 'samples_for_estimation', 'seed',
               'L_cap', 'sublinear', 'margin')

    def to_dict(self):
        return {k: getattr(self, k) for k in self._fields}

    def replace(self, **changes):
        """A copy with some settings changed."""
        settings = self.to_dict()
        unknown = set(changes) - set(settings)
        if unknown:
            raise ValueError(f"Unknown solver settings: {sorted(unknown)}")
        settings.update(changes)
        return self.__class__(**settings)

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items())
        return f"PicardConfig({items})"


class ConvergenceReport:
    """
    The record of one successive-approximation solve.

    Attributes
    ----------
    increments: list
        |phi_j - phi_{j-1}| in the sup norm, one per iteration

    majorant_terms: list
        The bound M K^{j-1} L^{2j} / (2j)! on each increment

    M_used, K_used, b_used, L_used: float
        The constants of the solve

    final_integral_residual: float
        Sup-norm defect of the integral equation at the final iterate

    final_ode_residual: float
        Sup-norm of phi'' - f(phi) with finite-difference phi''

    iterations_run: int

    converged: bool

    stop_reason: str
        One of 'stop_tol', 'quadrature_floor', 'max_iterations'

    quadrature_floor: float
        100 machine epsilons times the largest |phi|

    containment: list
        Sup-norm distance of each iterate from the seed
    """

    def __init__(self, M_used, K_used, b_used, L_used):
        self.M_used = float(M_used)
        self.K_used = float(K_used)
        self.b_used = float(b_used)
        self.L_used = float(L_used)
        self.increments = []
        self.majorant_terms = []
        self.containment = []
        self.final_integral_residual = np.nan
        self.final_ode_residual = np.nan
        self.converged = False
        self.stop_reason = None
        self.quadrature_floor = 0.0

    @property
    def iterations_run(self):
        return len(self.increments)

    def __repr__(self):
        return (f"ConvergenceReport(iterations={self.iterations_run}, "
                f"converged={self.converged}, stop_reason={self.stop_reason!r},"
                f" L={self.L_used:.6g}, M={self.M_used:.6g}, "
                f"K={self.K_used:.6g})")

    def majorant_violations(self):
        """
        Iterations j at which the increment exceeds the majorant bound by
        more than the quadrature floor, up to the first increment that
        reaches the floor.
        """
        bad = []
        for j, (inc, bound) in enumerate(zip(self.increments,
                                             self.majorant_terms), start=1):
            if inc <= self.quadrature_floor:
                break
            if inc > bound + self.quadrature_floor:
                bad.append(j)
        return bad

    def to_dict(self):
        return {
            'iterations': self.iterations_run,
            'increments': [float(x) for x in self.increments],
            'majorant_terms': [float(x) for x in self.majorant_terms],
            'M': self.M_used,
            'K': self.K_used,
            'b': self.b_used,
            'L': self.L_used,
            'integral_residual': float(self.final_integral_residual),
            'ode_residual': float(self.final_ode_residual),
            'converged': bool(self.converged),
            'stop_reason': self.stop_reason,
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def _tube_span(tube, L):
    # a stationary seed makes the tube the same ball for every t
    if not np.any(tube.eta):
        return 0.0
    if not np.isfinite(L):
        raise ValueError("A moving seed needs a finite interval to bound f on")
    return L


def _check_tube_guard(f, tube, span):
    taus = np.linspace(-span, span, 65) if span > 0 else np.zeros(1)
    for center in tube.seed(taus):
        f.check_ball(center, tube.b)


def _tube_points(f, tube, span, cfg):
    try:
        _check_tube_guard(f, tube, span)
        return tube.sample(span, cfg.samples_for_estimation, cfg.seed)
    except DomainGuardError as err:
        raise DomainGuardError(f"The tube of radius {tube.b:g} around the "
                               f"seed crosses the singular set of "
                               f"'{f.name}': {err}", point=err.point) from err


def estimate_bound_M(f, tube, L_candidate, cfg):
    """
    Bound |f| on the tube around the seed over |t - t0| <= L_candidate.

    In the default mode |f| is sampled at the corners and centre of the
    tube cross-sections and at scrambled Halton points, and the largest
    value is inflated by the configured safety margin. If cfg.sublinear
    holds constants (M1, M2) the bound M1 (sup |phi0| + b) + M2 is used
    instead, with no sampling.

    Parameters
    ----------
    f: VectorField
        The field

    tube: DomainTube
        The domain around the seed

    L_candidate: float
        Half-width of the time interval covered

    cfg: PicardConfig
        Sampling settings and overrides

    Returns
    -------
    M: float
    """
    if cfg.M_override is not None:
        return float(cfg.M_override)
    if cfg.sublinear is not None:
        M1, M2 = cfg.sublinear
        span = _tube_span(tube, L_candidate)
        ends = tube.seed(np.array([-span, span]))
        return M1 * (sup_norm(ends) + tube.b) + M2
    span = _tube_span(tube, L_candidate)
    points = _tube_points(f, tube, span, cfg)
    return (1 + cfg.margin) * sup_norm(f(points))


def jacobian(f, points, rel_step=1e-6):
    """
    Central-difference Jacobians of f at a stack of points.

    Returns
    -------
    jac: array
        Shape (m, n, n), with jac[k, i, j] = d f_i / d y_j at point k
    """
    points = np.asarray(points, dtype=float)
    m, n = points.shape
    steps = rel_step * np.maximum(1.0, np.abs(points))
    jac = np.empty((m, n, n))
    for j in range(n):
        shift = np.zeros_like(points)
        shift[:, j] = steps[:, j]
        jac[:, :, j] = ((f(points + shift) - f(points - shift))
                        / (2 * steps[:, j, np.newaxis]))
    return jac


def estimate_lipschitz_K(f, tube, L, cfg):
    """
    Estimate the Lipschitz constant of f on the tube.

    The estimate is the largest induced max-norm of the central-difference
    Jacobian over the tube samples, inflated by the safety margin. Fields
    that pin their constant (through a 'lipschitz_K' metadata entry) use
    it directly, as does cfg.K_override.

    K only enters the reported majorant bounds, never the iteration.

    Returns
    -------
    K: float
    """
    if cfg.K_override is not None:
        return float(cfg.K_override)
    if f.metadata.get('lipschitz_K') is not None:
        return float(f.metadata['lipschitz_K'])
    span = _tube_span(tube, L)
    points = _tube_points(f, tube, span, cfg)
    jac = jacobian(f, points)
    return (1 + cfg.margin) * float(np.max(induced_sup_norm(jac)))


def existence_interval(b, M):
    """
    Half-width sqrt(2b / M) of the interval on which the iterates are
    guaranteed to stay within b of the seed.

    Parameters
    ----------
    b: float
        Tube radius, > 0

    M: float
        Bound on |f| over the tube, >= 0

    Returns
    -------
    L: float
        np.inf when M == 0; the caller must then cap the interval
    """
    if not b > 0:
        raise ValueError(f"Tube radius must be positive, not {b}")
    if M < 0:
        raise ValueError(f"Field bound must be non-negative, not {M}")
    if M == 0:
        return np.inf
    return float(np.sqrt(2 * b / M))


def resolve_interval(f, tube, cfg, max_rounds=50, rtol=1e-6):
    """
    Find a half-width L and a bound M of |f| over the tube of that length
    with L <= sqrt(2b/M).

    For a stationary seed the tube does not depend on L and one estimate
    suffices. For a moving seed M is re-estimated on the tube of the
    current candidate length and the candidate shrunk until the two agree,
    always keeping the smaller value so the estimate covers the final tube.

    Returns
    -------
    L: float
        May be np.inf if the field vanishes on the tube and no cap is set

    M: float
    """
    cap = np.inf if cfg.L_cap is None else float(cfg.L_cap)
    if cfg.M_override is not None or not np.any(tube.eta):
        # the estimate cannot depend on the interval here
        M = estimate_bound_M(f, tube, cap if np.isfinite(cap) else 0.0, cfg)
        return min(existence_interval(tube.b, M), cap), M

    candidate = cap
    if not np.isfinite(candidate):
        M0 = estimate_bound_M(f, tube.shifted(tube.t0, tube.y0,
                                              np.zeros_like(tube.eta)),
                              0.0, cfg)
        candidate = existence_interval(tube.b, M0)
        if not np.isfinite(candidate):
            return np.inf, M0

    for _ in range(max_rounds):
        M = estimate_bound_M(f, tube, candidate, cfg)
        L = min(existence_interval(tube.b, M), cap)
        if L >= candidate:
            return candidate, M
        if candidate - L <= rtol * candidate:
            return L, M
        candidate = L
    return L, M


def seed_trajectory(f, tube, L, n_half):
    """The affine seed sampled on the mirrored grid of half-width L."""
    tau = mirrored_grid(L, n_half)
    y = tube.seed(tau)
    yp = np.broadcast_to(tube.eta, y.shape).copy()
    return Trajectory(tube.t0, tau, y, yp, field_name=f.name, L=L)


def picard_step(phi_j, f, tube):
    """
    One successive approximation.

    f is evaluated once at every grid point of phi_j; the inner and outer
    integrals are accumulated outwards from t0 separately on each side.

    Parameters
    ----------
    phi_j: Trajectory
        The current iterate, on a grid mirrored about t0

    f: VectorField
        The field

    tube: DomainTube
        The domain around the seed

    Returns
    -------
    phi_next: Trajectory
        With velocities eta + int_0^t f(phi_j)
    """
    tau = phi_j.tau
    check_mirrored(tau)
    g = f(phi_j.y)
    inner = centred_cumulative(g, tau)
    outer = centred_cumulative(inner, tau)
    y = tube.seed(tau) + outer
    yp = tube.eta + inner
    distance = tube.distance(tau, y)
    slack = 64 * np.finfo(float).eps * max(tube.b, sup_norm(y))
    if distance > tube.b + slack:
        raise ContainmentError(f"Iterate left the tube: distance {distance:.6g}"
                               f" from the seed exceeds b = {tube.b:g}. The "
                               "interval is longer than the bound on f allows")
    return Trajectory(phi_j.t0, tau, y, yp, field_name=phi_j.field_name,
                      L=phi_j.L)


def majorant_bound(M, K, j, t):
    """
    The bound M K^{j-1} t^{2j} / (2j)! on the j-th increment
    |phi_j - phi_{j-1}|.

    For K = 0 (a constant field) only the first term, M t^2 / 2, is
    non-zero.

    Parameters
    ----------
    M: float
        Bound on |f|

    K: float
        Lipschitz constant

    j: int
        Iteration index, >= 1

    t: float
        Time offset from t0

    Returns
    -------
    bound: float
    """
    if j < 1:
        raise ValueError(f"Iteration index must be at least 1, not {j}")
    if M < 0 or K < 0:
        raise ValueError("M and K must be non-negative")
    t = abs(t)
    if M == 0 or t == 0:
        return 0.0
    if K == 0:
        return 0.5 * M * t**2 if j == 1 else 0.0
    log_term = (np.log(M) + (j - 1) * np.log(K) + 2 * j * np.log(t)
                - gammaln(2 * j + 1))
    return float(np.exp(log_term))


def majorant_sum(M, K, t):
    """
    The sum over j of majorant_bound(M, K, j, t),
    (M/K) (cosh(sqrt(K) t) - 1), or M t^2 / 2 when K = 0.
    """
    if M < 0 or K < 0:
        raise ValueError("M and K must be non-negative")
    if K == 0:
        return 0.5 * M * t**2
    # cosh(x) - 1 = 2 sinh(x/2)^2 without cancellation
    return float(2 * M / K * np.sinh(0.5 * np.sqrt(K) * abs(t))**2)


def majorant_table(report):
    """
    Increments and their majorant bounds as an astropy table, one row per
    iteration, with a column flagging whether the bound (plus the
    quadrature floor) holds.
    """
    n = report.iterations_run
    inc = np.array(report.increments, dtype=float)
    bound = np.array(report.majorant_terms, dtype=float)
    table = Table()
    table['iteration'] = np.arange(1, n + 1)
    table['increment'] = inc
    table['majorant'] = bound
    table['dominated'] = inc <= bound + report.quadrature_floor
    table.meta['M'] = report.M_used
    table.meta['K'] = report.K_used
    table.meta['L'] = report.L_used
    table.meta['FLOOR'] = report.quadrature_floor
    table.meta['PSI'] = majorant_sum(report.M_used, report.K_used,
                                     report.L_used)
    return table


def _initial_state(traj):
    if not traj.is_symmetric:
        raise GridSymmetryError("Residuals need a trajectory on a grid "
                                "mirrored about t0")
    c = len(traj) // 2
    return traj.y[c], traj.yp[c]


def integral_residual(traj, f):
    """
    Sup-norm defect of phi = phi0 + double integral of f(phi).

    The seed phi0 is rebuilt from the position and velocity the trajectory
    holds at t0.

    Parameters
    ----------
    traj: Trajectory
        On a grid mirrored about t0

    f: VectorField

    Returns
    -------
    residual: float
    """
    y0, eta = _initial_state(traj)
    tube = DomainTube(y0, eta, t0=traj.t0)
    outer = centred_cumulative(centred_cumulative(f(traj.y), traj.tau),
                               traj.tau)
    return float(sup_norm(traj.y - tube.seed(traj.tau) - outer))


def second_derivative(y, h):
    """
    Central second differences inside, one-sided four-point formulas at
    the two ends.
    """
    if len(y) < 4:
        raise ValueError("Need at least 4 points for second differences")
    ypp = np.empty_like(y)
    ypp[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2
    ypp[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / h**2
    ypp[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / h**2
    return ypp


def ode_residual(traj, f):
    """
    Sup-norm of phi'' - f(phi) with finite-difference phi''.

    Parameters
    ----------
    traj: Trajectory
        On a uniform grid of at least 4 points

    f: VectorField

    Returns
    -------
    residual: float
    """
    h = check_uniform(traj.tau)
    return float(sup_norm(second_derivative(traj.y, h) - f(traj.y)))


def energy_drift(traj, f):
    """
    Relative spread of the energy 1/2 sum m_i y'_i^2 + V(y) along a
    trajectory, normalized by the largest kinetic plus absolute potential
    energy seen.
    """
    V = f.potential(traj.y)
    kinetic = 0.5 * np.sum(f.masses * traj.yp**2, axis=-1)
    E = kinetic + V
    scale = max(float(np.max(kinetic + np.abs(V))), np.finfo(float).tiny)
    return float((np.max(E) - np.min(E)) / scale)


def _warn_parity(traj, f, tube):
    scale = 1e-12 * max(1.0, sup_norm(traj.y))
    if not np.any(tube.eta):
        defect = sup_norm(traj.y - traj.y[::-1])
        if defect > scale:
            warnings.warn(f"Solution of '{f.name}' with zero initial velocity "
                          f"has even defect {defect:.3g}")
    elif not np.any(tube.y0) and f.declared_parity == 'odd':
        defect = sup_norm(traj.y + traj.y[::-1])
        if defect > scale:
            warnings.warn(f"Solution of odd field '{f.name}' from the origin "
                          f"has odd defect {defect:.3g}")


def solve_ivp(f, tube, cfg=None):
    """
    Solve y'' = f(y) with the initial data of the tube by successive
    approximations on |t - t0| <= L.

    L is the existence interval sqrt(2b/M), capped by cfg.L_cap. The
    iteration starts from the affine seed and stops when the increment
    reaches cfg.stop_tol, when it reaches the rounding floor of the
    quadrature, or after cfg.max_iterations. Running out of iterations
    is reported with a warning and converged=False.

    Parameters
    ----------
    f: VectorField
        The field

    tube: DomainTube
        Initial data (y0, eta, t0) and tube radius b

    cfg: PicardConfig or None
        Solver settings; defaults if None

    Returns
    -------
    traj: Trajectory

    report: ConvergenceReport
    """
    if cfg is None:
        cfg = PicardConfig()
    if tube.dimension != f.dimension:
        raise ValueError(f"Initial data have dimension {tube.dimension} but "
                         f"field '{f.name}' has dimension {f.dimension}")
    L, M = resolve_interval(f, tube, cfg)
    if not np.isfinite(L):
        raise ValueError(f"Field '{f.name}' vanishes on the tube, so the "
                         "existence interval is unbounded; set L_cap")
    K = estimate_lipschitz_K(f, tube, L, cfg)
    report = ConvergenceReport(M, K, tube.b, L)

    phi = seed_trajectory(f, tube, L, cfg.grid_points_per_half)
    eps = np.finfo(float).eps
    for j in range(1, cfg.max_iterations + 1):
        nxt = picard_step(phi, f, tube)
        increment = float(sup_norm(nxt.y - phi.y))
        phi = nxt
        report.increments.append(increment)
        report.majorant_terms.append(majorant_bound(M, K, j, L))
        report.containment.append(tube.distance(phi.tau, phi.y))
        floor = QUADRATURE_FLOOR_FACTOR * eps * sup_norm(phi.y)
        report.quadrature_floor = floor
        if increment <= cfg.stop_tol:
            report.stop_reason = stop_reasons.stop_tol
            break
        if increment <= floor:
            report.stop_reason = stop_reasons.quadrature_floor
            break
    else:
        report.stop_reason = stop_reasons.max_iterations

    report.converged = report.stop_reason != stop_reasons.max_iterations
    if not report.converged:
        warnings.warn(f"Successive approximations for '{f.name}' did not "
                      f"converge in {cfg.max_iterations} iterations (last "
                      f"increment {report.increments[-1]:.3g})")
    report.final_integral_residual = integral_residual(phi, f)
    report.final_ode_residual = ode_residual(phi, f)
    _warn_parity(phi, f, tube)
    return phi, report


FIRST_STEPS_WEIGHTS = np.array([29.0, 124.0, 24.0, 4.0, -1.0]) / 90


def velocity_carried_back(traj, f, direction):
    """
    The velocity at t0 recovered from the samples off t0.

    The velocity two steps from t0 in the given direction is carried back
    by subtracting the integral of f over those steps, taken over the
    quartic through the first five samples. For a solution of
    y'' = f(y) this matches the velocity held at t0 to sixth order in
    the spacing.

    Parameters
    ----------
    traj: Trajectory
        On a grid mirrored about t0 with at least 4 points per side

    f: VectorField

    direction: int
        1 to carry back from t0 + 2h, -1 from t0 - 2h

    Returns
    -------
    velocity: array
        Shape (n,)
    """
    c = len(traj) // 2
    h = direction * (traj.tau[c + 1] - traj.tau[c])
    nodes = c + direction * np.arange(len(FIRST_STEPS_WEIGHTS))
    integral = h * (FIRST_STEPS_WEIGHTS @ f(traj.y[nodes]))
    return traj.yp[c + 2 * direction] - integral


def global_extend(f, tube, cfg, T_target, max_steps=10000):
    """
    Extend a solution to |t - t0| <= T_target by restarting.

    Each step solves on the existence interval around the current state
    (capped at the remaining distance), keeps the half that points away
    from t0, and restarts from the position and velocity reached at its
    end. At each join the velocity the previous step ended with is
    compared with the one the new step carries back to its start, and
    the sup-norm difference is kept as the stitch jump. The two directions
    are extended independently. If a step trips a domain guard the extension in that direction stops and the partial
    result carries an annotation.

    Parameters
    ----------
    f: VectorField

    tube: DomainTube
        Initial data and the tube radius used at every step

    cfg: PicardConfig
        Settings of each step

    T_target: float
        Half-width to cover, > 0

    max_steps: int
        Limit on steps per direction

    Returns
    -------
    traj: Trajectory
        On the stitched grid, with stitch records (time, velocity jump)
    """
    if cfg is None:
        cfg = PicardConfig()
    if not T_target > 0:
        raise ValueError(f"Target half-width must be positive, not {T_target}")
    cap = np.inf if cfg.L_cap is None else cfg.L_cap
    pieces = {}
    notes = []
    stitches = []
    for direction in (1, -1):
        t, y0, eta = tube.t0, tube.y0, tube.eta
        covered = 0.0
        chunks = []
        steps = 0
        previous_velocity = None
        while covered < T_target:
            if steps >= max_steps:
                notes.append(f"stopped after {max_steps} steps at t={t:.17g}")
                break
            remaining = T_target - covered
            step_cfg = cfg.replace(L_cap=min(cap, remaining))
            step_tube = tube.shifted(t, y0, eta)
            try:
                traj, report = solve_ivp(f, step_tube, step_cfg)
            except DomainGuardError as err:
                notes.append(f"domain guard tripped in the step from "
                             f"t={t:.17g}: {err}")
                break
            c = len(traj) // 2
            if direction > 0:
                part = slice(c, None)
            else:
                part = slice(c, None, -1)
            offsets = (t - tube.t0) + traj.tau[part]
            chunks.append((offsets, traj.y[part], traj.yp[part]))
            if previous_velocity is not None:
                carried = velocity_carried_back(traj, f, direction)
                stitches.append((t, float(sup_norm(carried
                                                   - previous_velocity))))
            if traj.L >= remaining:
                covered = T_target
            else:
                covered += traj.L
            end = -1 if direction > 0 else 0
            t = t + direction * traj.L
            y0, eta = traj.y[end], traj.yp[end]
            previous_velocity = eta
            steps += 1
        pieces[direction] = chunks

    tau, y, yp = [], [], []
    for offsets, ys, yps in reversed(pieces[-1]):
        tau.append(offsets[::-1][:-1])
        y.append(ys[::-1][:-1])
        yp.append(yps[::-1][:-1])
    # both directions start at t0; keep that point once
    for k, (offsets, ys, yps) in enumerate(pieces[1]):
        start = 0 if k == 0 else 1
        tau.append(offsets[start:])
        y.append(ys[start:])
        yp.append(yps[start:])
    if not pieces[1] and not pieces[-1]:
        raise DomainGuardError(f"Could not take a single step: {notes[0]}")
    if not pieces[1]:
        # t0 itself then comes from the first backward step
        offsets, ys, yps = pieces[-1][0]
        tau.append(offsets[:1])
        y.append(ys[:1])
        yp.append(yps[:1])
    tau = np.concatenate(tau)
    y = np.concatenate(y)
    yp = np.concatenate(yp)
    result = Trajectory(tube.t0, tau, y, yp, field_name=f.name,
                        annotations=notes)
    result.stitches = sorted(stitches)
    for note in notes:
        warnings.warn(f"Global extension of '{f.name}' is partial: {note}")
    return result
