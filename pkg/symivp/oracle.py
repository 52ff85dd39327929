"""
Fixed-step fourth-order Runge-Kutta integration of y'' = f(y), written as
the first-order system z = (y, y'), z' = (y', f(y)).  It shares nothing
with the successive-approximation solver and serves as its reference.
"""
import numpy as np

from .trajectory import Trajectory
from .utils import DomainGuardError, sup_norm


class OracleConfig:
    """
    Settings of the reference integrator.

    Parameters
    ----------
    h: float
        Step size, > 0; the direction of integration comes from the span

    method: str
        Only 'rk4' is available
    """
    methods = ('rk4',)

    def __init__(self, h=1e-4, method='rk4'):
        if not h > 0:
            raise ValueError(f"Step size must be positive, not {h}")
        if method not in self.methods:
            raise ValueError(f"Unknown integration method '{method}'; "
                             f"available: {self.methods}")
        self.h = float(h)
        self.method = method

    def __repr__(self):
        return f"OracleConfig(h={self.h!r}, method={self.method!r})"


def _stage(f, y, step, stage):
    try:
        return f(y)
    except DomainGuardError as err:
        raise DomainGuardError(f"stage {stage} of step {step}: {err}",
                               point=err.point) from err


def rk4_solve(f, y0, eta, t0, span, cfg=None):
    """
    Integrate from t0 to t0 + span with classical RK4.

    The number of steps is ceil(|span| / h), with the step shrunk so the
    last one lands exactly on t0 + span. Negative spans integrate
    backwards in time. The field guard is checked at every stage; if it
    trips, the trajectory up to the last completed step is returned with
    an annotation naming the step, the stage and the last safe time.

    Parameters
    ----------
    f: VectorField

    y0: array
        Initial position

    eta: array
        Initial velocity

    t0: float
        Initial time

    span: float
        Signed length of the integration

    cfg: OracleConfig or None

    Returns
    -------
    traj: Trajectory
        Always with increasing offsets from t0, so a backward run ends at
        its first point
    """
    if cfg is None:
        cfg = OracleConfig()
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    v = np.atleast_1d(np.asarray(eta, dtype=float)).copy()
    if y.shape != (f.dimension,) or v.shape != y.shape:
        raise ValueError(f"Initial data of shapes {y.shape}, {v.shape} do not "
                         f"match field '{f.name}' of dimension {f.dimension}")
    nstep = int(np.ceil(abs(span) / cfg.h)) if span != 0 else 0
    dt = span / nstep if nstep else 0.0

    tau = [0.0]
    ys = [y.copy()]
    vs = [v.copy()]
    notes = []
    for i in range(nstep):
        try:
            k1y, k1v = v, _stage(f, y, i, 1)
            k2y, k2v = v + 0.5 * dt * k1v, _stage(f, y + 0.5 * dt * k1y, i, 2)
            k3y, k3v = v + 0.5 * dt * k2v, _stage(f, y + 0.5 * dt * k2y, i, 3)
            k4y, k4v = v + dt * k3v, _stage(f, y + dt * k3y, i, 4)
        except DomainGuardError as err:
            notes.append(f"guard tripped at {err}; last safe time "
                         f"t={t0 + tau[-1]:.17g}")
            break
        y = y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        # (i + 1) * dt rather than a running sum keeps the end exact
        tau.append(span if i == nstep - 1 else (i + 1) * dt)
        ys.append(y)
        vs.append(v)

    tau = np.array(tau)
    ys = np.array(ys)
    vs = np.array(vs)
    if span < 0:
        tau, ys, vs = tau[::-1], ys[::-1], vs[::-1]
    return Trajectory(t0, tau, ys, vs, field_name=f.name, annotations=notes)


def compare(a, b):
    """
    Sup-norm deviation between two trajectories over the overlap of
    their time ranges.

    The trajectory with the finer spacing is linearly interpolated onto
    the times of the coarser one that fall inside the overlap.

    Parameters
    ----------
    a, b: Trajectory

    Returns
    -------
    position_deviation: float

    velocity_deviation: float
    """
    if a.dimension != b.dimension:
        raise ValueError(f"Cannot compare trajectories of dimension "
                         f"{a.dimension} and {b.dimension}")
    ta, tb = a.times, b.times
    lo = max(ta[0], tb[0])
    hi = min(ta[-1], tb[-1])
    if lo > hi:
        raise ValueError(f"Trajectories do not overlap: [{ta[0]:g}, "
                         f"{ta[-1]:g}] and [{tb[0]:g}, {tb[-1]:g}]")

    def spacing(t):
        return np.median(np.diff(t)) if len(t) > 1 else np.inf

    coarse, fine = (a, b) if spacing(ta) >= spacing(tb) else (b, a)
    tc = coarse.times
    keep = (tc >= lo) & (tc <= hi)
    if not np.any(keep):
        raise ValueError("No sample times of the coarser trajectory lie in "
                         "the overlap")
    t = tc[keep]
    tf = fine.times
    deviations = []
    for mine, theirs in ((coarse.y, fine.y), (coarse.yp, fine.yp)):
        interp = np.stack([np.interp(t, tf, theirs[:, i])
                           for i in range(coarse.dimension)], axis=-1)
        deviations.append(float(sup_norm(mine[keep] - interp)))
    return tuple(deviations)
