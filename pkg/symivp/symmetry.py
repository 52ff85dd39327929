"""
Parity calculus of sampled functions and of multivariate fields.

Functions of time are held as SampledFunction objects on grids mirrored
about zero, and all defects are measured in the max norm.
"""
import numpy as np

from .utils import (parity_classes, check_mirrored, check_uniform,
                    centred_cumulative, halton_cube, sup_norm,
                    mirrored_grid, DomainGuardError)


DEFAULT_TOL = 1e-10


class SampledFunction:
    """
    A vector-valued function of time sampled on a grid mirrored about 0.

    Parameters
    ----------
    grid: array
        Strictly increasing times with t_{-k} + t_k == 0 exactly

    values: array
        Shape (len(grid),) or (len(grid), n)
    """

    def __init__(self, grid, values):
        self.grid = np.asarray(grid, dtype=float)
        check_mirrored(self.grid)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if values.ndim != 2 or len(values) != len(self.grid):
            raise ValueError(f"Need one value vector per grid point: grid "
                             f"has {len(self.grid)} points, values have "
                             f"shape {values.shape}")
        self.values = values

    @classmethod
    def from_callable(cls, func, half_width, n_half):
        """
        Sample func on the mirrored uniform grid of 2 n_half + 1 points
        spanning [-half_width, half_width].

        Parameters
        ----------
        func: callable
            Vectorized function of time, returning (m,) or (m, n) arrays

        half_width: float
            Half-width of the interval

        n_half: int
            Subintervals per half-axis

        Returns
        -------
        instance: SampledFunction
        """
        grid = mirrored_grid(half_width, n_half)
        return cls(grid, func(grid))

    def __len__(self):
        return len(self.grid)

    @property
    def dimension(self):
        return self.values.shape[1]

    def scaled(self, c):
        """A copy with all values multiplied by c."""
        return self.__class__(self.grid, c * self.values)


class ParityReport:
    """
    Even and odd defects of a sampled function or field, and the
    resulting classification.

    Attributes
    ----------
    even_defect: float
        max_k |v(t_k) - v(-t_k)|

    odd_defect: float
        max_k |v(t_k) + v(-t_k)|

    tol: float
        Tolerance used for the classification

    classification: str
        'even' if even_defect <= tol, otherwise 'odd' if
        odd_defect <= tol, otherwise 'neither'.  A function that
        is zero at every sample is classed as even.

    excluded: array
        Grid indices left out of the measurement (non-smooth points)
    """

    def __init__(self, even_defect, odd_defect, tol=DEFAULT_TOL,
                 excluded=None):
        self.even_defect = float(even_defect)
        self.odd_defect = float(odd_defect)
        self.tol = float(tol)
        self.excluded = (np.array([], dtype=int) if excluded is None
                         else np.asarray(excluded, dtype=int))
        self.classification = classify_defects(self.even_defect,
                                               self.odd_defect, self.tol)

    def __repr__(self):
        return (f"ParityReport({self.classification}, "
                f"even_defect={self.even_defect:.3g}, "
                f"odd_defect={self.odd_defect:.3g})")

    @property
    def is_even(self):
        return self.classification == parity_classes.even

    @property
    def is_odd(self):
        return self.classification == parity_classes.odd

    def to_dict(self):
        return {
            'even_defect': self.even_defect,
            'odd_defect': self.odd_defect,
            'tol': self.tol,
            'classification': self.classification,
            'excluded': self.excluded.tolist(),
        }


def classify_defects(even_defect, odd_defect, tol):
    if even_defect <= tol:
        return parity_classes.even
    if odd_defect <= tol:
        return parity_classes.odd
    return parity_classes.neither


class MonomialSpec:
    """
    The exponents (p_1, ..., p_N) of a monomial y_1^p_1 ... y_N^p_N.
    """

    def __init__(self, exponents):
        exponents = tuple(int(p) for p in exponents)
        if not exponents:
            raise ValueError("A monomial needs at least one exponent")
        if any(p < 0 for p in exponents):
            raise ValueError(f"Exponents must be non-negative: {exponents}")
        self.exponents = exponents

    def __call__(self, y):
        """Evaluate the monomial at points of shape (..., N)."""
        y = np.asarray(y, dtype=float)
        return np.prod(y ** np.array(self.exponents), axis=-1)


class StrictParityReport:
    """
    Parity of a scalar field under flips of single coordinates.

    Attributes
    ----------
    coordinates: list of ParityReport
        One report per coordinate, measured flipping that coordinate only

    ordinary: ParityReport
        The report for flipping all coordinates at once

    aggregate: str
        'even' if every coordinate is even, 'odd' if every coordinate is
        odd, otherwise 'neither'
    """

    def __init__(self, coordinates, ordinary):
        self.coordinates = list(coordinates)
        self.ordinary = ordinary
        classes = [c.classification for c in self.coordinates]
        if all(c == parity_classes.even for c in classes):
            self.aggregate = parity_classes.even
        elif all(c == parity_classes.odd for c in classes):
            self.aggregate = parity_classes.odd
        else:
            self.aggregate = parity_classes.neither

    @property
    def classifications(self):
        return [c.classification for c in self.coordinates]


def _defects(values, mirror, keep=None):
    if keep is not None:
        values = values[keep]
        mirror = mirror[keep]
    if len(values) == 0:
        return 0.0, 0.0
    return sup_norm(values - mirror), sup_norm(values + mirror)


def parity_defects(fn, tol=DEFAULT_TOL, exclude=None):
    """
    Measure how far a sampled function is from being even and odd.

    Parameters
    ----------
    fn: SampledFunction
        The function to measure

    tol: float
        Classification tolerance

    exclude: array or None
        Grid indices to leave out; their mirror images are left out too

    Returns
    -------
    report: ParityReport
    """
    check_mirrored(fn.grid)
    values = fn.values
    keep = None
    excluded = np.array([], dtype=int)
    if exclude is not None and len(exclude):
        m = len(values)
        mask = np.zeros(m, dtype=bool)
        mask[np.asarray(exclude, dtype=int)] = True
        mask |= mask[::-1]
        keep = ~mask
        excluded = np.flatnonzero(mask)
    even, odd = _defects(values, values[::-1], keep)
    return ParityReport(even, odd, tol, excluded=excluded)


def _require_points(fn, minimum=5):
    if len(fn) < minimum:
        raise ValueError(f"Need at least {minimum} grid points for "
                         f"quadrature or stencils, got {len(fn)}")


def antiderivative(fn):
    """
    G(t) = int_0^t phi(s) ds by centred cumulative Simpson quadrature.

    Returns
    -------
    G: SampledFunction
    """
    check_mirrored(fn.grid)
    _require_points(fn)
    return SampledFunction(fn.grid, centred_cumulative(fn.values, fn.grid))


def antiderivative_parity_check(fn, tol=DEFAULT_TOL):
    """
    Integrate once from zero and measure the parity of the result.

    An odd integrand gives an even antiderivative and vice versa.

    Parameters
    ----------
    fn: SampledFunction
        Integrand on a mirrored grid of at least 5 points

    tol: float
        Classification tolerance

    Returns
    -------
    G: SampledFunction
        The antiderivative vanishing at 0

    report: ParityReport
        Parity of G
    """
    G = antiderivative(fn)
    return G, parity_defects(G, tol)


def double_integral_parity_check(fn, tol=DEFAULT_TOL):
    """
    F(t) = int_0^t int_0^u phi(s) ds du, and its parity.

    F has the same parity as phi.

    Returns
    -------
    F: SampledFunction

    report: ParityReport
        Parity of F
    """
    F = antiderivative(antiderivative(fn))
    return F, parity_defects(F, tol)


def derivative(fn):
    """
    Second-order finite-difference derivative on a uniform mirrored grid.

    Central differences inside, one-sided three-point formulas at the ends.

    Returns
    -------
    dfn: SampledFunction

    kink: array
        Per-point disagreement |forward - backward| of the one-sided
        first differences (zero at the two end points)
    """
    check_mirrored(fn.grid)
    _require_points(fn)
    h = check_uniform(fn.grid)
    v = fn.values
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    # mirror image of the right-hand formula, so odd inputs give even outputs
    d[0] = -(3 * v[0] - 4 * v[1] + v[2]) / (2 * h)
    kink = np.zeros(len(v))
    forward = (v[2:] - v[1:-1]) / h
    backward = (v[1:-1] - v[:-2]) / h
    kink[1:-1] = sup_norm(forward - backward, axis=-1)
    return SampledFunction(fn.grid, d), kink


def non_smooth_points(fn, kink, factor=10.0):
    """
    Indices where the one-sided stencils disagree by more than factor
    times their median disagreement (with a floor at rounding level).
    """
    h = fn.grid[1] - fn.grid[0]
    interior = kink[1:-1]
    floor = 1e3 * np.finfo(float).eps * max(sup_norm(fn.values), 1.0) / h
    threshold = factor * np.median(interior) + floor
    return np.flatnonzero(kink > threshold)


def derivative_parity_check(fn, tol=DEFAULT_TOL):
    """
    Differentiate a sampled function and measure the parity of the result.

    The derivative of an even function is odd and vice versa. Points
    where the function is visibly non-smooth (its one-sided difference
    quotients disagree by much more than elsewhere) are left out of the
    classification, along with their mirror images.

    Parameters
    ----------
    fn: SampledFunction
        Function on a uniform mirrored grid of at least 5 points

    tol: float
        Classification tolerance

    Returns
    -------
    dfn: SampledFunction
        The derivative

    report: ParityReport
        Parity of the derivative
    """
    dfn, kink = derivative(fn)
    excluded = non_smooth_points(fn, kink)
    return dfn, parity_defects(dfn, tol, exclude=excluded)


def _ball_points(center, radius, samples, seed):
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if not radius > 0:
        raise ValueError(f"Sampling radius must be positive, not {radius}")
    return center + radius * halton_cube(len(center), samples, seed)


def _evaluate(func, points, name):
    try:
        return np.asarray(func(points), dtype=float)
    except DomainGuardError as err:
        raise DomainGuardError(f"Parity sampling of '{name}' hit an "
                               f"undefined point: {err}",
                               point=err.point) from err


def field_parity_report(f, center, radius, samples=256, tol=DEFAULT_TOL,
                        seed=0):
    """
    Sampled parity of a vector field f on a ball and its reflection.

    Points y are drawn from scrambled Halton points in the max-norm ball
    of given radius around center, and f is evaluated at each y and -y.

    Parameters
    ----------
    f: VectorField or callable
        The field; must be defined at every sampled y and -y

    center: array
        Centre of the sampling ball

    radius: float
        Radius of the ball in the max norm

    samples: int
        Number of sample pairs

    tol: float
        Classification tolerance

    seed: int
        Sampling seed

    Returns
    -------
    report: ParityReport
    """
    y = _ball_points(center, radius, samples, seed)
    name = getattr(f, 'name', repr(f))
    plus = _evaluate(f, y, name)
    minus = _evaluate(f, -y, name)
    even, odd = _defects(plus, minus)
    return ParityReport(even, odd, tol)


def classify_field_parity(f, center, radius, samples=256, tol=DEFAULT_TOL,
                          seed=0):
    """
    Classify a vector field as 'even', 'odd' or 'neither' by sampling.

    See field_parity_report for the parameters.

    Returns
    -------
    classification: str
    """
    return field_parity_report(f, center, radius, samples, tol,
                               seed).classification


def classify_strict_parity(H, center, radius, samples=256, tol=DEFAULT_TOL,
                           seed=0):
    """
    Parity of a scalar field in the strict sense: flipping one coordinate
    at a time.

    Parameters
    ----------
    H: callable
        Vectorized scalar field, mapping (m, N) points to (m,) values

    center, radius, samples, tol, seed:
        As for field_parity_report

    Returns
    -------
    report: StrictParityReport
    """
    y = _ball_points(center, radius, samples, seed)
    name = getattr(H, 'name', repr(H))
    base = _evaluate(H, y, name)
    reports = []
    for j in range(y.shape[1]):
        flipped = y.copy()
        flipped[:, j] = -flipped[:, j]
        even, odd = _defects(base, _evaluate(H, flipped, name))
        reports.append(ParityReport(even, odd, tol))
    even, odd = _defects(base, _evaluate(H, -y, name))
    return StrictParityReport(reports, ParityReport(even, odd, tol))


def classify_monomial_parity(m):
    """
    Parity of a monomial from its exponents alone.

    The monomial is even (ordinary sense) iff the total degree is even,
    even in the strict sense iff every exponent is even, and odd in the
    strict sense iff every exponent is odd.

    Parameters
    ----------
    m: MonomialSpec

    Returns
    -------
    ordinary: str
        'even' or 'odd'

    strict_even: bool

    strict_odd: bool
    """
    p = m.exponents
    ordinary = parity_classes.even if sum(p) % 2 == 0 else parity_classes.odd
    strict_even = all(e % 2 == 0 for e in p)
    strict_odd = all(e % 2 == 1 for e in p)
    return ordinary, strict_even, strict_odd
