import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.stats import qmc


class GridSymmetryError(ValueError):
    """A time grid is not mirrored about its centre (or not uniform
    where a finite-difference stencil needs it to be)."""


class DomainGuardError(ValueError):
    """A vector field was evaluated inside its guarded singular set.

    Attributes
    ----------
    point: array
        The offending point, or None if unknown.
    """
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.array(point)


class CollisionObstructionError(DomainGuardError):
    """Odd solutions were requested for a field that is singular at
    the origin, where every body would sit in mutual collision."""


class ParityError(ValueError):
    """A field or a constructed run failed a parity requirement.

    Attributes
    ----------
    defect: float
        The measured defect that triggered the error.
    """
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ContainmentError(RuntimeError):
    """A successive approximation left the domain tube around the seed."""


class Namespace:
    """
    A string enum: each attribute holds its own name. Used for parity
    labels, run kinds and stop reasons so they compare as plain strings.

    N = Namespace('even', 'odd')

    assert N.even=='even'

    assert N['odd']=='odd'

    assert N.index('odd')==1
    """
    def __init__(self, *strings):
        """
        Create the object from a list of strings, which will become attributes
        """
        self._index = {}
        n = 0
        for s in strings:
            self.__dict__[s] = s
            self._index[s] = n
            n += 1

    def __contains__(self, s):
        return s in self._index

    def __getitem__(self, s):
        return getattr(self, s)

    def __iter__(self):
        return iter(self._index)

    def __str__(self):
        return "\n".join(f"- {s}" for s in self._index)

    def index(self, s):
        return self._index[s]


parity_classes = Namespace('even', 'odd', 'neither', 'unknown')


def mirrored_grid(half_width, n_half):
    """
    Build a grid of 2 n_half + 1 points on [-half_width, half_width]
    whose negative half is the exact negation of the positive half.

    Parameters
    ----------
    half_width: float
        Half-width of the interval, > 0

    n_half: int
        Number of subintervals on each side of zero, >= 1

    Returns
    -------
    grid: array
        Strictly increasing, with grid[k] + grid[-k-1] == 0 bit-exactly
    """
    if not half_width > 0:
        raise ValueError(f"Grid half-width must be positive, not {half_width}")
    n_half = int(n_half)
    if n_half < 1:
        raise ValueError(f"Need at least one subinterval per side, not {n_half}")
    pos = np.linspace(0.0, half_width, n_half + 1)
    return np.concatenate((-pos[:0:-1], pos))


def check_mirrored(grid):
    """
    Raise a GridSymmetryError unless grid is strictly increasing,
    of odd length, and mirrored about its centre point.

    Parameters
    ----------
    grid: array
        Grid to check

    Returns
    -------
    n_half: int
        Index of the centre point
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) % 2 != 1 or len(grid) < 3:
        raise GridSymmetryError("A symmetric grid must be 1D with an odd "
                                f"number (>= 3) of points, got shape {grid.shape}")
    if not np.all(np.diff(grid) > 0):
        raise GridSymmetryError("Grid is not strictly increasing")
    if not np.all(grid + grid[::-1] == 0):
        worst = np.max(np.abs(grid + grid[::-1]))
        raise GridSymmetryError("Grid is not mirrored about zero "
                                f"(largest t_k + t_-k = {worst:g})")
    return len(grid) // 2


def check_uniform(grid, rtol=1e-9):
    """
    Raise a GridSymmetryError unless grid spacing is constant.

    Returns
    -------
    h: float
        The grid spacing
    """
    grid = np.asarray(grid, dtype=float)
    h = (grid[-1] - grid[0]) / (len(grid) - 1)
    if not np.allclose(np.diff(grid), h, rtol=rtol, atol=0):
        raise GridSymmetryError("Finite-difference stencils need a "
                                "uniform grid")
    return h


def centred_cumulative(values, grid):
    """
    Cumulative Simpson integral from the centre of a mirrored grid.

    The positive half is accumulated from 0 towards +t. The negative half
    is accumulated from 0 towards -t over the same abscissae, read outwards,
    and negated.  No sweep ever crosses the centre, so an even integrand
    gives a bit-exactly odd result and vice versa.

    Parameters
    ----------
    values: array
        Shape (2N+1,) or (2N+1, n) samples of the integrand

    grid: array
        Mirrored grid of length 2N+1

    Returns
    -------
    integral: array
        Same shape as values, zero at the centre
    """
    values = np.asarray(values, dtype=float)
    c = len(grid) // 2
    x = grid[c:]
    right = cumulative_simpson(values[c:], x=x, axis=0, initial=0)
    left = -cumulative_simpson(values[c::-1], x=x, axis=0, initial=0)
    return np.concatenate((left[:0:-1], right))


def sup_norm(a, axis=None):
    """Max (l-infinity) norm, the working norm of the whole package."""
    a = np.abs(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0.0
    return np.max(a, axis=axis)


def induced_sup_norm(jac):
    """Induced l-infinity norm (max absolute row sum) of a stack of
    square matrices with shape (..., n, n)."""
    return np.max(np.sum(np.abs(jac), axis=-1), axis=-1)


def halton_cube(dim, samples, seed):
    """
    Scrambled Halton points in the cube [-1, 1]^dim.

    Parameters
    ----------
    dim: int
        Dimension

    samples: int
        Number of points

    seed: int
        Seed for the scrambling, so the points are reproducible

    Returns
    -------
    points: array
        Shape (samples, dim)
    """
    engine = qmc.Halton(d=dim, scramble=True, seed=seed)
    return 2.0 * engine.random(samples) - 1.0


def cube_corners(dim, max_dim=10):
    """
    The 2^dim vertices of [-1, 1]^dim plus the centre, or just the
    centre and the 2 dim axis points when dim > max_dim.

    Sampled suprema of |f| over a cube are mostly attained on its
    boundary, so estimators always include these points.
    """
    if dim <= max_dim:
        grids = np.meshgrid(*([[-1.0, 1.0]] * dim), indexing='ij')
        corners = np.stack([g.ravel() for g in grids], axis=-1)
    else:
        eye = np.eye(dim)
        corners = np.concatenate((eye, -eye))
    return np.concatenate((np.zeros((1, dim)), corners))
