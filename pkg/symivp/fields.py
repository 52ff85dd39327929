import numpy as np

from .utils import (DomainGuardError, parity_classes, halton_cube,
                    cube_corners, sup_norm)


class VectorField:
    """
    The right-hand side f of an autonomous system y'' = f(y).

    The evaluation function works on stacks of points: given an array
    of shape (..., n) it returns an array of the same shape. Fields that
    can only handle one point at a time should pass vectorized=False.

    Fields must be pure functions of their input: solvers evaluate them
    from several threads and rely on repeated evaluations agreeing.

    Parameters
    ----------
    name: str
        Identifier, usually the catalog name

    dimension: int
        The n of y in R^n

    func: callable
        Map from points (..., n) to accelerations (..., n)

    potential: callable or None
        Potential energy V with f = -grad(V) / masses, mapping (..., n)
        points to (...) scalars

    masses: array or None
        Per-coordinate inertia used with the potential; ones if None

    declared_parity: str
        One of 'even', 'odd', 'neither', 'unknown'

    guard: callable or None
        Map from points (..., n) to a boolean array (...) which is True
        where the field is undefined (e.g. colliding bodies)

    guard_eps: float
        The guard radius, recorded for reporting

    ball_guard: callable or None
        Map (center, radius) to True when the max-norm ball of that radius
        around center reaches the guarded set

    vectorized: bool
        Whether func/potential/guard accept stacks of points

    metadata: dict or None
        Extra information, e.g. a pinned 'lipschitz_K'
    """

    def __init__(self, name, dimension, func, potential=None, masses=None,
                 declared_parity='unknown', guard=None, guard_eps=0.0,
                 ball_guard=None, vectorized=True, metadata=None):
        if declared_parity not in parity_classes:
            raise ValueError(f"Unknown parity class '{declared_parity}'. "
                             f"Use one of:\n{parity_classes}")
        dimension = int(dimension)
        if dimension < 1:
            raise ValueError("Field dimension must be at least 1")
        if guard_eps < 0:
            raise ValueError("Guard radius must be non-negative")
        self.name = name
        self.dimension = dimension
        self.declared_parity = declared_parity
        self.guard_eps = guard_eps
        self.metadata = {} if metadata is None else metadata
        self.masses = (np.ones(dimension) if masses is None
                       else np.asarray(masses, dtype=float))
        self._func = func
        self._potential = potential
        self._guard = guard
        self._ball_guard = ball_guard
        self._vectorized = vectorized

    def __repr__(self):
        return (f"VectorField('{self.name}', dimension={self.dimension}, "
                f"parity='{self.declared_parity}')")

    @property
    def has_potential(self):
        return self._potential is not None

    def _points(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 0 or y.shape[-1] != self.dimension:
            # scalar systems may be handed plain floats or flat arrays
            if self.dimension == 1:
                y = y[..., np.newaxis]
            else:
                raise ValueError(f"Field '{self.name}' has dimension "
                                 f"{self.dimension}, got points of shape "
                                 f"{y.shape}")
        return y

    def _apply(self, func, y):
        if self._vectorized:
            return np.asarray(func(y), dtype=float)
        flat = y.reshape(-1, self.dimension)
        out = np.array([func(row) for row in flat], dtype=float)
        return out.reshape(y.shape[:-1] + out.shape[1:])

    def guarded(self, y):
        """
        Boolean mask of points inside the guarded set.

        Parameters
        ----------
        y: array
            Points of shape (..., n)

        Returns
        -------
        mask: array
            Boolean array of shape (...)
        """
        y = self._points(y)
        if self._guard is None:
            return np.zeros(y.shape[:-1], dtype=bool)
        return np.asarray(self._apply(self._guard, y), dtype=bool)

    def check_guard(self, y):
        """
        Raise a DomainGuardError naming the first guarded point, if any.
        """
        y = self._points(y)
        mask = self.guarded(y)
        if np.any(mask):
            bad = y[mask][0] if mask.ndim else y
            raise DomainGuardError(f"Field '{self.name}' is undefined at "
                                   f"{np.array2string(bad, precision=6)} "
                                   f"(guard radius {self.guard_eps:g})",
                                   point=bad)

    def check_ball(self, center, radius):
        """
        Raise a DomainGuardError if the ball of given radius around center
        reaches the guarded set. Fields with a ball guard test the whole
        ball, not only its centre.
        """
        center = self._points(center).reshape(self.dimension)
        if self.guarded(center):
            self.check_guard(center)
        if self._ball_guard is not None and self._ball_guard(center, radius):
            raise DomainGuardError(f"Field '{self.name}' is undefined inside "
                                   f"the ball of radius {radius:g} around "
                                   f"{np.array2string(center, precision=6)} "
                                   f"(guard radius {self.guard_eps:g})",
                                   point=center)

    def __call__(self, y):
        """
        Evaluate the field, raising DomainGuardError inside the guard.

        Parameters
        ----------
        y: array
            Points of shape (..., n), or a float for scalar systems

        Returns
        -------
        f: array
            Accelerations, same shape as the (promoted) input
        """
        y = self._points(y)
        self.check_guard(y)
        out = self._apply(self._func, y)
        if out.shape != y.shape:
            raise ValueError(f"Field '{self.name}' returned shape "
                             f"{out.shape} for input {y.shape}")
        return out

    def potential(self, y):
        """
        The potential energy V(y), so that f = -grad(V) / masses.
        """
        if self._potential is None:
            raise ValueError(f"Field '{self.name}' has no potential")
        y = self._points(y)
        self.check_guard(y)
        return self._apply(self._potential, y)

    def energy(self, y, yp):
        """
        Total energy: kinetic 1/2 sum m_i yp_i^2 plus V(y).

        Parameters
        ----------
        y: array
            Positions (..., n)
        yp: array
            Velocities (..., n)

        Returns
        -------
        E: array
            Shape (...)
        """
        yp = self._points(yp)
        kinetic = 0.5 * np.sum(self.masses * yp**2, axis=-1)
        return kinetic + self.potential(y)

    def check_potential(self, center, radius, samples=64, seed=0, rtol=1e-5):
        """
        Compare a central finite-difference gradient of the potential
        with -masses * f at seeded points of the cube of given radius.

        Returns
        -------
        worst: float
            The largest relative mismatch found

        Raises
        ------
        ValueError
            If the mismatch exceeds rtol anywhere
        """
        center = np.asarray(center, dtype=float).reshape(self.dimension)
        pts = center + radius * halton_cube(self.dimension, samples, seed)
        n = self.dimension
        steps = 1e-6 * np.maximum(1.0, np.abs(pts))
        grad = np.empty_like(pts)
        for i in range(n):
            shift = np.zeros_like(pts)
            shift[:, i] = steps[:, i]
            grad[:, i] = (self.potential(pts + shift)
                          - self.potential(pts - shift)) / (2 * steps[:, i])
        force = -self.masses * self(pts)
        scale = np.maximum(1.0, sup_norm(force, axis=-1))
        mismatch = sup_norm(grad - force, axis=-1) / scale
        worst = float(np.max(mismatch))
        if worst > rtol:
            raise ValueError(f"Potential of '{self.name}' is inconsistent "
                             f"with its field: relative gradient mismatch "
                             f"{worst:.3g} > {rtol:g}")
        return worst


class DomainTube:
    """
    The region D = { y : |y - phi0(t)| <= b } around the affine seed
    phi0(t) = y0 + (t - t0) eta.

    Parameters
    ----------
    y0: array
        Initial position

    eta: array
        Initial velocity; zeros if None

    t0: float
        Initial time

    b: float
        Tube radius, > 0, in the max norm
    """

    def __init__(self, y0, eta=None, t0=0.0, b=1.0):
        self.y0 = np.atleast_1d(np.asarray(y0, dtype=float))
        if eta is None:
            eta = np.zeros_like(self.y0)
        self.eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if self.y0.ndim != 1 or self.eta.shape != self.y0.shape:
            raise ValueError("y0 and eta must be vectors of the same length, "
                             f"got {self.y0.shape} and {self.eta.shape}")
        if not b > 0:
            raise ValueError(f"Tube radius b must be positive, not {b}")
        self.t0 = float(t0)
        self.b = float(b)

    def __repr__(self):
        return (f"DomainTube(y0={self.y0.tolist()}, eta={self.eta.tolist()}, "
                f"t0={self.t0}, b={self.b})")

    @property
    def dimension(self):
        return len(self.y0)

    def seed(self, tau):
        """
        The seed curve phi0 at offsets tau = t - t0.

        Parameters
        ----------
        tau: array
            Time offsets, shape (m,)

        Returns
        -------
        phi0: array
            Shape (m, n)
        """
        tau = np.asarray(tau, dtype=float)
        return self.y0 + tau[:, np.newaxis] * self.eta

    def distance(self, tau, y):
        """Sup-norm distance of a sampled curve from the seed."""
        return sup_norm(np.asarray(y) - self.seed(tau))

    def sample(self, half_width, samples, seed):
        """
        Seeded points filling the tube over |t - t0| <= half_width.

        The cube corners at the two ends and the centre are always
        included, followed by scrambled Halton points.

        Returns
        -------
        points: array
            Shape (m, n)
        """
        n = self.dimension
        corners = cube_corners(n)
        fixed = []
        for tau in ([0.0] if half_width == 0 else
                    [-half_width, 0.0, half_width]):
            fixed.append(self.y0 + tau * self.eta + self.b * corners)
        u = halton_cube(n + 1, samples, seed)
        taus = half_width * u[:, 0]
        free = self.y0 + taus[:, np.newaxis] * self.eta + self.b * u[:, 1:]
        return np.concatenate(fixed + [free])

    def shifted(self, t0, y0, eta):
        """A tube with the same radius restarted at a new state."""
        return self.__class__(y0, eta, t0=t0, b=self.b)
