"""
Registry of autonomous second-order systems y'' = f(y).

Each system is a subclass of BaseSystem registered under a name. An
instance holds validated parameters and builds the VectorField for them;
lookup() also runs the registration checks (declared parity and
potential consistency) before handing an entry out.
"""
import numpy as np
from scipy.integrate import quad

from .fields import VectorField
from .symmetry import field_parity_report
from .utils import ParityError, parity_classes


REGISTRATION_TOL = 1e-10


class Parameter:
    """
    One entry of a system's parameter schema.

    Parameters
    ----------
    default: object
        The value used when none is given

    low, high: float or None
        Admissible range; None means unbounded

    doc: str
        Short description for listings

    kind: str
        'float', 'vector' (a sequence of floats, each in range) or
        'callable'

    open_low: bool
        Whether the lower limit itself is excluded
    """
    kinds = ('float', 'vector', 'callable')

    def __init__(self, default, low=None, high=None, doc='', kind='float',
                 open_low=False):
        if kind not in self.kinds:
            raise ValueError(f"Unknown parameter kind {kind}")
        self.default = default
        self.low = low
        self.high = high
        self.doc = doc
        self.kind = kind
        self.open_low = open_low

    def describe_range(self):
        if self.kind == 'callable':
            return 'callable'
        lo = '(' if self.open_low else '['
        low = '-inf' if self.low is None else f'{self.low:g}'
        high = 'inf' if self.high is None else f'{self.high:g}'
        return f"{lo}{low}, {high}]"

    def _check(self, name, x):
        if not np.isfinite(x):
            raise ValueError(f"Parameter {name} must be finite, not {x}")
        if self.low is not None:
            if x < self.low or (self.open_low and x == self.low):
                raise ValueError(f"Parameter {name}={x:g} outside "
                                 f"{self.describe_range()}")
        if self.high is not None and x > self.high:
            raise ValueError(f"Parameter {name}={x:g} outside "
                             f"{self.describe_range()}")

    def convert(self, name, value):
        """Parse (strings from the command line included) and validate."""
        if self.kind == 'callable':
            if not callable(value):
                raise ValueError(f"Parameter {name} must be a function")
            return value
        if self.kind == 'vector':
            if isinstance(value, str):
                value = [float(v) for v in value.split(',') if v.strip()]
            value = tuple(float(v) for v in np.atleast_1d(value))
            for v in value:
                self._check(name, v)
            return value
        value = float(value)
        self._check(name, value)
        return value

    def default_repr(self):
        if self.kind == 'callable':
            return getattr(self.default, '__doc__', None) or 'function'
        if self.kind == 'vector':
            return list(self.default)
        return self.default


class BaseSystem:
    """
    A named differential system y'' = f(y) with a parameter schema.

    Subclasses are registered with a system_name and define the schema
    in `parameters`, the field in `accel`, and its potential energy in
    `potential`, with f = -grad(V) / masses. They can override the
    guard, the declared parity and the ball used by registration checks.

    Instances are normally made with lookup() rather than directly.
    """
    _system_classes = {}
    parameters = {}
    dimension = 1
    provenance = ''
    guard_description = 'none'

    def __init__(self, **params):
        unknown = set(params) - set(self.parameters)
        if unknown:
            raise ValueError(f"Unknown parameters {sorted(unknown)} for system "
                             f"'{self.system_name}'. Schema:\n{self.schema()}")
        values = {}
        for name, par in self.parameters.items():
            values[name] = par.convert(name, params.get(name, par.default))
        self.params = values
        self.validate()
        self._field = None

    def __init_subclass__(cls, system_name=None):
        if system_name is None:
            return
        cls._system_classes[system_name.lower()] = cls
        cls.system_name = system_name

    def __repr__(self):
        items = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.__class__.__name__}({items})"

    @classmethod
    def make(cls, system_name, **params):
        """
        Select a registered system by name and instantiate it.

        Parameters
        ----------
        system_name: str
            Must correspond to the system_name of a subclass

        Returns
        -------
        instance: BaseSystem
        """
        try:
            subclass = cls._system_classes[system_name.lower()]
        except KeyError:
            raise KeyError(f"Unknown system '{system_name}'. Known systems: "
                           f"{', '.join(sorted(cls._system_classes))}")
        return subclass(**params)

    @classmethod
    def schema(cls):
        return "\n".join(f"- {name} = {par.default_repr()} "
                         f"{par.describe_range()}: {par.doc}"
                         for name, par in cls.parameters.items())

    def validate(self):
        """Checks spanning several parameters."""

    def __getattr__(self, name):
        params = self.__dict__.get('params', {})
        if name in params:
            return params[name]
        raise AttributeError(name)

    def declared_parity(self):
        return parity_classes.odd

    def masses(self):
        return np.ones(self.dimension)

    def accel(self, y):
        raise NotImplementedError()

    def potential(self, y):
        raise NotImplementedError()

    guard = None
    ball_guard = None
    guard_eps = 0.0
    lipschitz_K = None

    def check_center(self):
        """Centre of the ball used by the registration checks."""
        return np.zeros(self.dimension)

    def check_radius(self):
        return 1.0

    def metadata(self):
        return {'parameters': dict(self.params),
                'provenance': self.provenance,
                'guard': self.guard_description,
                'lipschitz_K': self.lipschitz_K}

    @property
    def field(self):
        """The VectorField for these parameters, built once."""
        if self._field is None:
            self._field = VectorField(self.system_name, self.dimension,
                                      self.accel, potential=self.potential,
                                      masses=self.masses(),
                                      declared_parity=self.declared_parity(),
                                      guard=self.guard,
                                      guard_eps=self.guard_eps,
                                      ball_guard=self.ball_guard,
                                      metadata=self.metadata())
        return self._field

    def register(self, samples=256, seed=0):
        """
        Confirm the declared parity by sampling, and the potential by a
        finite-difference gradient, on the registration ball.

        Raises
        ------
        ParityError
            If the sampled classification differs from the declared one
        ValueError
            If the potential does not match the field
        """
        f = self.field
        report = field_parity_report(f, self.check_center(),
                                     self.check_radius(), samples=samples,
                                     tol=REGISTRATION_TOL, seed=seed)
        declared = f.declared_parity
        # the zero field is both even and odd and is classified even
        agrees = (report.classification == declared
                  or (declared == parity_classes.odd
                      and report.odd_defect <= REGISTRATION_TOL))
        if declared != parity_classes.unknown and not agrees:
            raise ParityError(f"System '{self.system_name}' declares parity "
                              f"{declared} but sampling gives "
                              f"{report.classification} (even defect "
                              f"{report.even_defect:.3g}, odd defect "
                              f"{report.odd_defect:.3g})",
                              defect=min(report.even_defect,
                                         report.odd_defect))
        f.check_potential(self.check_center(), self.check_radius(),
                          seed=seed)
        return report

    def to_dict(self):
        """Listing entry of this system."""
        return {
            'name': self.system_name,
            'dimension': self.dimension,
            'parameters': {name: {'default': par.default_repr(),
                                  'range': par.describe_range(),
                                  'doc': par.doc}
                           for name, par in self.parameters.items()},
            'declared_parity': self.declared_parity(),
            'guard': self.guard_description,
            'provenance': self.provenance,
        }


def _radial_ball_guard(eps):
    def ball_guard(center, radius):
        gap = np.maximum(np.abs(center) - radius, 0.0)
        return bool(np.linalg.norm(gap) < eps)
    return ball_guard


class NBody(BaseSystem, system_name='nbody'):
    """
    Newtonian point masses: y_k'' = sum_{j != k} G m_j (y_j - y_k) / |y_j - y_k|^3,
    with the 3N coordinates stacked body by body.
    """
    parameters = {
        'masses': Parameter((1.0, 1.0), low=0.0, open_low=True,
                            kind='vector', doc="masses of the bodies"),
        'G': Parameter(1.0, low=0.0, open_low=True,
                       doc="gravitational constant"),
        'guard_eps': Parameter(1e-3, low=0.0, open_low=True,
                               doc="collision guard radius"),
    }
    provenance = ("Newton's equations of celestial mechanics for N point "
                  "masses; the field is odd because the pairwise "
                  "differences change sign with y")
    guard_description = "any pairwise distance below guard_eps"

    def validate(self):
        if len(self.params['masses']) < 2:
            raise ValueError("The N-body system needs at least two masses")

    @property
    def n_bodies(self):
        return len(self.params['masses'])

    @property
    def dimension(self):
        return 3 * self.n_bodies

    def masses(self):
        return np.repeat(self.params['masses'], 3)

    def metadata(self):
        meta = super().metadata()
        meta['bodies'] = self.n_bodies
        return meta

    def _separations(self, y):
        pos = y.reshape(y.shape[:-1] + (self.n_bodies, 3))
        # diff[..., k, j, :] = y_j - y_k
        diff = pos[..., np.newaxis, :, :] - pos[..., :, np.newaxis, :]
        r = np.linalg.norm(diff, axis=-1)
        return diff, r

    def accel(self, y):
        diff, r = self._separations(y)
        off = ~np.eye(self.n_bodies, dtype=bool)
        inv3 = np.zeros_like(r)
        np.divide(1.0, r**3, out=inv3, where=off & (r > 0))
        m = np.array(self.params['masses'])
        acc = self.G * np.einsum('...kj,j,...kjd->...kd', inv3, m, diff)
        return acc.reshape(y.shape)

    def potential(self, y):
        _, r = self._separations(y)
        off = ~np.eye(self.n_bodies, dtype=bool)
        inv = np.zeros_like(r)
        np.divide(1.0, r, out=inv, where=off & (r > 0))
        m = np.array(self.params['masses'])
        return -0.5 * self.G * np.einsum('...kj,k,j->...', inv, m, m)

    @property
    def guard_eps(self):
        return self.params['guard_eps']

    def guard(self, y):
        _, r = self._separations(y)
        off = ~np.eye(self.n_bodies, dtype=bool)
        return np.any((r < self.guard_eps) & off, axis=(-2, -1))

    def ball_guard(self, center, radius):
        diff, _ = self._separations(center)
        # each coordinate of a difference moves by up to 2 radius
        gap = np.maximum(np.abs(diff) - 2 * radius, 0.0)
        dist = np.linalg.norm(gap, axis=-1)
        off = ~np.eye(self.n_bodies, dtype=bool)
        return bool(np.any((dist < self.guard_eps) & off))

    def check_center(self):
        # bodies on the x axis at unit spacing, centred on the origin
        x = np.arange(self.n_bodies) - 0.5 * (self.n_bodies - 1)
        pos = np.zeros((self.n_bodies, 3))
        pos[:, 0] = x
        return pos.ravel()

    def check_radius(self):
        return 0.2


class Manev(BaseSystem, system_name='manev'):
    """
    Motion in the potential V(y) = -gamma/|y| - epsilon/|y|^2.
    """
    dimension = 3
    parameters = {
        'gamma': Parameter(1.0, low=0.0, open_low=True,
                           doc="Newtonian strength"),
        'epsilon': Parameter(0.1, low=0.0, doc="inverse-square correction"),
        'guard_eps': Parameter(1e-3, low=0.0, open_low=True,
                               doc="guard radius around the origin"),
    }
    provenance = ("The Manev potential -gamma/|y| - epsilon/|y|^2, with "
                  "f = -grad V; epsilon = 0 is the Kepler problem")
    guard_description = "|y| below guard_eps"

    def accel(self, y):
        r = np.linalg.norm(y, axis=-1, keepdims=True)
        return -(self.gamma / r**3 + 2 * self.epsilon / r**4) * y

    def potential(self, y):
        r = np.linalg.norm(y, axis=-1)
        return -self.gamma / r - self.epsilon / r**2

    @property
    def guard_eps(self):
        return self.params['guard_eps']

    def guard(self, y):
        return np.linalg.norm(y, axis=-1) < self.guard_eps

    @property
    def ball_guard(self):
        return _radial_ball_guard(self.guard_eps)

    def check_center(self):
        return np.array([1.0, 0.0, 0.0])

    def check_radius(self):
        return 0.5


class AnisotropicKepler(BaseSystem, system_name='anisotropic_kepler'):
    """
    Planar motion in V(y) = -1/r - aniso_b / rho^(beta/2), with
    r^2 = y1^2 + y2^2 and rho = mu y1^2 + y2^2.
    """
    dimension = 2
    parameters = {
        'mu': Parameter(1.0, low=1.0, doc="anisotropy factor"),
        'beta': Parameter(2.0, low=2.0, doc="exponent of the correction"),
        'aniso_b': Parameter(0.5, low=0.0, open_low=True,
                             doc="strength of the correction"),
        'guard_eps': Parameter(1e-3, low=0.0, open_low=True,
                               doc="guard radius around the origin"),
    }
    provenance = ("The anisotropic Kepler potential -1/r - b/rho^(beta/2) "
                  "with beta >= 2, mu >= 1, b > 0; the strength b is "
                  "named aniso_b")
    guard_description = "|y| below guard_eps"

    def accel(self, y):
        y1, y2 = y[..., 0], y[..., 1]
        r3 = (y1**2 + y2**2)**1.5
        rho = self.mu * y1**2 + y2**2
        corr = self.aniso_b * self.beta / rho**(0.5 * self.beta + 1)
        f1 = -y1 / r3 - corr * self.mu * y1
        f2 = -y2 / r3 - corr * y2
        return np.stack((f1, f2), axis=-1)

    def potential(self, y):
        y1, y2 = y[..., 0], y[..., 1]
        r = np.sqrt(y1**2 + y2**2)
        rho = self.mu * y1**2 + y2**2
        return -1.0 / r - self.aniso_b / rho**(0.5 * self.beta)

    @property
    def guard_eps(self):
        return self.params['guard_eps']

    def guard(self, y):
        return np.linalg.norm(y, axis=-1) < self.guard_eps

    @property
    def ball_guard(self):
        return _radial_ball_guard(self.guard_eps)

    def check_center(self):
        return np.array([1.0, 0.0])

    def check_radius(self):
        return 0.5


class ScalarSystem(BaseSystem):
    """
    A system for a single coordinate x, defined by elementwise functions
    force(x) and energy(x) with force = -d energy / dx.
    """
    dimension = 1

    def force(self, x):
        raise NotImplementedError()

    def energy(self, x):
        raise NotImplementedError()

    def accel(self, y):
        return self.force(y)

    def potential(self, y):
        return self.energy(y[..., 0])


class Duffing(ScalarSystem, system_name='duffing'):
    parameters = {'alpha': Parameter(1.0, doc="cubic stiffness")}
    provenance = "Duffing's equation x'' = -x - alpha x^3"

    def force(self, x):
        return -x - self.alpha * x**3

    def energy(self, x):
        return 0.5 * x**2 + 0.25 * self.alpha * x**4


class Linear9(ScalarSystem, system_name='linear9'):
    parameters = {}
    provenance = "The linear oscillator x'' = -9x, solved by cos(3t)"

    def force(self, x):
        return -9.0 * x

    def energy(self, x):
        return 4.5 * x**2


class BinarySatellite(ScalarSystem, system_name='binary_satellite'):
    parameters = {
        'mu': Parameter(1.0, low=0.0, open_low=True, doc="mass of each star"),
        'a': Parameter(1.0, low=0.0, open_low=True,
                       doc="half-distance between the stars"),
    }
    provenance = ("A satellite on the axis through the midpoint of a "
                  "binary star: x'' = -2 mu x / (a^2 + x^2)^(3/2)")

    def force(self, x):
        return -2 * self.mu * x / (self.a**2 + x**2)**1.5

    def energy(self, x):
        return -2 * self.mu / np.sqrt(self.a**2 + x**2)


class Pendulum(ScalarSystem, system_name='pendulum'):
    parameters = {'omega': Parameter(1.0, low=0.0, open_low=True,
                                     doc="small-oscillation frequency")}
    provenance = "The pendulum x'' = -omega^2 sin(x)"

    def force(self, x):
        return -self.omega**2 * np.sin(x)

    def energy(self, x):
        return -self.omega**2 * np.cos(x)


class CubicPendulum(ScalarSystem, system_name='cubic_pendulum'):
    parameters = {'omega': Parameter(1.0, low=0.0, open_low=True,
                                     doc="small-oscillation frequency")}
    provenance = ("The cubic approximation of the pendulum, "
                  "x'' = -omega^2 (x - x^3/6)")

    def force(self, x):
        return -self.omega**2 * (x - x**3 / 6)

    def energy(self, x):
        return self.omega**2 * (0.5 * x**2 - x**4 / 24)


class ForcedPendulum(ScalarSystem, system_name='forced_pendulum'):
    parameters = {
        'omega': Parameter(1.0, low=0.0, open_low=True,
                           doc="small-oscillation frequency"),
        'lam': Parameter(0.5, doc="ratio of the horizontal force to gravity"),
    }
    provenance = ("A pendulum with a horizontal force, "
                  "theta'' = omega^2 (cos(theta) - lam) sin(theta)")

    def force(self, x):
        return self.omega**2 * (np.cos(x) - self.lam) * np.sin(x)

    def energy(self, x):
        return -self.omega**2 * (0.5 * np.sin(x)**2 + self.lam * np.cos(x))


class ElasticString(ScalarSystem, system_name='elastic_string'):
    parameters = {'a': Parameter(1.0, low=0.0, open_low=True,
                                 doc="half-length of the slack region")}
    provenance = ("A mass on an elastic string that is slack for |x| <= a: "
                  "x'' = -x + a sgn(x) for |x| > a and 0 otherwise")
    # Lipschitz with constant 1 despite the kinks at |x| = a
    lipschitz_K = 1.0

    def force(self, x):
        return np.where(np.abs(x) > self.a, -x + self.a * np.sign(x), 0.0)

    def energy(self, x):
        return 0.5 * np.maximum(np.abs(x) - self.a, 0.0)**2

    def check_radius(self):
        return 2.0


class Quartic(ScalarSystem, system_name='quartic'):
    parameters = {}
    provenance = "x'' = x^4 - x^2"

    def declared_parity(self):
        return parity_classes.even

    def force(self, x):
        return x**4 - x**2

    def energy(self, x):
        return x**3 / 3 - x**5 / 5


class CubicLambda(ScalarSystem, system_name='cubic_lambda'):
    parameters = {'lam': Parameter(1.0, doc="shift lambda")}
    provenance = "x'' = (x - lam)(x^2 - lam)"

    def declared_parity(self):
        return parity_classes.odd if self.lam == 0 else parity_classes.neither

    def force(self, x):
        return (x - self.lam) * (x**2 - self.lam)

    def energy(self, x):
        lam = self.lam
        return -(x**4 / 4 - lam * x**3 / 3 - lam * x**2 / 2 + lam**2 * x)


class MagneticPendulum(ScalarSystem, system_name='magnetic_pendulum'):
    parameters = {
        'g': Parameter(1.0, low=0.0, doc="gravitational acceleration"),
        'a': Parameter(1.0, low=0.0, open_low=True, doc="pendulum length"),
        'h': Parameter(2.0, low=0.0, open_low=True,
                       doc="distance from the pivot to the magnet, > a"),
        'c': Parameter(1.0, doc="magnet strength, F = c / D"),
        'm': Parameter(1.0, low=0.0, open_low=True, doc="bob mass"),
    }
    provenance = ("A pendulum over a magnet: m a^2 theta'' = -m g a "
                  "sin(theta) + F h sin(phi), F = c/D, "
                  "D = a^2 + h^2 - 2 a h cos(theta). ASSUMED geometry: "
                  "sin(phi) = a sin(theta) / sqrt(D), from the triangle "
                  "with sides a, h and included angle theta")

    def validate(self):
        if not self.h > self.a:
            raise ValueError(f"The magnetic pendulum needs h > a, got "
                             f"h={self.h:g}, a={self.a:g}")

    def _D(self, x):
        return self.a**2 + self.h**2 - 2 * self.a * self.h * np.cos(x)

    def force(self, x):
        return (-(self.g / self.a) * np.sin(x)
                + self.c * self.h * np.sin(x)
                / (self.m * self.a * self._D(x)**1.5))

    def energy(self, x):
        return (-(self.g / self.a) * np.cos(x)
                + self.c / (self.m * self.a**2) / np.sqrt(self._D(x)))


class CubicOffset(ScalarSystem, system_name='cubic_offset'):
    parameters = {'lam': Parameter(0.5, doc="constant offset lambda")}
    provenance = "x'' = -lam - x^3 + x"

    def declared_parity(self):
        return parity_classes.odd if self.lam == 0 else parity_classes.neither

    def force(self, x):
        return -self.lam - x**3 + x

    def energy(self, x):
        return self.lam * x + x**4 / 4 - x**2 / 2


class ExpMinus(ScalarSystem, system_name='exp_minus'):
    parameters = {'a': Parameter(1.0, doc="constant term")}
    provenance = "x'' = a - exp(x)"

    def declared_parity(self):
        return parity_classes.neither

    def force(self, x):
        return self.a - np.exp(x)

    def energy(self, x):
        return np.exp(x) - self.a * x


class ExpPlus(ScalarSystem, system_name='exp_plus'):
    parameters = {'a': Parameter(1.0, doc="constant term")}
    provenance = "x'' = a + exp(x)"

    def declared_parity(self):
        return parity_classes.neither

    def force(self, x):
        return self.a + np.exp(x)

    def energy(self, x):
        return -np.exp(x) - self.a * x


def _default_restoring(x):
    """x + x**3"""
    return x + x**3


class Conservative(ScalarSystem, system_name='conservative'):
    """
    x'' = -g(x) for a user-supplied numpy-aware g with g(0) = 0 and g
    strictly increasing. The potential is the integral of g from 0,
    computed by adaptive quadrature, and the parity is measured rather
    than declared.
    """
    parameters = {
        'g': Parameter(_default_restoring, kind='callable',
                       doc="restoring force, g(0) = 0, strictly increasing"),
    }
    provenance = ("The conservative system x'' = -g(x) with g(0) = 0, g "
                  "strictly increasing and the integral of g unbounded")

    def validate(self):
        g0 = float(self.g(np.array(0.0)))
        if abs(g0) > 1e-12:
            raise ValueError(f"The restoring force must vanish at 0, "
                             f"g(0) = {g0:g}")
        x = np.linspace(-self.check_radius(), self.check_radius(), 257)
        if not np.all(np.diff(self.g(x)) > 0):
            raise ValueError("The restoring force g must be strictly "
                             "increasing")

    def metadata(self):
        meta = super().metadata()
        meta['growth'] = "integral of g from 0 to x tends to infinity"
        return meta

    def declared_parity(self):
        r = self.check_radius()
        x = r * np.linspace(0.0, 1.0, 65)
        if np.max(np.abs(self.g(x) + self.g(-x))) <= REGISTRATION_TOL:
            return parity_classes.odd
        return parity_classes.neither

    def force(self, x):
        return -self.g(x)

    def energy(self, x):
        def integral(u):
            return quad(lambda s: float(self.g(s)), 0.0, u,
                        epsabs=1e-13, epsrel=1e-13)[0]
        return np.vectorize(integral, otypes=[float])(x)

    def check_radius(self):
        return 2.0


def known_systems():
    return sorted(BaseSystem._system_classes)


def lookup(name, params=None):
    """
    Build a registered system and run its registration checks.

    Parameters
    ----------
    name: str
        System name, see known_systems()

    params: dict or None
        Parameter values, possibly as strings; missing ones take defaults

    Returns
    -------
    entry: BaseSystem
        With .field the checked VectorField

    Raises
    ------
    KeyError
        For unknown names
    ValueError
        For invalid parameters or failed registration checks
    """
    entry = BaseSystem.make(name, **(params or {}))
    entry.register()
    return entry


def nbody_field(masses, G=1.0, guard_eps=1e-3):
    """The registered N-body field for the given masses."""
    return lookup('nbody', {'masses': masses, 'G': G,
                            'guard_eps': guard_eps}).field


def potential_field(name, params=None):
    """The Manev or anisotropic Kepler field."""
    if name not in ('manev', 'anisotropic_kepler'):
        raise KeyError(f"'{name}' is not a potential field; use 'manev' or "
                       "'anisotropic_kepler'")
    return lookup(name, params).field


def scalar_entry(name, params=None):
    """The field of a registered one-dimensional system."""
    entry = BaseSystem.make(name, **(params or {}))
    if not isinstance(entry, ScalarSystem):
        raise KeyError(f"'{name}' is not a scalar system")
    entry.register()
    return entry.field


def catalog_listing():
    """
    Schema and metadata of every registered system, at default
    parameters, sorted by name.
    """
    return [BaseSystem.make(name).to_dict() for name in known_systems()]
