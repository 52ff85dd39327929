from .fields import VectorField, DomainTube  # noqa
from .trajectory import Trajectory  # noqa
from .symmetry import (SampledFunction, ParityReport, MonomialSpec,  # noqa
                       StrictParityReport, parity_defects,
                       antiderivative_parity_check, derivative_parity_check,
                       double_integral_parity_check, field_parity_report,
                       classify_field_parity, classify_strict_parity,
                       classify_monomial_parity)
from .picard import (PicardConfig, ConvergenceReport, estimate_bound_M,  # noqa
                     estimate_lipschitz_K, existence_interval,
                     resolve_interval, picard_step, solve_ivp, majorant_bound,
                     majorant_sum, majorant_table, integral_residual,
                     ode_residual, energy_drift, global_extend)
from .symmetric import (SymmetricRun, FamilySpec, SweepResult,  # noqa
                        solve_even, solve_odd, family_sweep, oracle_deviation)
from .oracle import OracleConfig, rk4_solve, compare  # noqa
from .catalog import (BaseSystem, lookup, nbody_field, potential_field,  # noqa
                      scalar_entry, catalog_listing, known_systems)
from .utils import (GridSymmetryError, DomainGuardError,  # noqa
                    CollisionObstructionError, ParityError, ContainmentError,
                    mirrored_grid)
__version__ = '0.1' #noqa
