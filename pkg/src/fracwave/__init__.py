"""Fractional calculus and exact separated solutions of nonlinear PDEs with a Caputo time derivative.

Modules
-------
fracops    Gamma function, Riemann-Liouville integral, Caputo derivative (exact and L1).
mittag     Two-parameter Mittag-Leffler function on the real line.
subspace   Exact closure of nonlinear differential operators on finite bases.
solutions  Closed-form solution constructors.
verify     Residual checks of the solutions.
cli        Command-line front end.
"""

from .errors import (ConditionError, DegenerateError, DomainError, FracwaveError, IntegerAlphaError,
                     NonConvergence, NotInvariantError, PoleError, SingularAlphaError, SupportError)
from .fracops import (InversionReport, Order, PowerTerm, TimeGrid, as_order, caputo_l1, caputo_power,
                      gamma_fn, inversion_check, l1_weights, rgamma, rl_integral_num, rl_integral_power)
from .mittag import MLSpec, caputo_of_ml, ml, ml_cos_branch, ml_sin_branch, ml_values
from .solutions import (OdibatSolution, QuinticSolution, SimilaritySolution, build_odibat, build_quintic,
                        build_similarity, eval_odibat, eval_quintic, eval_similarity, rosenau_hyman)
from .subspace import (Basis, ClosureReport, Expansion, KOperator, LinearCondition, Poly, apply_operator,
                       check_invariance, expand_power, reduce_to_system)
from .verify import (ResidualReport, SeparatedField, verify_odibat, verify_pde, verify_quintic_system,
                     verify_similarity)

__version__ = "0.1.0"
