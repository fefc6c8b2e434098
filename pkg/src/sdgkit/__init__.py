"""sdgkit: nilpotent jets, formal flows and a distribution calculus.

Derivatives are exact jet arithmetic, integrals are deterministic
quadrature, and distributions are expression trees evaluated by pairing
against test functions.
"""
from .algebra import (
    Jet, SquareZeroElement, collapse_symmetric, cos, exp, fresh_var, power, sin, sqrt,
)
from .distributions import (
    Ball, Dirac, DiracDerivative, Distribution, HeatGaussian, Interval, Laplacian, LinComb,
    Pushforward, Sphere, TimeFamily, XY_PROJECTION, ball, convolve, dirac, dirac_derivative,
    directional_derivative, interval, interval_equal, laplacian_dist, multiply, pair,
    pair_jet_time, pushforward, sphere,
)
from .errors import (
    DimensionError, DistributionError, FlowError, GeneratorMismatchError, ImproperMapError,
    MixedAlgebraError, NotNilpotentError, NotSymmetricError, OrderMismatchError, ParseError,
    SDGError,
)
from .evolution import (
    column_diagram, dirac_spread, heat_state, heat_time_derivative, maclaurin,
    transport_residual, transport_state, wave_fundamental, wave_residual,
)
from .flows import (
    VectorField, change_of_variables, conjugate_solution, exp_flow_linear, formal_flow,
    infinitesimal_action, pde_residual, second_order_flow,
)
from .parser import (
    format_distribution, format_expr, parse_distribution, parse_expression, parse_function,
    parse_vector_field,
)
from .quadrature import ball_rule, gauss_legendre, integrate, sphere_rule
from .smooth import TestFunction, derivative, directional, laplacian_fn, partial, taylor
from .suite import SuiteConfig, run_suite

__version__ = "0.1.0"
