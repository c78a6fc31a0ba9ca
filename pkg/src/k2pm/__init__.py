"""Interpolation splines minimizing the K2(Pm) seminorm on uniform grids.

The spline interpolates data on the nodes beta/n of [0,1] while minimizing
the L2 norm of S^(m) + omega^2 * S^(m-2); its null space is spanned by
sin(omega x), cos(omega x) and polynomials of degree up to m-3, and the
spline reproduces all of those exactly.  Construction runs in O(n) through
a discrete analogue of the associated even-order differential operator; a
dense O(n^3) solve of the defining system is included as an independent
cross-check.
"""

from .builder import (
    BoundarySolution,
    SampleSet,
    SplineCoefficients,
    assemble_boundary_system,
    build_spline,
    compute_MN,
    compute_coefficients,
    extension_residual,
    reconstruct_coefficients,
    side_condition_residuals,
    solve_boundary,
    u_extension,
)
from .discrete_operator import (
    DiscreteOperator,
    SplineConfig,
    annihilation_residual,
    build_operator,
    characteristic_poly,
    eval_D,
    leading_coeff,
    stable_roots,
    truncation_window,
)
from .errors import (
    ConfigurationError,
    DegenerateOperatorError,
    K2PMError,
    RootFindingError,
    SingularSystemError,
)
from .evaluation import applied_operator, evaluate, seminorm
from .kernel import G, G_derivative, delta_residual
from .oracle import compare, dense_solve, dense_system
from .polynomials import (
    RealPolynomial,
    euler_frobenius,
    finite_diff_zero,
    geom_power_tail,
    geom_trig_tail,
    poly_roots,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BoundarySolution",
    "ConfigurationError",
    "DegenerateOperatorError",
    "DiscreteOperator",
    "G",
    "G_derivative",
    "K2PMError",
    "RealPolynomial",
    "RootFindingError",
    "SampleSet",
    "SingularSystemError",
    "SplineCoefficients",
    "SplineConfig",
    "annihilation_residual",
    "applied_operator",
    "assemble_boundary_system",
    "build_operator",
    "build_spline",
    "characteristic_poly",
    "compare",
    "compute_MN",
    "compute_coefficients",
    "delta_residual",
    "dense_solve",
    "dense_system",
    "euler_frobenius",
    "eval_D",
    "evaluate",
    "extension_residual",
    "finite_diff_zero",
    "geom_power_tail",
    "geom_trig_tail",
    "leading_coeff",
    "poly_roots",
    "reconstruct_coefficients",
    "seminorm",
    "side_condition_residuals",
    "solve_boundary",
    "stable_roots",
    "truncation_window",
    "u_extension",
]
