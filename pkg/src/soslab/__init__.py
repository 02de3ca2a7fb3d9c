"""soslab: sum-of-squares hierarchies for polynomial optimization.

Computes measure-based upper bounds (eigenvalue reformulation and
push-forward variant) and Putinar/Schmudgen lower bounds with verifiable
certificates over the box, ball, simplex, and sphere, plus the rate
experiments that reproduce their O(1/r^2) convergence at desk scale.
"""

__version__ = "0.1.0"

from .poly import Polynomial, parse_polynomial, print_polynomial, compose_univariate
from .orthopoly import JacobiWeight, recurrence_coefficients, eval_basis, jacobi_operator, smallest_root
from .measures import (
    BallMeasure,
    BoxJacobi,
    SimplexMeasure,
    SphereMeasure,
    gram,
    inner_product,
    integrate,
    moment,
    orthonormal_basis,
)
from .linalg import eig_min_sym, eig_all_sym_tridiag, gen_eig_min, cholesky_pivoted
from .upperbound import (
    assemble_operator_matrix,
    cubature_check,
    pushforward_moments,
    ub,
    ub_pushforward,
)
from .sdp import SdpProblem, SdpSolution, SolveOptions, solve, weak_duality_check
from .lowerbound import (
    PUTINAR,
    SCHMUDGEN,
    SetDescription,
    assemble_putinar,
    assemble_schmudgen,
    builtin_set,
    certify_sos,
    lb,
    verify_certificate,
)

__all__ = [
    "Polynomial",
    "parse_polynomial",
    "print_polynomial",
    "compose_univariate",
    "JacobiWeight",
    "recurrence_coefficients",
    "eval_basis",
    "jacobi_operator",
    "smallest_root",
    "BoxJacobi",
    "BallMeasure",
    "SimplexMeasure",
    "SphereMeasure",
    "moment",
    "integrate",
    "inner_product",
    "gram",
    "orthonormal_basis",
    "eig_min_sym",
    "eig_all_sym_tridiag",
    "gen_eig_min",
    "cholesky_pivoted",
    "assemble_operator_matrix",
    "ub",
    "ub_pushforward",
    "pushforward_moments",
    "cubature_check",
    "SdpProblem",
    "SdpSolution",
    "SolveOptions",
    "solve",
    "weak_duality_check",
    "SetDescription",
    "builtin_set",
    "assemble_putinar",
    "assemble_schmudgen",
    "lb",
    "certify_sos",
    "verify_certificate",
    "PUTINAR",
    "SCHMUDGEN",
]
