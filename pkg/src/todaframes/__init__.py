"""Frenet frames of polynomial Grassmannian curves and nonabelian Toda systems.

The package builds the osculating sequence of a polynomial curve in a
complex Grassmannian with exact arithmetic, evaluates the associated
hermitian frame numerically, constructs and solves the matching block
Toda equations by path integration and block Gauss decomposition, and
verifies every identity tying the two sides together.

Derivative convention used throughout: the minus derivative is d/dz and
the plus derivative is d/dzbar.
"""

from .errors import (
    AlreadyFull,
    ConfigError,
    GaussDecompositionFailed,
    IntegrationDiverged,
    NotConstantRank,
    SingularBeta,
    SingularFrame,
    TodaframesError,
    ZeroFunction,
)
from .frenet import (
    ConnectionCoefficients,
    FrenetPointData,
    OsculatingSequence,
    build_osculating,
    connection_coefficients,
    frame_at,
    induced_metric,
    kahler_check,
    linear_fullness,
    verify_frame_equations,
)
from .grading import (
    GradationSpec,
    GradingOperator,
    build_grading,
    cartan_grading_operator,
    degree_of_block,
    eigen_check,
)
from .linalg import (
    BlockStructure,
    GaussFactors,
    HermitianMetric,
    block_project,
    gauss_decompose,
    hermitian_form,
    numerical_rank,
)
from .poly import (
    GaussianRational,
    Poly,
    PolyMatrix,
    RationalFunc,
    RationalMatrix,
    adjoin_columns,
    constant_rank_reduce,
    dual_frame,
    factor_zeros,
    minor_gcd,
    rank_complete,
)
from .toda import (
    TodaProblem,
    TodaSolution,
    check_phi_relation,
    integrate_mu,
    solution_gamma_field,
    solve,
    toda_residual,
    zero_curvature_check,
)
from .wirtinger import d_minus, d_plus, d_plus_d_minus

__version__ = "0.1.0"
