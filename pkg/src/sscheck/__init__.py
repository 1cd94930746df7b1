"""sscheck: decide the sufficiently scattered condition of nonnegative
matrices with LP screening, global branch-and-bound, and an exact
small-instance oracle."""

from .core import (
    FactorMatrix,
    Polytope,
    Tolerances,
    UnitVector,
    build_polytope,
    second_order_cone_member,
)
from .lp import (
    BoxLpContext,
    FarkasCertificate,
    LpError,
    LpResult,
    LpStatus,
    PivotLimitExceeded,
    cone_member,
    coordinate_range,
    maximize_linear,
)
from .relax import SecantBound, node_upper_bound, propagate_box, secant_overestimator, tighten_box
from .bnb import (
    GlobalResult,
    GlobalStatus,
    InfeasiblePolytopeError,
    SolutionPool,
    exists_above,
    maximize_norm,
    verify_certificate,
)
from .oracle import BudgetExceeded, EnumerationLimits, VertexList, enumerate_vertices, exact_max_norm
from .ssc import (
    Method,
    NcsscReport,
    Reason,
    SscReport,
    Verdict,
    check_ncssc,
    check_ssc,
    sparsity_screen,
)
from .synth import ExperimentRecord, GenSpec, generate, run_grid
from .matio import MatrixParseError, load_matrix, save_matrix

__version__ = "0.1.0"

__all__ = [
    "FactorMatrix",
    "Polytope",
    "Tolerances",
    "UnitVector",
    "build_polytope",
    "second_order_cone_member",
    "BoxLpContext",
    "FarkasCertificate",
    "LpError",
    "LpResult",
    "LpStatus",
    "PivotLimitExceeded",
    "cone_member",
    "coordinate_range",
    "maximize_linear",
    "SecantBound",
    "node_upper_bound",
    "propagate_box",
    "secant_overestimator",
    "tighten_box",
    "GlobalResult",
    "GlobalStatus",
    "InfeasiblePolytopeError",
    "SolutionPool",
    "exists_above",
    "maximize_norm",
    "verify_certificate",
    "BudgetExceeded",
    "EnumerationLimits",
    "VertexList",
    "enumerate_vertices",
    "exact_max_norm",
    "Method",
    "NcsscReport",
    "Reason",
    "SscReport",
    "Verdict",
    "check_ncssc",
    "check_ssc",
    "sparsity_screen",
    "ExperimentRecord",
    "GenSpec",
    "generate",
    "run_grid",
    "MatrixParseError",
    "load_matrix",
    "save_matrix",
]
