"""Exact symbolic calculator for finite Lie conformal algebras and their
conformal modules: lambda-bracket calculus, axiom checks, conformal duals,
intertwining operators, and both tensor-product constructions."""

from .algebra import (
    AlgElement,
    LieConformalAlgebra,
    StructureError,
    bracket,
    bracket_eval,
    check_algebra,
    check_jacobi,
    check_skew,
    nth_product,
    virasoro,
)
from .chom import (
    ConformalLinearMap,
    DualModule,
    ModuleHom,
    chom_action,
    chom_action_eval,
    double_dual_iso,
    dual_hom,
    dual_module,
    ident_41,
    pair,
    pair_eval,
    to_functional,
)
from .intertwining import (
    IntertwiningOperator,
    PsiFamily,
    adjoint,
    check_iop,
    iop_apply,
    iop_eval,
    module_action_iop,
    to_hom_psi,
    transpose,
)
from .modules import (
    ConformalModule,
    ModElement,
    TensorElement,
    action,
    action_eval,
    adjoint_module,
    check_module,
    nth_action,
    ordinary_tensor_action,
    ordinary_tensor_action_eval,
    rank1_virasoro,
    trivial_module,
    unit_module,
)
from .poly import Frac, ParseError, Poly, PolyError, VarTable, parse_poly, poly_gcd
from .reports import Failure, Report
from .tensor_first import (
    RewritingBudgetError,
    StringElement,
    TensorConstruction,
    TruncationTable,
    check_f0_module,
    f0_action,
    f0_nth_action,
    induced_module,
    normalize,
)
from .tensor_second import (
    CandidateSubmodule,
    FracPoly,
    SecondConstruction,
    candidate_delta,
    cross_check,
    solve_linear,
    tensor_second,
)

__version__ = "0.1.0"
