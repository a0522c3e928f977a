"""Symmetric H+-tensor membership, certificates, M-tensor minimum
H-eigenvalues, and diagonally dominant polynomial lower bounds."""

__version__ = "0.1.0"

from .multiindex import (
    MultiIndex,
    TightPair,
    canonicalize,
    dominance_constant,
    enumerate_offdiagonal,
    multinomial,
    num_permutations,
    slice_count,
    tight_pair,
)
from .tensor import (
    DiagonalScaling,
    SymmetricTensor,
    allclose,
    tensor_from_json_dict,
    tensor_to_json_dict,
)
from .cones import NonnegCone, PowerCone3
from .conic import (
    ConeBlock,
    ConicProblem,
    Residuals,
    SolveResult,
    SolutionReport,
    SolverConfig,
    check_solution,
    rewrite_half_cones,
    solve,
)
from .errors import ConvergenceError, DegenerateCertificateError, IllConditionedError
from .membership import (
    CertificateReport,
    ComponentScaling,
    GddCertificate,
    MembershipVerdict,
    Verdict,
    build_feasibility,
    certificate_from_json_dict,
    certificate_to_json_dict,
    component_scaling,
    decompose,
    gdd_slack_program,
    is_h_plus,
    is_m_tensor,
    verify_certificate,
)
from .spectral import (
    EigResult,
    MTensorForm,
    bisection_fallback,
    min_h_eigenvalue_conic,
    min_h_eigenvalue_oracle,
    rho_nonnegative,
    to_m_form,
)
from .polynomials import (
    HomogeneousPolynomial,
    SquareDecomposition,
    appendix_identity,
    dd_basis_form,
    gdd_basis_form,
    exp_to_index,
    index_to_exp,
    is_ddth,
    is_gddth,
    lower_bound_ddth,
    lower_bound_gddth,
    poly_from_json_dict,
    poly_from_tensor,
    poly_to_json_dict,
    sampled_upper_bound,
    tensor_from_poly,
)
