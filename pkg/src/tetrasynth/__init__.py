"""Tetrablock interpolation and 2x2 structured singular value synthesis."""

__version__ = "0.1.0"

from .exceptions import (
    BoundaryPoleError,
    ContractViolationError,
    HypothesisViolationError,
    InfeasibleError,
    InvalidInputError,
    NotIsometricError,
    NumericalFailureError,
    OutOfDomainError,
    PoleError,
    RescalingDegenerateError,
    TetraSynthError,
)
from .mu import mu_diag, mu_diag_oracle, mu_lower_bound
from .mu_synthesis import (
    MuCertificate,
    MuProblem,
    ScaledSchurFunction,
    reduce_to_tetra,
    solve_mu,
    verify_mu,
)
from .numeric_core import extend_isometry_to_unitary, hermitian_min_eigenvalue, operator_norm, outer_eval
from .pick_np import Colligation, MatNPData, check_solvable, eval_schur, pick_matrix, solve_np
from .realization import (
    IdentityWitness,
    LiftedFunction,
    TetraFunction,
    boundary_einner_check,
    canonical_lift,
    identity_witness,
    tetra_from_colligation,
    verify_identity,
)
from .tetra_interp import (
    BCParams,
    Certificate,
    InfeasibilityReason,
    SearchConfig,
    Status,
    TetraProblem,
    necessary_checks,
    objective,
    solve_tetra,
    verify_certificate,
)
from .tetrablock import (
    TetraPoint,
    distinguished_boundary_defect,
    from_contraction,
    in_closed_tetrablock,
    in_distinguished_boundary,
    in_open_tetrablock,
    membership_oracle_grid,
    psi,
)
