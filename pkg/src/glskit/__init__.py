"""glskit: generalized least squares through weighted pseudoinverses.

The package computes the minimum 2-norm solution of

    min ||L x||_2   subject to   ||M (A x - b)||_2 = min

three independent ways (a direct formula, a GSVD closed form, and the
iterative gLSQR algorithm built on generalized Golub-Kahan
bidiagonalization) and cross-certifies any candidate through the
generalized Moore-Penrose identities.
"""

from .linalg import (
    EPS,
    FactorizationError,
    IndefiniteMatrixError,
    LsqrResult,
    RankTolerance,
    SvdFactors,
    cholesky_spd,
    lsqr,
    nullspace_basis,
    pinv,
    projector_range,
    psd_sqrt,
    qr_householder,
    svd,
)
from .gsvd import (
    GsvdFactors,
    XPartition,
    gsvd_pair,
    partition_x,
    save_factors,
    sigma_max_ca,
    wpinv_via_gsvd,
)
from .wpinv import (
    GlsCriterionReport,
    GlsProblem,
    MpeReport,
    check_gls_criterion,
    check_gmpe,
    wpinv_apply,
    wpinv_elden,
    wpinv_limit,
)
from .ggkb import (
    BidiagState,
    CholeskyStrategy,
    DensePinvStrategy,
    InnerLsqrStrategy,
    NumericalBreakdownError,
    dump_state,
    gdag_strategy,
    ggkb_init,
    ggkb_step,
    krylov_subspace_check,
)
from .glsqr import (
    GivensState,
    OperatorNormEstimate,
    SolveReport,
    certify_solution,
    glsqr_solve,
    operator_norm,
    residual_estimate,
    save_history,
)
from .problems import (
    GeneratedProblem,
    generate,
    load_problem,
    make_l1,
    make_l2,
    random_sparse_matrix,
    regularizer,
    sample_function,
    save_problem,
)
from .mmio import (
    MatrixMarketError,
    read_matrix_market,
    read_vector,
    write_matrix_market,
    write_vector,
)

__version__ = "0.1.0"
