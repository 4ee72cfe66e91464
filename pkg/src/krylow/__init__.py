"""Krylov-aware low-rank approximation of symmetric matrix functions."""

__version__ = "0.1.0"

from .errors import (
    BreakdownError,
    DomainError,
    KrylowError,
    NumericalError,
    ParseError,
    ResourceError,
    ValidationError,
)
from .functions import ScalarFunction
from .lanczos import (
    BlockLanczosResult,
    block_lanczos,
    extend_lanczos,
    lanczos_fom,
    lanczos_quadform,
)
from .linalg import RngStream, gaussian_matrix, orth_basis, sym_eig, truncate_sym
from .lowrank import (
    LowRankApprox,
    approx_error,
    krylov_aware,
    rand_svd_exact,
    rand_svd_matfun,
    single_vector_krylov_aware,
)
from .operators import (
    MatVecOperator,
    dense_operator,
    laplacian2d_operator,
    spin_chain_operator,
    synthetic_spectrum_operator,
)

__all__ = [
    "BlockLanczosResult",
    "BreakdownError",
    "DomainError",
    "KrylowError",
    "LowRankApprox",
    "MatVecOperator",
    "NumericalError",
    "ParseError",
    "ResourceError",
    "RngStream",
    "ScalarFunction",
    "ValidationError",
    "approx_error",
    "block_lanczos",
    "dense_operator",
    "extend_lanczos",
    "gaussian_matrix",
    "krylov_aware",
    "lanczos_fom",
    "lanczos_quadform",
    "laplacian2d_operator",
    "orth_basis",
    "rand_svd_exact",
    "rand_svd_matfun",
    "single_vector_krylov_aware",
    "spin_chain_operator",
    "sym_eig",
    "synthetic_spectrum_operator",
    "truncate_sym",
]
