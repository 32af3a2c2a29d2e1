"""Randomized (S,T)-weighted generalized singular value decomposition.

The main entry point is :func:`rand_gsvd`, which returns factors with
``A ~ U_hat diag(sigma_hat) V_hat^T T`` where ``U_hat`` is S-orthonormal and
``V_hat`` is T-orthonormal.
"""

from .const import VERSION
from .exceptions import (
    AssumptionViolationError,
    ConfigError,
    DimensionError,
    GsvdError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    NumericalFailure,
    OracleSizeError,
    RankDeficiencyError,
)
from .operator_interface import LinearOp, MatvecCounter, SpdOp
from .rand_gsvd import (
    GSVD_METHODS,
    GsvdFactors,
    SketchConfig,
    gheig_gsvd,
    rand_gsvd,
    rand_gsvd_transpose,
    rand_subspace,
    reconstruct,
    two_sided_gsvd,
)
from .sampling import SamplerSpec
from .weighted_qr import WeightedQrResult, weighted_cholqr

__version__ = VERSION

__all__ = [
    "AssumptionViolationError",
    "ConfigError",
    "DimensionError",
    "GSVD_METHODS",
    "GsvdError",
    "GsvdFactors",
    "LinearOp",
    "MatvecCounter",
    "NotPositiveDefiniteError",
    "NotSymmetricError",
    "NumericalFailure",
    "OracleSizeError",
    "RankDeficiencyError",
    "SamplerSpec",
    "SketchConfig",
    "SpdOp",
    "WeightedQrResult",
    "gheig_gsvd",
    "rand_gsvd",
    "rand_gsvd_transpose",
    "rand_subspace",
    "reconstruct",
    "two_sided_gsvd",
    "weighted_cholqr",
]
