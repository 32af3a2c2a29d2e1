"""Concrete operator implementations."""

from .composite import InverseSpdOperator, LowRankOperator, TransposedOperator, invert
from .dense import (
    DenseOperator,
    DenseSpdOperator,
    as_dense_matrix,
    as_linear_op,
    as_spd_op,
    dense_adapter,
    identity_weight,
    spd_dense_adapter,
)
from .inexact import InexactOperator, inexact_adapter
from .market import read_matrix_market, write_matrix_market
from .norms import (
    weighted_norm,
    weighted_op_norm,
    weighted_op_norm_sqrt,
    weighted_transform,
)

__all__ = [
    "DenseOperator",
    "DenseSpdOperator",
    "InexactOperator",
    "InverseSpdOperator",
    "LowRankOperator",
    "TransposedOperator",
    "as_dense_matrix",
    "as_linear_op",
    "as_spd_op",
    "dense_adapter",
    "identity_weight",
    "inexact_adapter",
    "invert",
    "read_matrix_market",
    "spd_dense_adapter",
    "weighted_norm",
    "weighted_op_norm",
    "weighted_op_norm_sqrt",
    "weighted_transform",
    "write_matrix_market",
]
