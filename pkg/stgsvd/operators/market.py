"""Matrix Market import and export."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from ..operator_interface import DenseMatrix
from .dense import as_dense_matrix

_LOGGER = logging.getLogger(__name__)


def read_matrix_market(path: str | Path) -> DenseMatrix:
    """Read a Matrix Market file into a dense array.

    Coordinate and array formats are accepted; symmetric storage is expanded
    by scipy.
    """
    loaded = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(loaded):
        loaded = loaded.toarray()
    dense = as_dense_matrix(np.asarray(loaded, dtype=np.float64), str(path))
    _LOGGER.info("Loaded %s (%dx%d)", path, *dense.shape)
    return dense


def write_matrix_market(
    path: str | Path, matrix, comment: str = "", symmetric: bool = False
) -> None:
    """Write a dense matrix in Matrix Market array format."""
    dense = as_dense_matrix(matrix)
    scipy.io.mmwrite(
        str(path),
        dense,
        comment=comment,
        field="real",
        precision=17,
        symmetry="symmetric" if symmetric else "general",
    )
    _LOGGER.info("Wrote %s (%dx%d)", path, *dense.shape)
