"""Define the matrix-free operator interfaces used by every algorithm."""

from __future__ import annotations

import copy
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .exceptions import DimensionError
from .factorizations import cholesky_lower

DenseMatrix = npt.NDArray[np.float64]

# Counter keys
APPLY = "apply"
APPLY_TRANSPOSE = "apply_transpose"
SOLVE = "solve"


@dataclass
class MatvecCounter:
    """Thread-safe tally of operator applications, one per vector."""

    counts: dict[str, int] = field(default_factory=dict)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def increment(self, kind: str, amount: int = 1) -> None:
        """Add ``amount`` applications of ``kind``."""
        with self._lock:
            self.counts[kind] = self.counts.get(kind, 0) + amount

    def get(self, kind: str) -> int:
        """Return the tally for ``kind`` (0 if never used)."""
        with self._lock:
            return self.counts.get(kind, 0)

    def snapshot(self) -> dict[str, int]:
        """Return a copy of all tallies."""
        with self._lock:
            return dict(self.counts)

    def reset(self) -> None:
        """Zero every tally."""
        with self._lock:
            self.counts.clear()


def _as_vector(x, length: int, what: str) -> DenseMatrix:
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (length,):
        raise DimensionError(f"{what} expects a vector of length {length}, got {vec.shape}")
    return vec


def _as_block(X, rows: int, what: str) -> DenseMatrix:
    block = np.asarray(X, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != rows:
        raise DimensionError(f"{what} expects a block with {rows} rows, got {block.shape}")
    return block


def _stack(columns: list[DenseMatrix], rows: int) -> DenseMatrix:
    if not columns:
        return np.zeros((rows, 0))
    return np.column_stack(columns)


class LinearOp(ABC):
    """Abstract m x n linear operator accessed only through products.

    Every vector product is counted; block products count one per column.
    """

    def __init__(self, nrows: int, ncols: int) -> None:
        """Initialize the operator.

        Args:
            nrows: Output dimension m
            ncols: Input dimension n

        Raises:
            DimensionError: If either dimension is smaller than 1
        """
        if nrows < 1 or ncols < 1:
            raise DimensionError(f"operator dimensions must be positive, got {nrows}x{ncols}")
        self._shape = (int(nrows), int(ncols))
        self._counter = MatvecCounter()

    @property
    def shape(self) -> tuple[int, int]:
        """Return (m, n)."""
        return self._shape

    @property
    def matvec_counter(self) -> MatvecCounter:
        """Return the application counter."""
        return self._counter

    @abstractmethod
    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        """Return A x for a validated length-n vector."""

    @abstractmethod
    def _apply_transpose(self, y: DenseMatrix) -> DenseMatrix:
        """Return A^T y for a validated length-m vector."""

    def apply(self, x) -> DenseMatrix:
        """Return A x.

        Raises:
            DimensionError: If x does not have length n
        """
        vec = _as_vector(x, self._shape[1], "apply")
        self._counter.increment(APPLY)
        return self._apply(vec)

    def apply_transpose(self, y) -> DenseMatrix:
        """Return A^T y.

        Raises:
            DimensionError: If y does not have length m
        """
        vec = _as_vector(y, self._shape[0], "apply_transpose")
        self._counter.increment(APPLY_TRANSPOSE)
        return self._apply_transpose(vec)

    def apply_block(self, X) -> DenseMatrix:
        """Return A X, one counted application per column."""
        block = _as_block(X, self._shape[1], "apply_block")
        return _stack([self.apply(block[:, j]) for j in range(block.shape[1])], self._shape[0])

    def apply_transpose_block(self, Y) -> DenseMatrix:
        """Return A^T Y, one counted application per column."""
        block = _as_block(Y, self._shape[0], "apply_transpose_block")
        return _stack(
            [self.apply_transpose(block[:, j]) for j in range(block.shape[1])],
            self._shape[1],
        )

    def to_dense(self) -> DenseMatrix:
        """Materialize the operator by probing with the standard basis."""
        return self.apply_block(np.eye(self._shape[1]))

    def with_fresh_counter(self) -> "LinearOp":
        """Return a view sharing the data but with its own zeroed counter."""
        clone = copy.copy(self)
        clone._counter = MatvecCounter()
        return clone


class SpdOp(ABC):
    """Abstract symmetric positive definite n x n operator with a solve."""

    def __init__(self, n: int) -> None:
        """Initialize the operator.

        Raises:
            DimensionError: If n is smaller than 1
        """
        if n < 1:
            raise DimensionError(f"SPD operator dimension must be positive, got {n}")
        self._n = int(n)
        self._counter = MatvecCounter()
        self._cholesky: DenseMatrix | None = None

    @property
    def n(self) -> int:
        """Return the dimension."""
        return self._n

    @property
    def shape(self) -> tuple[int, int]:
        """Return (n, n)."""
        return (self._n, self._n)

    @property
    def matvec_counter(self) -> MatvecCounter:
        """Return the application counter."""
        return self._counter

    @abstractmethod
    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        """Return W x."""

    @abstractmethod
    def _solve(self, x: DenseMatrix) -> DenseMatrix:
        """Return W^{-1} x."""

    def apply(self, x) -> DenseMatrix:
        """Return W x."""
        vec = _as_vector(x, self._n, "apply")
        self._counter.increment(APPLY)
        return self._apply(vec)

    def solve(self, x) -> DenseMatrix:
        """Return W^{-1} x."""
        vec = _as_vector(x, self._n, "solve")
        self._counter.increment(SOLVE)
        return self._solve(vec)

    def apply_block(self, X) -> DenseMatrix:
        """Return W X, one counted application per column."""
        block = _as_block(X, self._n, "apply_block")
        return _stack([self.apply(block[:, j]) for j in range(block.shape[1])], self._n)

    def solve_block(self, X) -> DenseMatrix:
        """Return W^{-1} X, one counted solve per column."""
        block = _as_block(X, self._n, "solve_block")
        return _stack([self.solve(block[:, j]) for j in range(block.shape[1])], self._n)

    def to_dense(self) -> DenseMatrix:
        """Materialize W (symmetrized) by probing with the standard basis."""
        dense = self.apply_block(np.eye(self._n))
        return 0.5 * (dense + dense.T)

    def cholesky(self) -> DenseMatrix:
        """Return the lower Cholesky factor of W, computed once."""
        if self._cholesky is None:
            self._cholesky = cholesky_lower(self.to_dense(), "weight")
        return self._cholesky

    def diagonal(self) -> DenseMatrix:
        """Return diag(W)."""
        return np.diag(self.to_dense()).copy()

    def with_fresh_counter(self) -> "SpdOp":
        """Return a view sharing the data but with its own zeroed counter."""
        clone = copy.copy(self)
        clone._counter = MatvecCounter()
        return clone
