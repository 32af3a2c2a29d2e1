"""Operator wrapper that injects relative perturbations into every product."""

from __future__ import annotations

import threading

import numpy as np

from ..exceptions import ConfigError
from ..operator_interface import DenseMatrix, LinearOp


class InexactOperator(LinearOp):
    """Return A x + e with ||e|| = rel_tol ||A x|| in a seeded random direction.

    The perturbation stream is consumed in call order, so a fixed sequence of
    products is reproducible. ``rel_tol = 0`` returns the inner results
    unchanged.
    """

    def __init__(self, inner: LinearOp, rel_tol: float, seed: int) -> None:
        if not 0.0 <= rel_tol < 1.0:
            raise ConfigError(f"must lie in [0, 1), got {rel_tol}", "rel_tol")
        super().__init__(*inner.shape)
        self._inner = inner
        self.rel_tol = float(rel_tol)
        self.seed = int(seed)
        self._rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.seed))
        )
        self._rng_lock = threading.Lock()

    def _perturb(self, y: DenseMatrix) -> DenseMatrix:
        if self.rel_tol == 0.0:
            return y
        with self._rng_lock:
            direction = self._rng.standard_normal(y.shape[0])
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            return y
        return y + (self.rel_tol * np.linalg.norm(y) / norm) * direction

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._perturb(self._inner.apply(x))

    def _apply_transpose(self, y: DenseMatrix) -> DenseMatrix:
        return self._perturb(self._inner.apply_transpose(y))

    def with_fresh_counter(self) -> "InexactOperator":
        # A fresh view restarts the perturbation stream.
        return InexactOperator(self._inner.with_fresh_counter(), self.rel_tol, self.seed)


def inexact_adapter(inner: LinearOp, rel_tol: float, seed: int) -> InexactOperator:
    """Wrap ``inner`` so each product carries a relative error of ``rel_tol``."""
    return InexactOperator(inner, rel_tol, seed)
