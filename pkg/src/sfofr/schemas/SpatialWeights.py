"""Spatial weight matrix schema."""

from typing import Tuple

import attrs
import numpy as np

from ..errors import InvariantViolationError
from ..utils import float_array


@attrs.define(eq=False)
class SpatialWeights:
    """
    Non-negative n x n weight matrix with an exactly zero diagonal.

    When normalized, every row with a nonzero entry sums to one; rows listed in
    zero_rows are isolated units that had nothing to normalize.
    """

    matrix: np.ndarray = attrs.field(converter=float_array)
    normalized: bool = False
    zero_rows: Tuple[int, ...] = ()

    def __attrs_post_init__(self):
        w = self.matrix
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvariantViolationError(
                f"Weight matrix must be square, got shape {w.shape}"
            )
        if np.any(np.diag(w) != 0.0):
            bad = int(np.flatnonzero(np.diag(w))[0])
            raise InvariantViolationError(
                "Weight matrix must have a zero diagonal",
                details=f"w[{bad},{bad}] = {w[bad, bad]!r}",
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvariantViolationError("Weights must be finite and non-negative")
        if self.normalized:
            sums = w.sum(axis=1)
            live = sums != 0
            if np.any(np.abs(sums[live] - 1.0) > 1e-12):
                raise InvariantViolationError("Normalized rows must sum to one")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def inf_norm(self) -> float:
        """Maximum absolute row sum."""
        return float(np.abs(self.matrix).sum(axis=1).max())

    def __str__(self) -> str:
        nonzero = int(np.count_nonzero(self.matrix))
        status = "row-normalized" if self.normalized else "raw"
        result = f"Spatial weights: {self.size} units, {nonzero} links, {status}"
        if self.zero_rows:
            result += f"\n  Isolated units: {list(self.zero_rows)}"
        return result
