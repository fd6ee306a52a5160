"""Discretely observed curves schema."""

import attrs
import numpy as np

from ..errors import DimensionMismatchError, SchemaError
from ..utils import float_array
from .QuadratureGrid import QuadratureGrid


@attrs.define(eq=False)
class FunctionalSample:
    """n curves (rows) evaluated on a shared grid (columns)."""

    values: np.ndarray = attrs.field(converter=float_array)
    grid: QuadratureGrid

    def __attrs_post_init__(self):
        if self.values.ndim != 2:
            raise DimensionMismatchError(
                f"Curve matrix must be 2-D, got shape {self.values.shape}"
            )
        if self.values.shape[1] != self.grid.size:
            raise DimensionMismatchError(
                f"Curves have {self.values.shape[1]} columns but the grid has "
                f"{self.grid.size} points"
            )
        if not np.all(np.isfinite(self.values)):
            raise SchemaError("Curve values must all be finite")

    @property
    def num_curves(self) -> int:
        return self.values.shape[0]

    @property
    def num_points(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "FunctionalSample":
        """Same grid, new curve values."""
        return FunctionalSample(values=values, grid=self.grid)

    def centered(self) -> "FunctionalSample":
        """Subtract the cross-sectional mean curve."""
        return self.with_values(self.values - self.values.mean(axis=0))

    def subset(self, rows) -> "FunctionalSample":
        return self.with_values(self.values[rows])

    def __str__(self) -> str:
        return f"{self.num_curves} curves on a {self.num_points}-point grid"
