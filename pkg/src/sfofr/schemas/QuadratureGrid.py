"""Quadrature grid schema."""

from typing import Optional

import attrs
import numpy as np

from ..errors import NonMonotoneGridError
from ..utils import float_array


@attrs.define(eq=False)
class QuadratureGrid:
    """
    Observation grid with left-Riemann quadrature weights.

    weights[i] = points[i + 1] - points[i]; the last point carries no weight.
    source holds the points in the units they were read in (days, hours)
    when the grid was rescaled to [0, 1].
    """

    points: np.ndarray = attrs.field(converter=float_array)
    weights: np.ndarray = attrs.field(converter=float_array)
    source: Optional[np.ndarray] = attrs.field(
        default=None, converter=attrs.converters.optional(float_array)
    )

    def __attrs_post_init__(self):
        if self.points.ndim != 1 or self.points.size < 2:
            raise NonMonotoneGridError("A grid needs at least two points")
        if self.weights.shape != (self.points.size - 1,):
            raise NonMonotoneGridError(
                f"Expected {self.points.size - 1} weights, got {self.weights.size}"
            )
        if np.any(self.weights <= 0):
            raise NonMonotoneGridError("Grid points must be strictly increasing")
        if self.source is not None and self.source.shape != self.points.shape:
            raise NonMonotoneGridError(
                f"Source axis has {self.source.size} points, the grid has {self.points.size}"
            )

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def axis(self) -> np.ndarray:
        """Points on the original axis, or the points themselves."""
        return self.points if self.source is None else self.source

    @property
    def full_weights(self) -> np.ndarray:
        """Weights padded with a trailing zero so they align with points."""
        return np.append(self.weights, 0.0)

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        """Left-Riemann integral of values sampled on the grid along axis."""
        values = np.moveaxis(np.asarray(values, dtype=np.float64), axis, -1)
        return values[..., :-1] @ self.weights

    def __str__(self) -> str:
        return (
            f"Grid of {self.size} points on "
            f"[{self.points[0]:g}, {self.points[-1]:g}]"
        )
