"""Univariate B-spline basis schema."""

from typing import Tuple

import attrs
import numpy as np

from ..errors import InvalidDimensionError
from ..utils import float_array


@attrs.define(eq=False)
class BasisSystem:
    """
    Clamped B-spline basis on [0, 1].

    The boundary knots are repeated degree + 1 times, so
    num_funcs = interior_knot_count + degree + 1.
    """

    degree: int
    num_funcs: int
    knots: np.ndarray = attrs.field(converter=float_array)
    domain: Tuple[float, float] = (0.0, 1.0)

    def __attrs_post_init__(self):
        order = self.degree + 1
        if self.degree < 1 or self.num_funcs < order:
            raise InvalidDimensionError(
                f"Basis needs num_funcs >= degree + 1 (got {self.num_funcs}, degree {self.degree})"
            )
        if self.knots.size != self.num_funcs + order:
            raise InvalidDimensionError(
                f"Expected {self.num_funcs + order} knots, got {self.knots.size}"
            )
        if np.any(np.diff(self.knots) < 0):
            raise InvalidDimensionError("Knot vector must be non-decreasing")
        lo, hi = self.domain
        if not (
            np.all(self.knots[:order] == lo) and np.all(self.knots[-order:] == hi)
        ):
            raise InvalidDimensionError(
                "Boundary knots must equal the domain endpoints with multiplicity degree + 1"
            )

    @property
    def interior_knots(self) -> np.ndarray:
        """Knots strictly inside the domain."""
        order = self.degree + 1
        return self.knots[order:-order]

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct knot values, i.e. the edges of the polynomial spans."""
        return np.unique(self.knots)

    def __str__(self) -> str:
        """Format basis for human-readable output."""
        return (
            f"B-spline basis: {self.num_funcs} functions, degree {self.degree}, "
            f"{self.interior_knots.size} interior knots on "
            f"[{self.domain[0]:g}, {self.domain[1]:g}]"
        )
