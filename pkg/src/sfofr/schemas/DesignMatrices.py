"""Regression and instrument matrices schema."""

import attrs
import numpy as np

from ..utils import float_array


@attrs.define(eq=False)
class DesignMatrices:
    """
    Stacked design of the discretized model.

    Rows are ordered unit-major (unit i occupies rows i*M .. i*M + M - 1).
    Columns of pi are [endogenous rho block | exogenous beta block], matching
    theta = (vec(rho), vec(b)).
    """

    pi: np.ndarray = attrs.field(converter=float_array)
    z: np.ndarray = attrs.field(converter=float_array)
    y_vec: np.ndarray = attrs.field(converter=float_array)
    pi_hat: np.ndarray = attrs.field(converter=float_array)
    instrument_rank: int = 0
    weak_instruments: bool = False

    @property
    def num_rows(self) -> int:
        return self.pi.shape[0]

    @property
    def num_params(self) -> int:
        return self.pi.shape[1]

    def __str__(self) -> str:
        return (
            f"Design: {self.num_rows} rows, {self.num_params} parameters, "
            f"{self.z.shape[1]} instruments (rank {self.instrument_rank})"
        )
