"""Block roughness penalty schema."""

import attrs
import numpy as np

from ..utils import float_array


@attrs.define(eq=False)
class PenaltyAssembly:
    """Block-diagonal penalty R(lambda_rho, lambda_beta) acting on theta."""

    lambda_rho: float
    lambda_beta: float
    R: np.ndarray = attrs.field(converter=float_array)
    num_rho: int

    @property
    def rho_block(self) -> np.ndarray:
        return self.R[: self.num_rho, : self.num_rho]

    @property
    def beta_block(self) -> np.ndarray:
        return self.R[self.num_rho :, self.num_rho :]

    def __str__(self) -> str:
        return (
            f"Penalty: lambda_rho={self.lambda_rho:g}, lambda_beta={self.lambda_beta:g}, "
            f"size {self.R.shape[0]}"
        )
