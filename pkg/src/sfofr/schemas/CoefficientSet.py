"""Tensor-product coefficient schema."""

import attrs
import numpy as np

from ..errors import DimensionMismatchError
from ..utils import float_array


@attrs.define(eq=False)
class CoefficientSet:
    """Coefficient matrices rho (K_y x K_y) and b (K_y x K_x)."""

    rho_coeffs: np.ndarray = attrs.field(converter=float_array)
    beta_coeffs: np.ndarray = attrs.field(converter=float_array)

    def __attrs_post_init__(self):
        k_y = self.rho_coeffs.shape[0]
        if self.rho_coeffs.shape != (k_y, k_y) or self.beta_coeffs.shape[0] != k_y:
            raise DimensionMismatchError(
                f"Incompatible coefficient shapes {self.rho_coeffs.shape} and "
                f"{self.beta_coeffs.shape}"
            )
        if not (
            np.all(np.isfinite(self.rho_coeffs))
            and np.all(np.isfinite(self.beta_coeffs))
        ):
            raise DimensionMismatchError("Coefficients must be finite")

    @classmethod
    def from_theta(cls, theta: np.ndarray, num_y: int, num_x: int) -> "CoefficientSet":
        """Split theta = (vec(rho), vec(b)) using column-major vec."""
        theta = np.asarray(theta, dtype=np.float64)
        split = num_y * num_y
        if theta.size != split + num_y * num_x:
            raise DimensionMismatchError(
                f"theta has {theta.size} entries, expected {split + num_y * num_x}"
            )
        return cls(
            rho_coeffs=theta[:split].reshape((num_y, num_y), order="F"),
            beta_coeffs=theta[split:].reshape((num_y, num_x), order="F"),
        )

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate(
            [self.rho_coeffs.ravel(order="F"), self.beta_coeffs.ravel(order="F")]
        )

    def __str__(self) -> str:
        return (
            f"Coefficients: rho {self.rho_coeffs.shape[0]}x{self.rho_coeffs.shape[1]}, "
            f"beta {self.beta_coeffs.shape[0]}x{self.beta_coeffs.shape[1]}"
        )
