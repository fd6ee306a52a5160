"""Smoothing-parameter grid schema."""

from typing import List, Tuple

import attrs
import numpy as np

from ..errors import ConfigError
from ..utils import float_array


def _check_axis(name: str, values: np.ndarray, allow_zero: bool):
    if values.ndim != 1 or values.size == 0:
        raise ConfigError(f"Lambda grid '{name}' must be a non-empty vector")
    if np.any(np.diff(values) <= 0):
        raise ConfigError(f"Lambda grid '{name}' must be strictly increasing")
    floor_ok = values >= 0 if allow_zero else values > 0
    if not np.all(floor_ok & np.isfinite(values)):
        kind = "non-negative" if allow_zero else "positive"
        raise ConfigError(f"Lambda grid '{name}' must be finite and {kind}")


@attrs.define(eq=False)
class LambdaGrid:
    """Cross-product search space for (lambda_rho, lambda_beta)."""

    rho_values: np.ndarray = attrs.field(converter=float_array)
    beta_values: np.ndarray = attrs.field(converter=float_array)
    allow_zero: bool = False

    def __attrs_post_init__(self):
        _check_axis("rho", self.rho_values, self.allow_zero)
        _check_axis("beta", self.beta_values, self.allow_zero)

    @classmethod
    def default(cls) -> "LambdaGrid":
        """Seven decades 1e-4 .. 1e2 on both axes."""
        values = 10.0 ** np.arange(-4, 3)
        return cls(rho_values=values, beta_values=values.copy())

    @classmethod
    def single(cls, lambda_rho: float, lambda_beta: float) -> "LambdaGrid":
        return cls(
            rho_values=[lambda_rho],
            beta_values=[lambda_beta],
            allow_zero=min(lambda_rho, lambda_beta) == 0,
        )

    def pairs(self) -> List[Tuple[float, float]]:
        return [
            (float(r), float(b)) for r in self.rho_values for b in self.beta_values
        ]

    def __len__(self) -> int:
        return self.rho_values.size * self.beta_values.size

    def __str__(self) -> str:
        return (
            f"Lambda grid {self.rho_values.size}x{self.beta_values.size}: "
            f"rho [{self.rho_values[0]:g} .. {self.rho_values[-1]:g}], "
            f"beta [{self.beta_values[0]:g} .. {self.beta_values[-1]:g}]"
        )
