"""Bootstrap band schema."""

from typing import Optional

import attrs
import numpy as np

from ..errors import ConfigError
from ..utils import float_array


@attrs.define(eq=False)
class BootstrapSurfaces:
    """Pointwise (alpha/2, 1 - alpha/2) quantile bands for beta and rho."""

    alpha: float
    B: int
    lower_beta: np.ndarray = attrs.field(converter=float_array)
    upper_beta: np.ndarray = attrs.field(converter=float_array)
    lower_rho: np.ndarray = attrs.field(converter=float_array)
    upper_rho: np.ndarray = attrs.field(converter=float_array)
    failed: int = 0
    beta_replicates: Optional[np.ndarray] = None
    rho_replicates: Optional[np.ndarray] = None

    def band(self, which: str):
        """Return (lower, upper) for 'beta' or 'rho'."""
        if which == "beta":
            return self.lower_beta, self.upper_beta
        if which == "rho":
            return self.lower_rho, self.upper_rho
        raise ConfigError(f"Unknown surface '{which}', expected 'beta' or 'rho'")

    @property
    def is_degenerate(self) -> bool:
        """True when every band has zero width (noiseless resampling)."""
        return bool(
            np.array_equal(self.lower_beta, self.upper_beta)
            and np.array_equal(self.lower_rho, self.upper_rho)
        )

    def __str__(self) -> str:
        width_beta = float(np.mean(self.upper_beta - self.lower_beta))
        width_rho = float(np.mean(self.upper_rho - self.lower_rho))
        return (
            f"Bootstrap bands ({1 - self.alpha:.0%} level, B={self.B}, failed={self.failed}):\n"
            f"  Mean beta width: {width_beta:.6g}\n"
            f"  Mean rho width: {width_rho:.6g}"
        )
