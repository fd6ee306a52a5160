"""Fitted model schema."""

from typing import Tuple

import attrs
import numpy as np

from ..utils import float_array
from .BasisSystem import BasisSystem
from .CoefficientSet import CoefficientSet
from .EstimatorSettings import EstimatorSettings
from .FunctionalSample import FunctionalSample


@attrs.define(eq=False)
class FitResult:
    """
    Outcome of one penalized two-stage fit at fixed smoothing parameters.

    beta_surface is evaluated on the response grid x predictor grid, and
    rho_surface on the response grid x response grid.
    """

    theta: CoefficientSet
    lambdas: Tuple[float, float]
    fitted: FunctionalSample
    residuals: FunctionalSample
    sigma2_hat: float
    bic: float
    edf: float
    loglik: float
    basis_y: BasisSystem
    basis_x: BasisSystem
    beta_surface: np.ndarray = attrs.field(converter=float_array)
    rho_surface: np.ndarray = attrs.field(converter=float_array)
    s_points: np.ndarray = attrs.field(converter=float_array)
    rho_sup: float = float("nan")
    contraction_ok: bool = True
    neumann_iterations: int = 0
    settings: EstimatorSettings = attrs.Factory(EstimatorSettings)

    @property
    def t_points(self) -> np.ndarray:
        return self.fitted.grid.points

    @property
    def num_units(self) -> int:
        return self.fitted.num_curves

    @property
    def observed(self) -> FunctionalSample:
        return self.fitted.with_values(self.fitted.values + self.residuals.values)

    def __str__(self) -> str:
        result = (
            f"PenS2SLS fit:\n"
            f"  Units: {self.num_units}\n"
            f"  Bases: K_y={self.basis_y.num_funcs}, K_x={self.basis_x.num_funcs}, "
            f"degree {self.basis_y.degree}\n"
            f"  Lambdas: rho={self.lambdas[0]:g}, beta={self.lambdas[1]:g}\n"
            f"  BIC: {self.bic:.4f}\n"
            f"  Effective df: {self.edf:.3f}\n"
            f"  sigma^2: {self.sigma2_hat:.6g}"
        )
        if not self.contraction_ok:
            result += f"\n  Warning: sup|rho| = {self.rho_sup:.4f} breaks the contraction condition"
        return result
