"""Quasi-Gaussian BIC and the search over smoothing parameters and truncation levels."""

import logging
from typing import List, Optional, Sequence, Tuple

import attrs
import numpy as np

from . import linalg
from .errors import AllFitsFailedError, DegenerateVarianceError, NumericalError
from .schemas import (
    DesignMatrices,
    EstimatorSettings,
    FitResult,
    FunctionalSample,
    LambdaGrid,
    PenaltyAssembly,
    SpatialWeights,
)
from .utils import parallel_map

logger = logging.getLogger(__name__)

MIN_VARIANCE = 1e-300


def quasi_loglik(fit: FitResult) -> float:
    """Gaussian log-likelihood of the residual curves at variance sigma2_hat.

    L = -(nM/2) log(2 pi sigma2) - SSR / (2 sigma2).
    """
    sigma2 = fit.sigma2_hat
    if not sigma2 >= MIN_VARIANCE:
        raise DegenerateVarianceError(
            f"Residual variance {sigma2:.3e} is too small for a likelihood"
        )
    residuals = fit.residuals.values
    ssr = float(np.sum(residuals**2))
    return -0.5 * residuals.size * np.log(2.0 * np.pi * sigma2) - ssr / (2.0 * sigma2)


def effective_df_from(factor, gram: np.ndarray) -> float:
    """trace[(Pi_hat' Pi + R)^-1 Pi_hat' Pi] from an existing factorization."""
    return float(np.trace(linalg.solve_factored(factor, gram)))


def effective_df(design: DesignMatrices, penalty: PenaltyAssembly) -> float:
    """Ridge-type effective dimension of the second-stage smoother."""
    gram = linalg.symmetrize(design.pi_hat.T @ design.pi)
    factor = linalg.factorize_penalized(gram, (penalty.rho_block, penalty.beta_block))
    return effective_df_from(factor, gram)


def bic(fit: FitResult) -> float:
    """-2 L + edf * log(n), with n the number of spatial units."""
    return -2.0 * quasi_loglik(fit) + fit.edf * np.log(fit.num_units)


def _best(candidates: List[FitResult]) -> FitResult:
    # Equal BIC goes to the larger pair, independent of evaluation order.
    return min(candidates, key=lambda f: (f.bic, -f.lambdas[0], -f.lambdas[1]))


def search_context(context, grid: LambdaGrid, jobs: int = 1) -> Tuple[float, float, FitResult]:
    """Evaluate every grid pair on a prepared context and keep the BIC minimizer.

    Raises:
        AllFitsFailedError: If no grid pair produced a fit
    """
    from .estimator import fit_prepared

    failures = []

    def evaluate(pair):
        try:
            result = fit_prepared(context, pair)
        except NumericalError as e:
            failures.append((pair, e))
            logger.debug(f"lambda pair {pair} failed: {e}")
            return None
        logger.debug(f"lambda pair {pair}: BIC {result.bic:.6g}, edf {result.edf:.3f}")
        return result

    results = [r for r in parallel_map(evaluate, grid.pairs(), jobs=jobs) if r is not None]
    if not results:
        last = failures[-1][1] if failures else None
        raise AllFitsFailedError(
            f"All {len(grid)} smoothing-parameter pairs failed",
            stage="selection",
            details=str(last) if last else None,
        )
    best = _best(results)
    logger.info(
        f"Selected lambda_rho={best.lambdas[0]:g}, lambda_beta={best.lambdas[1]:g} "
        f"(BIC {best.bic:.6g}, {len(failures)} of {len(grid)} pairs failed)"
    )
    return best.lambdas[0], best.lambdas[1], best


def grid_search(
    response: FunctionalSample,
    predictor: FunctionalSample,
    weights: SpatialWeights,
    grid: Optional[LambdaGrid] = None,
    settings: Optional[EstimatorSettings] = None,
    jobs: int = 1,
) -> Tuple[float, float, FitResult]:
    """Exhaustive BIC search over the cross-product of grid."""
    from .estimator import prepare

    context = prepare(response, predictor, weights, settings or EstimatorSettings())
    return search_context(context, grid or LambdaGrid.default(), jobs=jobs)


def select_truncation(
    response: FunctionalSample,
    predictor: FunctionalSample,
    weights: SpatialWeights,
    candidates: Sequence[Tuple[int, int]],
    grid: Optional[LambdaGrid] = None,
    settings: Optional[EstimatorSettings] = None,
    jobs: int = 1,
) -> Tuple[int, int, Tuple[float, float], FitResult]:
    """Pick (K_y, K_x) and the smoothing pair jointly by BIC.

    Each candidate runs its own lambda search; equal BIC goes to the smaller
    basis.
    """
    settings = settings or EstimatorSettings()
    fits = []
    for num_y, num_x in candidates:
        trial = attrs.evolve(settings, num_y=num_y, num_x=num_x)
        try:
            _, _, result = grid_search(response, predictor, weights, grid, trial, jobs)
        except NumericalError as e:
            logger.warning(f"Truncation (K_y={num_y}, K_x={num_x}) failed: {e}")
            continue
        fits.append(result)
    if not fits:
        raise AllFitsFailedError(
            f"All {len(candidates)} truncation candidates failed", stage="selection"
        )
    best = min(
        fits,
        key=lambda f: (f.bic, f.settings.num_y + f.settings.num_x, f.settings.num_y),
    )
    logger.info(
        f"Selected K_y={best.settings.num_y}, K_x={best.settings.num_x} (BIC {best.bic:.6g})"
    )
    return best.settings.num_y, best.settings.num_x, best.lambdas, best
