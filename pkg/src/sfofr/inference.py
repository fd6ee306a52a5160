"""Residual bootstrap bands for the surfaces, and the coverage metrics used to judge them."""

import logging

import numpy as np

from .errors import BootstrapFailureError, ConfigError, GridMismatchError, NumericalError
from .estimator import fit_prepared, prepare
from .schemas import BootstrapSurfaces, FitResult, FunctionalSample, SpatialWeights
from .utils import parallel_map, spawn_rng

logger = logging.getLogger(__name__)

MAX_FAILED_SHARE = 0.10


def bootstrap_ci(
    fit: FitResult,
    response: FunctionalSample,
    predictor: FunctionalSample,
    weights: SpatialWeights,
    B: int = 199,
    alpha: float = 0.05,
    seed: int = 0,
    jobs: int = 1,
    keep_replicates: bool = False,
) -> BootstrapSurfaces:
    """Pointwise bootstrap bands for beta and rho.

    Whole residual curves are centered by the mean residual curve and
    resampled with replacement across units. Each replicate adds them to the
    fitted curves and refits at the same smoothing parameters and bases;
    replicate k draws from the stream (seed, k). Failed refits are skipped.

    Raises:
        ConfigError: If alpha is outside (0, 1) or B < 2 / alpha - 1
        BootstrapFailureError: If more than 10% of the refits fail
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if B < 2.0 / alpha - 1.0:
        raise ConfigError(
            f"B = {B} is too small for alpha = {alpha}",
            details=f"need at least {int(np.ceil(2.0 / alpha - 1.0))} replicates",
        )

    base = prepare(response, predictor, weights, fit.settings)
    fitted = fit.fitted.values
    residuals = fit.residuals.values
    centered = residuals - residuals.mean(axis=0)
    n = fitted.shape[0]

    def replicate(index: int):
        rng = spawn_rng(seed, index)
        draw = rng.integers(0, n, size=n)
        resampled = response.with_values(fitted + centered[draw])
        try:
            context = prepare(resampled, predictor, weights, reuse=base)
            refit = fit_prepared(context, fit.lambdas, score=False)
        except NumericalError as e:
            logger.warning(f"Bootstrap replicate {index} failed: {e}")
            return None
        return refit.beta_surface, refit.rho_surface

    outcomes = parallel_map(replicate, range(B), jobs=jobs)
    surfaces = [o for o in outcomes if o is not None]
    failed = B - len(surfaces)
    if failed > MAX_FAILED_SHARE * B or not surfaces:
        raise BootstrapFailureError(
            f"{failed} of {B} bootstrap refits failed", stage="bootstrap"
        )

    betas = np.stack([s[0] for s in surfaces])
    rhos = np.stack([s[1] for s in surfaces])
    levels = [alpha / 2.0, 1.0 - alpha / 2.0]
    lower_beta, upper_beta = np.quantile(betas, levels, axis=0, method="linear")
    lower_rho, upper_rho = np.quantile(rhos, levels, axis=0, method="linear")
    logger.info(f"Bootstrap finished: {len(surfaces)} replicates, {failed} failed")

    return BootstrapSurfaces(
        alpha=alpha,
        B=B,
        lower_beta=lower_beta,
        upper_beta=upper_beta,
        lower_rho=lower_rho,
        upper_rho=upper_rho,
        failed=failed,
        beta_replicates=betas if keep_replicates else None,
        rho_replicates=rhos if keep_replicates else None,
    )


def _aligned(truth, bands: BootstrapSurfaces, which: str):
    lower, upper = bands.band(which)
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != lower.shape:
        raise GridMismatchError(
            f"Truth surface is {truth.shape} but the {which} bands are {lower.shape}"
        )
    return truth, lower, upper


def cpd(truth, bands: BootstrapSurfaces, which: str = "beta") -> float:
    """|nominal coverage - share of grid points inside the band|."""
    truth, lower, upper = _aligned(truth, bands, which)
    covered = (lower <= truth) & (truth <= upper)
    return float(abs((1.0 - bands.alpha) - covered.mean()))


def interval_score(truth, bands: BootstrapSurfaces, which: str = "beta") -> float:
    """Grid average of the interval score: width plus 2/alpha times any miss."""
    truth, lower, upper = _aligned(truth, bands, which)
    scale = 2.0 / bands.alpha
    score = (
        (upper - lower)
        + scale * (lower - truth) * (truth < lower)
        + scale * (truth - upper) * (truth > upper)
    )
    return float(np.mean(np.abs(score)))
