"""Data-generating process, accuracy metrics and the Monte Carlo runner."""

import logging
from typing import Callable, Optional, Tuple

import attrs
import numpy as np

from .basis import uniform_grid
from .errors import (
    DegenerateVarianceError,
    GridMismatchError,
    NumericalError,
    ReplicationFailureError,
    ZeroNormError,
)
from .estimator import fit as fit_model
from .estimator import neumann_fitted, predict
from .inference import bootstrap_ci, cpd, interval_score
from .schemas import (
    EstimatorSettings,
    FunctionalSample,
    LambdaGrid,
    MetricTable,
    QuadratureGrid,
    SimulationConfig,
    SpatialWeights,
)
from .spatial import inverse_distance_weights
from .utils import parallel_map, spawn_rng, stopwatch

logger = logging.getLogger(__name__)

FOURIER_TERMS = 10
MAX_FAILED_SHARE = 0.05


def gen_predictor(n: int, grid: QuadratureGrid, rng, terms: int = FOURIER_TERMS) -> FunctionalSample:
    """Truncated Fourier curves sum_k k^-3/2 (a_k sqrt2 cos(k pi s) + b_k sqrt2 sin(k pi s))."""
    k = np.arange(1, terms + 1)
    decay = k ** -1.5
    phase = np.pi * k[:, None] * grid.points[None, :]
    cos_terms = np.sqrt(2.0) * np.cos(phase)
    sin_terms = np.sqrt(2.0) * np.sin(phase)
    cos_scores = rng.standard_normal((n, terms))
    sin_scores = rng.standard_normal((n, terms))
    values = (cos_scores * decay) @ cos_terms + (sin_scores * decay) @ sin_terms
    return FunctionalSample(values=values, grid=grid)


def true_beta(t, s):
    return 2.0 + s + t + 0.5 * np.sin(2.0 * np.pi * s * t)


def true_rho(t, u, eta: float):
    return eta * (1.0 + u * t) / (1.0 + np.abs(u - t))


def gen_response(
    predictor: FunctionalSample,
    weights: SpatialWeights,
    eta: float,
    noise_sd: float,
    rng,
    tol: float = 0.001,
    beta: Callable = true_beta,
) -> FunctionalSample:
    """Responses from the spatial model with the true surfaces, by Neumann iteration.

    Response and predictor share the grid. Noise is white on the grid.
    """
    points = predictor.grid.points
    beta_surface = beta(points[:, None], points[None, :])
    forcing = (predictor.values * predictor.grid.full_weights[None, :]) @ beta_surface.T
    if noise_sd > 0:
        forcing = forcing + noise_sd * rng.standard_normal(forcing.shape)
    rho_surface = true_rho(points[:, None], points[None, :], eta)
    return neumann_fitted(weights, rho_surface, predictor.with_values(forcing), tol=tol)


def _check_grids(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise GridMismatchError(f"Cannot compare arrays of shapes {a.shape} and {b.shape}")


def _relative_percent(error_sq: float, truth_sq: float) -> float:
    if truth_sq == 0.0:
        raise ZeroNormError("Reference has zero norm; relative error undefined")
    return 100.0 * float(np.sqrt(error_sq / truth_sq))


def rrispee(
    estimate, truth, grid_row: QuadratureGrid, grid_col: QuadratureGrid
) -> float:
    """Root relative integrated squared percentage error of a surface (left-Riemann in both axes)."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    _check_grids(estimate, truth)
    if truth.shape != (grid_row.size, grid_col.size):
        raise GridMismatchError(
            f"Surface is {truth.shape} but the grids are {grid_row.size}x{grid_col.size}"
        )

    def norm_sq(surface):
        return float(grid_row.full_weights @ surface**2 @ grid_col.full_weights)

    return _relative_percent(norm_sq(estimate - truth), norm_sq(truth))


def _curve_norm_sq(values: np.ndarray, grid: QuadratureGrid) -> float:
    return float(np.sum(grid.integrate(values**2)))


def rmspe(pred: FunctionalSample, truth: FunctionalSample) -> float:
    """Root mean squared percentage error over all curves and grid points."""
    _check_grids(pred.values, truth.values)
    return _relative_percent(
        _curve_norm_sq(pred.values - truth.values, truth.grid),
        _curve_norm_sq(truth.values, truth.grid),
    )


def rmse_r2(pred: FunctionalSample, obs: FunctionalSample) -> Tuple[float, float]:
    """Relative RMSE (percent) and R^2 against the cross-sectional mean curve."""
    _check_grids(pred.values, obs.values)
    rmse = rmspe(pred, obs)
    total = _curve_norm_sq(obs.values - obs.values.mean(axis=0), obs.grid)
    if total == 0.0:
        raise DegenerateVarianceError("Observed curves have no variation around their mean")
    return rmse, 1.0 - _curve_norm_sq(obs.values - pred.values, obs.grid) / total


@attrs.define(eq=False)
class SimulatedData:
    """One training draw, an optional independent test draw, and the true surfaces."""

    train_x: FunctionalSample
    train_y: FunctionalSample
    train_w: SpatialWeights
    beta_true: np.ndarray
    rho_true: np.ndarray
    test_x: Optional[FunctionalSample] = None
    test_y: Optional[FunctionalSample] = None
    test_w: Optional[SpatialWeights] = None

    @property
    def grid(self) -> QuadratureGrid:
        return self.train_y.grid


def simulate_dataset(config: SimulationConfig, rng, include_test: bool = True) -> SimulatedData:
    """Draw a training system and, optionally, a disjoint test system.

    Test units form their own spatial system with their own inverse-distance
    weights and no coupling to training units. Their responses are noiseless
    and serve as the prediction target.
    """
    grid = uniform_grid(config.grid_size)
    points = grid.points
    train_x = gen_predictor(config.n_train, grid, rng)
    train_w = inverse_distance_weights(config.n_train)
    train_y = gen_response(train_x, train_w, config.eta, config.noise_sd, rng)
    data = SimulatedData(
        train_x=train_x,
        train_y=train_y,
        train_w=train_w,
        beta_true=true_beta(points[:, None], points[None, :]),
        rho_true=true_rho(points[:, None], points[None, :], config.eta),
    )
    if include_test:
        data.test_x = gen_predictor(config.n_test, grid, rng)
        data.test_w = inverse_distance_weights(config.n_test)
        data.test_y = gen_response(data.test_x, data.test_w, config.eta, 0.0, rng)
    return data


def _replicate(
    index: int,
    config: SimulationConfig,
    settings: EstimatorSettings,
    grid: LambdaGrid,
    bootstrap_replicates: int,
    alpha: float,
) -> dict:
    rng = spawn_rng(config.seed, index)
    data = simulate_dataset(config, rng)
    with stopwatch() as elapsed:
        result = fit_model(data.train_y, data.train_x, data.train_w, settings, grid=grid)
        record = {
            "replication": index,
            "rrispee_beta": rrispee(result.beta_surface, data.beta_true, data.grid, data.grid),
            "rrispee_rho": rrispee(result.rho_surface, data.rho_true, data.grid, data.grid),
            "rmspe": rmspe(predict(result, data.test_x, data.test_w), data.test_y),
            "cpd_beta": float("nan"),
            "cpd_rho": float("nan"),
            "score_beta": float("nan"),
            "score_rho": float("nan"),
        }
        if bootstrap_replicates:
            bands = bootstrap_ci(
                result,
                data.train_y,
                data.train_x,
                data.train_w,
                B=bootstrap_replicates,
                alpha=alpha,
                seed=int(rng.integers(2**31)),
            )
            record["cpd_beta"] = cpd(data.beta_true, bands, "beta")
            record["cpd_rho"] = cpd(data.rho_true, bands, "rho")
            record["score_beta"] = interval_score(data.beta_true, bands, "beta")
            record["score_rho"] = interval_score(data.rho_true, bands, "rho")
    record["seconds"] = elapsed[0]
    return record


def monte_carlo(
    config: SimulationConfig,
    settings: Optional[EstimatorSettings] = None,
    grid: Optional[LambdaGrid] = None,
    bootstrap_replicates: int = 0,
    alpha: float = 0.05,
    jobs: int = 1,
) -> MetricTable:
    """Run config.replications independent replications and collect their metrics.

    Replication k uses the random stream (seed, k), so the table does not
    depend on scheduling. bootstrap_replicates = 0 skips the bands.

    Raises:
        ReplicationFailureError: If more than 5% of replications fail
    """
    settings = settings or EstimatorSettings()
    grid = grid or LambdaGrid.default()

    def run(index: int):
        try:
            record = _replicate(index, config, settings, grid, bootstrap_replicates, alpha)
        except NumericalError as e:
            logger.warning(f"Replication {index} failed: {e}")
            return index, None
        logger.info(f"Replication {index + 1}/{config.replications} done in {record['seconds']:.2f}s")
        return index, record

    outcomes = parallel_map(run, range(config.replications), jobs=jobs)
    table = MetricTable(
        records=[r for _, r in outcomes if r is not None],
        failures=[i for i, r in outcomes if r is None],
    )
    if len(table.failures) > MAX_FAILED_SHARE * config.replications:
        raise ReplicationFailureError(
            f"{len(table.failures)} of {config.replications} replications failed",
            stage="monte_carlo",
            details=f"failed indices {table.failures[:20]}",
        )
    return table
