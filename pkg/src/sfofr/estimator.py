"""Penalized spatial two-stage least squares: penalty, solve, surfaces and fitted curves."""

import logging
from contextlib import contextmanager
from typing import Dict, Optional, Tuple

import attrs
import numpy as np
import scipy.linalg

from . import linalg
from .basis import eval_basis, gram_matrix, make_basis, penalty_matrix
from .design import (
    build_design,
    build_instruments,
    instrument_basis,
    project_curves,
    project_onto,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    NeumannConvergenceError,
    SfofrError,
)
from .schemas import (
    BasisSystem,
    CoefficientSet,
    DesignMatrices,
    EstimatorSettings,
    FitResult,
    FunctionalSample,
    LambdaGrid,
    PenaltyAssembly,
    SpatialWeights,
)
from .selection import bic, effective_df_from, quasi_loglik, search_context
from .spatial import contraction_check, rho_sup, spatial_lag

logger = logging.getLogger(__name__)

SUP_GRID_SIZE = 201


@contextmanager
def _stage(name: str):
    """Tag any package error escaping the block with the pipeline stage."""
    try:
        yield
    except SfofrError as e:
        raise e.with_stage(name)


def _unit_penalties(basis_y: BasisSystem, basis_x: BasisSystem) -> Tuple[np.ndarray, np.ndarray]:
    """Kronecker-sum roughness blocks for vec(rho) and vec(b) at unit lambda."""
    phi, d_t = gram_matrix(basis_y), penalty_matrix(basis_y)
    psi, d_s = gram_matrix(basis_x), penalty_matrix(basis_x)
    rho_block = np.kron(phi, d_t) + np.kron(d_t, phi)
    beta_block = np.kron(psi, d_t) + np.kron(d_s, phi)
    return rho_block, beta_block


def _penalty_from_units(
    lambda_rho: float, lambda_beta: float, units: Tuple[np.ndarray, np.ndarray]
) -> PenaltyAssembly:
    rho_block, beta_block = units
    return PenaltyAssembly(
        lambda_rho=float(lambda_rho),
        lambda_beta=float(lambda_beta),
        R=scipy.linalg.block_diag(lambda_rho * rho_block, lambda_beta * beta_block),
        num_rho=rho_block.shape[0],
    )


def assemble_penalty(
    lambda_rho: float,
    lambda_beta: float,
    basis_y: BasisSystem,
    basis_x: BasisSystem,
) -> PenaltyAssembly:
    """Block penalty R = diag(l_rho (Phi (x) D_t + D_u (x) Phi), l_beta (Psi (x) D_t + D_s (x) Phi)).

    theta' R theta equals l_rho times the integrated squared second partials
    of rho plus l_beta times those of beta.
    """
    if lambda_rho < 0 or lambda_beta < 0:
        raise ConfigError(
            f"Smoothing parameters must be non-negative, got ({lambda_rho:g}, {lambda_beta:g})"
        )
    return _penalty_from_units(lambda_rho, lambda_beta, _unit_penalties(basis_y, basis_x))


def _split_sizes(num_params: int, num_rho: int) -> Tuple[int, int]:
    num_y = int(round(np.sqrt(num_rho)))
    return num_y, (num_params - num_rho) // num_y


def pens2sls_solve(design: DesignMatrices, penalty: PenaltyAssembly) -> CoefficientSet:
    """Solve (Pi_hat' Pi + R) theta = Pi_hat' vec(Y) and split theta."""
    gram = design.pi_hat.T @ design.pi
    rhs = design.pi_hat.T @ design.y_vec
    if penalty.R.shape != gram.shape:
        raise DimensionMismatchError(
            f"Penalty is {penalty.R.shape} but the design has {design.num_params} parameters"
        )
    factor = linalg.factorize_penalized(gram, (penalty.rho_block, penalty.beta_block))
    theta = linalg.solve_factored(factor, rhs)
    return CoefficientSet.from_theta(theta, *_split_sizes(design.num_params, penalty.num_rho))


def reconstruct_surface(
    coeffs: np.ndarray,
    basis_row: BasisSystem,
    basis_col: BasisSystem,
    grid_row,
    grid_col,
) -> np.ndarray:
    """Evaluate sum_lk c[l, k] phi_l(a) chi_k(b) on the grid cross-product."""
    return eval_basis(basis_row, grid_row) @ np.asarray(coeffs) @ eval_basis(basis_col, grid_col).T


def _neumann(
    weights: np.ndarray,
    kernel: np.ndarray,
    forcing: np.ndarray,
    tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, int]:
    """Fixed-point iteration Y <- T Y + f with (T Y) = W Y K'."""
    current = forcing
    for iteration in range(1, max_iter + 1):
        updated = (weights @ current) @ kernel.T + forcing
        change = np.max(np.abs(updated - current))
        if not np.isfinite(change):
            raise NeumannConvergenceError(
                f"Neumann iteration diverged after {iteration} steps"
            )
        if change < tol:
            return updated, iteration
        current = updated
    raise NeumannConvergenceError(
        f"Neumann iteration did not reach tolerance {tol:g} in {max_iter} steps",
        details=f"last sup-norm change {change:.3e}",
    )


def neumann_fitted(
    weights: SpatialWeights,
    rho_surface: np.ndarray,
    forcing: FunctionalSample,
    tol: float = 0.001,
    max_iter: int = 1000,
) -> FunctionalSample:
    """Invert (I - T) on the forcing curves by the Neumann series.

    (T Y)_i(t) = sum_j w_ij sum_u delta_u rho(t, u) Y_j(u), left-Riemann in u.
    The iteration stops once the sup-norm change drops below tol.
    """
    rho_surface = np.asarray(rho_surface, dtype=np.float64)
    m = forcing.num_points
    if rho_surface.shape != (m, m):
        raise DimensionMismatchError(
            f"rho surface is {rho_surface.shape}, expected ({m}, {m}) on the response grid"
        )
    if weights.size != forcing.num_curves:
        raise DimensionMismatchError(
            f"Weight matrix is {weights.size}x{weights.size} but there are "
            f"{forcing.num_curves} curves"
        )
    sup = rho_sup(rho_surface)
    if not contraction_check(sup, weights):
        logger.warning(
            f"Contraction condition fails (sup|rho| = {sup:.4f}, ||W|| = {weights.inf_norm:.4f}); "
            f"iterating anyway with a cap of {max_iter} steps"
        )
    kernel = rho_surface * forcing.grid.full_weights[None, :]
    values, iterations = _neumann(weights.matrix, kernel, forcing.values, tol, max_iter)
    logger.debug(f"Neumann iteration converged in {iterations} steps")
    return forcing.with_values(values)


def _integrate_predictor(predictor: FunctionalSample, beta_surface: np.ndarray) -> np.ndarray:
    """Left-Riemann integral of X_i(s) beta(t, s) over s, as an (n x M) matrix."""
    return (predictor.values * predictor.grid.full_weights[None, :]) @ beta_surface.T


@attrs.define(eq=False)
class FitContext:
    """
    Per-dataset quantities shared by every smoothing-parameter pair.

    builds counts how often each expensive piece was assembled; a grid search
    or bootstrap must not grow them per grid point.
    """

    response: FunctionalSample
    predictor: FunctionalSample
    weights: SpatialWeights
    settings: EstimatorSettings
    basis_y: BasisSystem
    basis_x: BasisSystem
    pred_coeffs: np.ndarray
    design: DesignMatrices
    instrument_q: np.ndarray
    gram: np.ndarray
    rhs: np.ndarray
    unit_penalties: Tuple[np.ndarray, np.ndarray]
    builds: Dict[str, int] = attrs.Factory(dict)

    @property
    def num_params(self) -> int:
        return self.design.num_params


def prepare(
    response: FunctionalSample,
    predictor: FunctionalSample,
    weights: SpatialWeights,
    settings: Optional[EstimatorSettings] = None,
    reuse: Optional[FitContext] = None,
) -> FitContext:
    """Assemble everything that does not depend on the smoothing parameters.

    With reuse, the instrument side (bases, predictor projections, Z and its
    orthonormal basis, unit penalties) comes from an earlier context built on
    the same predictor and weights; only the response side is rebuilt.
    """
    settings = settings or (reuse.settings if reuse else EstimatorSettings())
    n = response.num_curves
    if predictor.num_curves != n or weights.size != n:
        raise DimensionMismatchError(
            f"Inconsistent unit counts: Y has {n}, X has {predictor.num_curves}, "
            f"W is {weights.size}x{weights.size}",
            stage="prepare",
        )

    if reuse is not None:
        basis_y, basis_x = reuse.basis_y, reuse.basis_x
        pred_coeffs = reuse.pred_coeffs
        z, q, rank = reuse.design.z, reuse.instrument_q, reuse.design.instrument_rank
        weak = reuse.design.weak_instruments
        units = reuse.unit_penalties
        builds = dict(reuse.builds)
    else:
        with _stage("basis"):
            basis_y = make_basis(settings.num_y, settings.degree)
            basis_x = make_basis(settings.num_x, settings.degree)
        with _stage("project"):
            pred_coeffs = project_curves(predictor, basis_x)
        with _stage("instruments"):
            z = build_instruments(
                pred_coeffs, weights, settings.lags, basis_y, response.grid.points
            )
        with _stage("first_stage"):
            q, rank = instrument_basis(z, allow_pinv=settings.allow_pinv)
        weak = rank < z.shape[1]
        units = _unit_penalties(basis_y, basis_x)
        builds = {"instruments": 1}

    with _stage("project"):
        resp_coeffs = project_curves(spatial_lag(weights, response, 1), basis_y)
    with _stage("design"):
        pi = build_design(resp_coeffs, pred_coeffs, basis_y, response.grid.points)
    with _stage("first_stage"):
        pi_hat = project_onto(q, pi)

    y_vec = response.values.reshape(-1)
    design = DesignMatrices(
        pi=pi,
        z=z,
        y_vec=y_vec,
        pi_hat=pi_hat,
        instrument_rank=rank,
        weak_instruments=weak,
    )
    builds["design"] = builds.get("design", 0) + 1
    builds["first_stage"] = builds.get("first_stage", 0) + 1
    return FitContext(
        response=response,
        predictor=predictor,
        weights=weights,
        settings=settings,
        basis_y=basis_y,
        basis_x=basis_x,
        pred_coeffs=pred_coeffs,
        design=design,
        instrument_q=q,
        gram=linalg.symmetrize(pi_hat.T @ pi),
        rhs=pi_hat.T @ y_vec,
        unit_penalties=units,
        builds=builds,
    )


def fit_prepared(
    context: FitContext, lambdas: Tuple[float, float], score: bool = True
) -> FitResult:
    """Second stage, surfaces and Neumann fitted values at one (lambda_rho, lambda_beta).

    With score=False the selection quantities (edf, log-likelihood, BIC) are
    left as NaN; bootstrap refits only need the surfaces.
    """
    settings = context.settings
    t_points = context.response.grid.points
    s_points = context.predictor.grid.points

    with _stage("solve"):
        penalty = _penalty_from_units(*lambdas, context.unit_penalties)
        factor = linalg.factorize_penalized(
            context.gram, (penalty.rho_block, penalty.beta_block)
        )
        theta = linalg.solve_factored(factor, context.rhs)
        coeffs = CoefficientSet.from_theta(theta, settings.num_y, settings.num_x)

    with _stage("reconstruct"):
        beta_surface = reconstruct_surface(
            coeffs.beta_coeffs, context.basis_y, context.basis_x, t_points, s_points
        )
        rho_surface = reconstruct_surface(
            coeffs.rho_coeffs, context.basis_y, context.basis_y, t_points, t_points
        )
        fine = np.linspace(0.0, 1.0, SUP_GRID_SIZE)
        sup = rho_sup(
            reconstruct_surface(coeffs.rho_coeffs, context.basis_y, context.basis_y, fine, fine)
        )
        contraction_ok = contraction_check(sup, context.weights)

    with _stage("neumann"):
        forcing = context.response.with_values(
            _integrate_predictor(context.predictor, beta_surface)
        )
        kernel = rho_surface * context.response.grid.full_weights[None, :]
        fitted_values, iterations = _neumann(
            context.weights.matrix,
            kernel,
            forcing.values,
            settings.neumann_tol,
            settings.max_iter,
        )

    residuals = context.response.values - fitted_values
    result = FitResult(
        theta=coeffs,
        lambdas=(float(lambdas[0]), float(lambdas[1])),
        fitted=context.response.with_values(fitted_values),
        residuals=context.response.with_values(residuals),
        sigma2_hat=float(np.mean(residuals**2)),
        bic=float("nan"),
        edf=float("nan"),
        loglik=float("nan"),
        basis_y=context.basis_y,
        basis_x=context.basis_x,
        beta_surface=beta_surface,
        rho_surface=rho_surface,
        s_points=s_points,
        rho_sup=sup,
        contraction_ok=contraction_ok,
        neumann_iterations=iterations,
        settings=settings,
    )
    if score:
        with _stage("selection"):
            result.edf = effective_df_from(factor, context.gram)
            result.loglik = quasi_loglik(result)
            result.bic = bic(result)
    return result


def fit(
    response: FunctionalSample,
    predictor: FunctionalSample,
    weights: SpatialWeights,
    settings: Optional[EstimatorSettings] = None,
    lambdas: Optional[Tuple[float, float]] = None,
    grid: Optional[LambdaGrid] = None,
    jobs: int = 1,
) -> FitResult:
    """Fit the model end to end.

    A fixed lambdas pair is fitted directly; otherwise the pair is chosen by
    BIC over grid (default 7x7 log grid).
    """
    settings = settings or EstimatorSettings()
    context = prepare(response, predictor, weights, settings)
    if lambdas is not None:
        result = fit_prepared(context, lambdas)
    else:
        _, _, result = search_context(context, grid or LambdaGrid.default(), jobs=jobs)
    if not result.contraction_ok:
        logger.warning(
            f"Estimated rho has sup {result.rho_sup:.4f}; the contraction condition fails"
        )
    return result


def predict(
    fit_result: FitResult,
    predictor: FunctionalSample,
    weights: SpatialWeights,
) -> FunctionalSample:
    """Predict responses for new units from their predictors and own weight matrix."""
    if predictor.num_points != fit_result.s_points.size:
        raise DimensionMismatchError(
            f"New predictor curves have {predictor.num_points} points, the fit used "
            f"{fit_result.s_points.size}"
        )
    t_grid = fit_result.fitted.grid
    forcing_values = _integrate_predictor(predictor, fit_result.beta_surface)
    with _stage("neumann"):
        return neumann_fitted(
            weights,
            fit_result.rho_surface,
            FunctionalSample(values=forcing_values, grid=t_grid),
            tol=fit_result.settings.neumann_tol,
            max_iter=fit_result.settings.max_iter,
        )
