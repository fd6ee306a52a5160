"""Quadrature projections, the stacked design matrix, instruments and the first stage."""

import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from .basis import eval_basis
from .errors import DimensionMismatchError, InvalidDimensionError, SingularInstrumentError
from .schemas import BasisSystem, FunctionalSample, SpatialWeights

logger = logging.getLogger(__name__)

WEAK_INSTRUMENT_CONDITION = 1e12


def project_curves(sample: FunctionalSample, basis: BasisSystem) -> np.ndarray:
    """Left-Riemann inner products of every curve with every basis function.

    Entry (i, k) = sum_r delta_r * phi_k(s_r) * X_i(s_r), r over all but the last point.
    """
    values = eval_basis(basis, sample.grid.points)
    if values.shape[0] != sample.num_points:
        raise DimensionMismatchError("Basis evaluation does not match the sample grid")
    return sample.values @ (values * sample.grid.full_weights[:, None])


def _kron_rows(coeffs: np.ndarray, phistar: np.ndarray) -> np.ndarray:
    """Stack coeffs[i]' (x) phistar for every unit i into (n*M) rows."""
    n, k = coeffs.shape
    m, k_y = phistar.shape
    return np.einsum("ik,tl->itkl", coeffs, phistar).reshape(n * m, k * k_y)


def build_design(
    resp_lag_coeffs: np.ndarray,
    pred_coeffs: np.ndarray,
    basis_y: BasisSystem,
    t_grid,
) -> np.ndarray:
    """Assemble Pi = [lagged-response block | predictor block].

    Column m*K_y + l of the first block multiplies rho[l, m]; rows are
    unit-major so that Pi @ theta reproduces the discretized model at every
    (unit, t) pair.
    """
    resp_lag_coeffs = np.asarray(resp_lag_coeffs, dtype=np.float64)
    pred_coeffs = np.asarray(pred_coeffs, dtype=np.float64)
    if resp_lag_coeffs.shape[0] != pred_coeffs.shape[0]:
        raise DimensionMismatchError(
            f"Response lag has {resp_lag_coeffs.shape[0]} units, predictor has "
            f"{pred_coeffs.shape[0]}"
        )
    if resp_lag_coeffs.shape[1] != basis_y.num_funcs:
        raise DimensionMismatchError(
            f"Response coefficients have {resp_lag_coeffs.shape[1]} columns, "
            f"basis has {basis_y.num_funcs} functions"
        )
    phistar = eval_basis(basis_y, t_grid)
    return np.hstack(
        [_kron_rows(resp_lag_coeffs, phistar), _kron_rows(pred_coeffs, phistar)]
    )


def build_instruments(
    pred_coeffs: np.ndarray,
    weights: SpatialWeights,
    lags: int,
    basis_y: BasisSystem,
    t_grid,
) -> np.ndarray:
    """Instrument matrix Z = [Z_0 | Z_1 | ... | Z_Q] from lagged predictor coefficients.

    Lagging coefficients equals projecting lagged curves because the
    quadrature projection is linear.
    """
    if lags < 1:
        raise InvalidDimensionError(f"Instrument order must be at least 1, got {lags}")
    pred_coeffs = np.asarray(pred_coeffs, dtype=np.float64)
    if weights.size != pred_coeffs.shape[0]:
        raise DimensionMismatchError(
            f"Weight matrix is {weights.size}x{weights.size} but there are "
            f"{pred_coeffs.shape[0]} units"
        )
    phistar = eval_basis(basis_y, t_grid)
    blocks = [_kron_rows(pred_coeffs, phistar)]
    lagged = pred_coeffs
    for _ in range(lags):
        lagged = weights.matrix @ lagged
        blocks.append(_kron_rows(lagged, phistar))
    z = np.hstack(blocks)

    condition = instrument_condition(z)
    if condition > WEAK_INSTRUMENT_CONDITION:
        logger.warning(
            f"Instrument cross-product is ill-conditioned (cond {condition:.3e}); "
            "the first stage will fall back to its numerical rank"
        )
    return z


def instrument_condition(z: np.ndarray) -> float:
    """Condition number of Z'Z."""
    eig = np.linalg.eigvalsh(z.T @ z)
    if eig[-1] <= 0.0:
        return float("inf")
    return float(eig[-1] / eig[0]) if eig[0] > 0.0 else float("inf")


def instrument_basis(z: np.ndarray, allow_pinv: bool = True) -> Tuple[np.ndarray, int]:
    """Orthonormal basis of the instrument column space and its rank.

    Uses a column-pivoted QR. On rank deficiency the leading `rank` columns
    span the same space the pseudo-inverse projector would use.

    Raises:
        SingularInstrumentError: If Z is rank deficient and allow_pinv is False,
            or if Z has no usable column at all
    """
    q, r, _ = scipy.linalg.qr(z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        raise SingularInstrumentError("Instrument matrix is identically zero")
    tol = max(z.shape) * np.finfo(np.float64).eps * diag[0]
    rank = int(np.count_nonzero(diag > tol))
    if rank < z.shape[1]:
        if not allow_pinv:
            raise SingularInstrumentError(
                f"Instrument matrix has rank {rank} < {z.shape[1]} columns",
                details="enable allow_pinv or lower the instrument order",
            )
        logger.warning(
            f"Instrument matrix has rank {rank} of {z.shape[1]}; projecting on its column space"
        )
        q = q[:, :rank]
    return q, rank


def project_onto(q: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Q Q' Pi, without forming the (nM x nM) projector."""
    return q @ (q.T @ pi)


def first_stage(pi: np.ndarray, z: np.ndarray, allow_pinv: bool = True) -> np.ndarray:
    """Purged design Pi_hat = Z (Z'Z)^+ Z' Pi."""
    pi = np.asarray(pi, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if pi.shape[0] != z.shape[0]:
        raise DimensionMismatchError(
            f"Pi has {pi.shape[0]} rows but Z has {z.shape[0]}"
        )
    q, _ = instrument_basis(z, allow_pinv=allow_pinv)
    return project_onto(q, pi)
