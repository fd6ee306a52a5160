"""Spatial weight matrices, spatial lags, functional Moran's I and the contraction check."""

import logging

import numpy as np
from scipy.spatial.distance import cdist

from .basis import eval_basis
from .errors import (
    DimensionMismatchError,
    DuplicateCoordinateError,
    InvalidDimensionError,
    ZeroDenominatorError,
)
from .schemas import BasisSystem, FunctionalSample, SpatialWeights, StationCoords

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0


def row_normalize(weights: SpatialWeights) -> SpatialWeights:
    """Scale each nonzero row to sum to one; all-zero rows stay zero."""
    matrix = weights.matrix
    sums = matrix.sum(axis=1)
    zero_rows = tuple(int(i) for i in np.flatnonzero(sums == 0))
    if zero_rows:
        logger.warning(f"Weight matrix has {len(zero_rows)} isolated unit(s): {list(zero_rows)}")
    scale = np.where(sums == 0, 1.0, sums)
    return SpatialWeights(
        matrix=matrix / scale[:, None], normalized=True, zero_rows=zero_rows
    )


def inverse_distance_weights(n: int) -> SpatialWeights:
    """Row-normalized 1 / (1 + |i - j|) weights on a line of n units."""
    if n < 2:
        raise InvalidDimensionError(f"Need at least two units, got {n}")
    index = np.arange(n)
    raw = 1.0 / (1.0 + np.abs(index[:, None] - index[None, :]))
    np.fill_diagonal(raw, 0.0)
    return row_normalize(SpatialWeights(matrix=raw))


def great_circle_distances(coords: StationCoords) -> np.ndarray:
    """Pairwise haversine distances in kilometres."""
    lat = np.radians(coords.latitude)
    # Differences are taken in degrees first so equal spacings stay exactly equal.
    dlat = np.radians(coords.latitude[None, :] - coords.latitude[:, None])
    dlon = np.radians(coords.longitude[None, :] - coords.longitude[:, None])
    a = (
        np.sin(dlat / 2.0) ** 2
        + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def euclidean_distances(coords: StationCoords) -> np.ndarray:
    """Pairwise planar distances treating (lon, lat) as Cartesian coordinates."""
    points = np.column_stack([coords.longitude, coords.latitude])
    return cdist(points, points)


def knn_bisquare_weights(
    coords: StationCoords, h: int = 4, distance: str = "haversine"
) -> SpatialWeights:
    """Adaptive-bandwidth bi-square weights over each unit's h nearest neighbours.

    Neighbour ties are broken by the lower station index. The bandwidth of
    unit i is its distance to the farthest of those neighbours, which
    therefore receives weight zero. A unit whose neighbours all sit exactly at
    the bandwidth gets uniform weights 1/h.

    Raises:
        InvalidDimensionError: If there are not more than h stations
        DuplicateCoordinateError: If a bandwidth is zero
    """
    n = coords.size
    if h < 1 or n < h + 1:
        raise InvalidDimensionError(
            f"Need at least h + 1 = {h + 1} stations for h = {h}, got {n}"
        )
    dist = euclidean_distances(coords) if distance == "euclidean" else great_circle_distances(coords)

    matrix = np.zeros((n, n))
    fallback = []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        neighbours = others[np.argsort(dist[i, others], kind="stable")[:h]]
        bandwidth = dist[i, neighbours].max()
        if bandwidth == 0.0:
            label = coords.stations[i] if coords.stations else str(i)
            raise DuplicateCoordinateError(
                f"Station {label} has zero bandwidth",
                details=f"its {h} nearest neighbours share its coordinates",
            )
        raw = (1.0 - (dist[i, neighbours] / bandwidth) ** 2) ** 2
        total = raw.sum()
        if total == 0.0:
            fallback.append(i)
            matrix[i, neighbours] = 1.0 / h
        else:
            matrix[i, neighbours] = raw / total

    if fallback:
        logger.warning(f"Uniform neighbour weights used for units {fallback}")
    return SpatialWeights(matrix=matrix, normalized=True)


def spatial_lag(
    weights: SpatialWeights, curves: FunctionalSample, q: int = 1
) -> FunctionalSample:
    """Apply W^q to the curve matrix pointwise on its grid."""
    if weights.size != curves.num_curves:
        raise DimensionMismatchError(
            f"Weight matrix is {weights.size}x{weights.size} but there are "
            f"{curves.num_curves} curves"
        )
    if q < 1:
        raise InvalidDimensionError(f"Lag order must be at least 1, got {q}")
    lagged = curves.values
    for _ in range(q):
        lagged = weights.matrix @ lagged
    return curves.with_values(lagged)


def moran_curve(
    curves: FunctionalSample,
    basis: BasisSystem,
    weights: SpatialWeights,
    eval_points,
) -> np.ndarray:
    """Functional Moran's I at each evaluation point.

    Curves are smoothed by least squares onto basis (coefficients V, n x K);
    I(t) = phi(t)' V' W V phi(t) / phi(t)' V' V phi(t).
    """
    if weights.size != curves.num_curves:
        raise DimensionMismatchError(
            f"Weight matrix is {weights.size}x{weights.size} but there are "
            f"{curves.num_curves} curves"
        )
    design = eval_basis(basis, curves.grid.points)
    coef, *_ = np.linalg.lstsq(design, curves.values.T, rcond=None)
    smoothed = eval_basis(basis, eval_points) @ coef
    numerator = np.einsum("ti,ij,tj->t", smoothed, weights.matrix, smoothed)
    denominator = np.einsum("ti,ti->t", smoothed, smoothed)
    if np.any(denominator == 0.0):
        where = np.atleast_1d(eval_points)[np.flatnonzero(denominator == 0.0)[0]]
        raise ZeroDenominatorError(
            "Moran's I is undefined where every smoothed curve vanishes",
            details=f"t = {where:g}",
        )
    return numerator / denominator


def rho_sup(surface: np.ndarray) -> float:
    """Sup-norm of a surface sampled on a grid."""
    return float(np.max(np.abs(surface)))


def contraction_check(rho_sup_value: float, weights: SpatialWeights) -> bool:
    """True when sup|rho| * ||W||_inf < 1, so the Neumann series converges."""
    return bool(rho_sup_value * weights.inf_norm < 1.0)
