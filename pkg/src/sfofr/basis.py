"""Clamped B-spline bases, their Gram and roughness matrices, and quadrature grids."""

from typing import Optional

import numpy as np
from scipy.interpolate import BSpline

from .errors import (
    InvalidDimensionError,
    InvalidOrderError,
    NonMonotoneGridError,
    OutOfDomainError,
)
from .schemas import BasisSystem, QuadratureGrid


def make_basis(num_funcs: int, degree: int = 3) -> BasisSystem:
    """Build a clamped basis on [0, 1] with equally spaced interior knots.

    Args:
        num_funcs: Number of basis functions (K)
        degree: Polynomial degree (3 for cubic splines)

    Raises:
        InvalidDimensionError: If num_funcs < degree + 1 or degree < 1
    """
    if degree < 1 or num_funcs < degree + 1:
        raise InvalidDimensionError(
            f"Cannot build {num_funcs} basis functions of degree {degree}",
            details="num_funcs must be at least degree + 1",
        )
    interior = np.linspace(0.0, 1.0, num_funcs - degree + 1)[1:-1]
    knots = np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )
    return BasisSystem(degree=degree, num_funcs=num_funcs, knots=knots)


def eval_basis(basis: BasisSystem, points, deriv: int = 0) -> np.ndarray:
    """Evaluate every basis function (or its derivative) at points.

    Returns a (len(points), K) matrix whose (i, k) entry is phi_k(points[i]).
    """
    points = np.atleast_1d(np.asarray(points, dtype=np.float64))
    lo, hi = basis.domain
    if np.any((points < lo) | (points > hi)) or not np.all(np.isfinite(points)):
        raise OutOfDomainError(
            f"Evaluation points must lie in [{lo:g}, {hi:g}]",
            details=f"range seen [{np.nanmin(points):g}, {np.nanmax(points):g}]",
        )
    if deriv > basis.degree:
        raise InvalidOrderError(
            f"Derivative order {deriv} exceeds basis degree {basis.degree}"
        )
    # Identity coefficients turn the spline into its full basis matrix.
    spline = BSpline(basis.knots, np.eye(basis.num_funcs), basis.degree)
    return spline(points, nu=deriv)


def _span_nodes(basis: BasisSystem, nodes_per_span: Optional[int]):
    """Gauss-Legendre nodes and weights on every knot span."""
    count = nodes_per_span or basis.degree + 1
    ref_nodes, ref_weights = np.polynomial.legendre.leggauss(count)
    edges = basis.breakpoints
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    nodes = (0.5 * (left + right))[:, None] + half[:, None] * ref_nodes[None, :]
    weights = half[:, None] * ref_weights[None, :]
    return nodes.ravel(), weights.ravel()


def _integrated_products(
    basis: BasisSystem, deriv: int, nodes_per_span: Optional[int]
) -> np.ndarray:
    nodes, weights = _span_nodes(basis, nodes_per_span)
    values = eval_basis(basis, nodes, deriv=deriv)
    product = values.T @ (weights[:, None] * values)
    return 0.5 * (product + product.T)


def gram_matrix(basis: BasisSystem, nodes_per_span: Optional[int] = None) -> np.ndarray:
    """Integral of phi_j * phi_k over the domain, exact per knot span."""
    return _integrated_products(basis, 0, nodes_per_span)


def penalty_matrix(
    basis: BasisSystem, deriv_order: int = 2, nodes_per_span: Optional[int] = None
) -> np.ndarray:
    """Integral of the products of deriv_order-th derivatives.

    With deriv_order = 2 the null space holds the coefficients of affine
    functions.
    """
    if deriv_order > basis.degree:
        raise InvalidOrderError(
            f"Penalty order {deriv_order} exceeds basis degree {basis.degree}"
        )
    return _integrated_products(basis, deriv_order, nodes_per_span)


def quad_weights(points) -> QuadratureGrid:
    """Left-Riemann weights for an observation grid on [0, 1]."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 1 or points.size < 2:
        raise NonMonotoneGridError("A quadrature grid needs at least two points")
    if np.any(np.diff(points) <= 0):
        raise NonMonotoneGridError(
            "Grid points must be strictly increasing",
            details=f"first offending index {int(np.argmax(np.diff(points) <= 0)) + 1}",
        )
    if points[0] < 0.0 or points[-1] > 1.0:
        raise OutOfDomainError(
            f"Grid must lie in [0, 1], got [{points[0]:g}, {points[-1]:g}]"
        )
    return QuadratureGrid(points=points, weights=np.diff(points))


def uniform_grid(size: int) -> QuadratureGrid:
    """size equally spaced points on [0, 1]."""
    return quad_weights(np.linspace(0.0, 1.0, size))
