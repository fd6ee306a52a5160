"""Tests for B-spline bases, Gram and roughness matrices, and quadrature grids."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from conftest import greville
from sfofr.basis import (
    eval_basis,
    gram_matrix,
    make_basis,
    penalty_matrix,
    quad_weights,
    uniform_grid,
)
from sfofr.errors import (
    InvalidDimensionError,
    InvalidOrderError,
    NonMonotoneGridError,
    OutOfDomainError,
)


class TestMakeBasis:
    """Test basis construction."""

    def test_minimal_cubic_basis_has_no_interior_knots(self):
        """Four cubic functions form the Bernstein basis."""
        basis = make_basis(4, 3)
        assert basis.interior_knots.size == 0
        assert basis.knots.size == 8

    def test_interior_knots_are_equally_spaced(self):
        """Ten cubic functions need six equally spaced interior knots."""
        basis = make_basis(10, 3)
        assert basis.interior_knots.size == 6
        np.testing.assert_allclose(np.diff(basis.breakpoints), 1.0 / 7.0, atol=1e-15)

    def test_too_few_functions(self):
        """num_funcs below degree + 1 is rejected."""
        with pytest.raises(InvalidDimensionError):
            make_basis(3, 3)

    def test_str(self):
        """Human-readable summary names size and degree."""
        assert "10 functions, degree 3" in str(make_basis(10, 3))


class TestEvalBasis:
    """Test basis evaluation."""

    def test_partition_of_unity(self, cubic10, rng):
        """Rows are non-negative and sum to one."""
        values = eval_basis(cubic10, rng.uniform(0, 1, 1000))
        np.testing.assert_allclose(values.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(values >= -1e-15)

    def test_endpoints_interpolate(self, cubic10):
        """Only the first function is nonzero at 0, only the last at 1."""
        values = eval_basis(cubic10, [0.0, 1.0])
        expected = np.zeros((2, 10))
        expected[0, 0] = expected[1, -1] = 1.0
        np.testing.assert_allclose(values, expected, atol=1e-14)

    def test_local_support(self, cubic10):
        """A cubic row has at most four nonzero entries."""
        row = eval_basis(cubic10, [0.5])[0]
        assert np.count_nonzero(np.abs(row) > 1e-15) <= 4

    def test_out_of_domain(self, cubic10):
        """Points outside [0, 1] are rejected."""
        with pytest.raises(OutOfDomainError):
            eval_basis(cubic10, [0.5, 1.01])

    def test_derivative_order_above_degree(self, cubic10):
        """A fourth derivative of a cubic basis is not available."""
        with pytest.raises(InvalidOrderError):
            eval_basis(cubic10, [0.5], deriv=4)


class TestGramMatrix:
    """Test the Gram matrix."""

    def test_entries_sum_to_one(self, cubic10):
        """(sum phi_j)(sum phi_k) = 1 integrates to 1."""
        assert gram_matrix(cubic10).sum() == pytest.approx(1.0, abs=1e-10)

    def test_symmetric_psd(self, cubic10):
        """Gram is symmetric with non-negative spectrum."""
        gram = gram_matrix(cubic10)
        np.testing.assert_array_equal(gram, gram.T)
        assert np.linalg.eigvalsh(gram).min() >= -1e-10

    def test_matches_fine_trapezoid(self, cubic10):
        """Agrees with a 10,000-point trapezoid rule."""
        points = np.linspace(0, 1, 10_000)
        values = eval_basis(cubic10, points)
        oracle = trapezoid(values[:, :, None] * values[:, None, :], points, axis=0)
        np.testing.assert_allclose(gram_matrix(cubic10), oracle, atol=1e-6)

    def test_exact_per_span(self, cubic10):
        """Doubling the Gauss nodes does not move the entries."""
        np.testing.assert_allclose(
            gram_matrix(cubic10), gram_matrix(cubic10, nodes_per_span=8), atol=1e-12
        )


class TestPenaltyMatrix:
    """Test the second-derivative penalty."""

    def test_annihilates_affine_functions(self, cubic10):
        """Constants and t have zero roughness."""
        penalty = penalty_matrix(cubic10)
        for coeffs in (np.ones(10), greville(cubic10), 2.0 - 3.0 * greville(cubic10)):
            assert coeffs @ penalty @ coeffs == pytest.approx(0.0, abs=1e-10)

    def test_symmetric_psd(self, cubic10):
        """Penalty is symmetric with non-negative spectrum."""
        penalty = penalty_matrix(cubic10)
        np.testing.assert_allclose(penalty, penalty.T, atol=1e-12)
        assert np.linalg.eigvalsh(penalty).min() >= -1e-10

    def test_matches_finite_differences(self, cubic10):
        """Agrees with second differences integrated by trapezoid on 10,000 points."""
        points = np.linspace(0, 1, 10_000)
        step = points[1] - points[0]
        values = eval_basis(cubic10, points)
        second = np.empty_like(values)
        second[1:-1] = (values[2:] - 2 * values[1:-1] + values[:-2]) / step**2
        second[0] = (2 * values[0] - 5 * values[1] + 4 * values[2] - values[3]) / step**2
        second[-1] = (
            2 * values[-1] - 5 * values[-2] + 4 * values[-3] - values[-4]
        ) / step**2
        oracle = trapezoid(second[:, :, None] * second[:, None, :], points, axis=0)
        exact = penalty_matrix(cubic10)
        assert np.linalg.norm(exact - oracle) / np.linalg.norm(exact) < 1e-4

    def test_exact_per_span(self, cubic10):
        """Doubling the Gauss nodes does not move the entries."""
        base = penalty_matrix(cubic10)
        np.testing.assert_allclose(
            base, penalty_matrix(cubic10, nodes_per_span=8), atol=1e-12 * np.abs(base).max()
        )

    def test_order_above_degree(self):
        """A third-derivative penalty needs at least a cubic basis."""
        with pytest.raises(InvalidOrderError):
            penalty_matrix(make_basis(5, 2), deriv_order=3)


class TestQuadWeights:
    """Test the left-Riemann quadrature grid."""

    def test_uniform_101_grid(self):
        """101 points give 100 weights of 0.01 summing to one."""
        grid = uniform_grid(101)
        np.testing.assert_allclose(grid.weights, 0.01, atol=1e-15)
        assert grid.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_constant_integrand(self):
        """The left-Riemann integral of 1 is the interval length."""
        grid = uniform_grid(101)
        assert grid.integrate(np.ones(101)) == pytest.approx(1.0, abs=1e-12)

    def test_non_monotone(self):
        """Repeated or decreasing points are rejected."""
        with pytest.raises(NonMonotoneGridError):
            quad_weights([0.0, 0.5, 0.5, 1.0])

    def test_outside_unit_interval(self):
        """Grids must live in [0, 1]."""
        with pytest.raises(OutOfDomainError):
            quad_weights([0.0, 2.0])

    def test_full_weights_pad_last_point(self, grid21):
        """The last point carries no weight."""
        assert grid21.full_weights[-1] == 0.0
        assert grid21.full_weights.size == 21
