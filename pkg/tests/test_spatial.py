"""Tests for spatial weights, lags, Moran's I and the contraction check."""

import logging

import numpy as np
import pytest

from sfofr.basis import make_basis, uniform_grid
from sfofr.errors import (
    DimensionMismatchError,
    DuplicateCoordinateError,
    InvariantViolationError,
    ZeroDenominatorError,
)
from sfofr.schemas import FunctionalSample, SpatialWeights, StationCoords
from sfofr.spatial import (
    contraction_check,
    great_circle_distances,
    inverse_distance_weights,
    knn_bisquare_weights,
    moran_curve,
    rho_sup,
    row_normalize,
    spatial_lag,
)


def random_weights(rng, n):
    raw = rng.uniform(0, 1, (n, n))
    np.fill_diagonal(raw, 0.0)
    return row_normalize(SpatialWeights(matrix=raw))


class TestSpatialWeightsSchema:
    """Test weight matrix invariants."""

    def test_nonzero_diagonal_rejected(self):
        """w_ii must be exactly zero."""
        with pytest.raises(InvariantViolationError, match="zero diagonal"):
            SpatialWeights(matrix=[[0.1, 0.9], [1.0, 0.0]])

    def test_negative_entries_rejected(self):
        """Weights cannot be negative."""
        with pytest.raises(InvariantViolationError):
            SpatialWeights(matrix=[[0.0, -1.0], [1.0, 0.0]])

    def test_normalized_rows_checked(self):
        """A normalized matrix must have unit row sums."""
        with pytest.raises(InvariantViolationError):
            SpatialWeights(matrix=[[0.0, 0.5], [1.0, 0.0]], normalized=True)


class TestInverseDistanceWeights:
    """Test the simulation weight matrix."""

    def test_three_units(self):
        """Row one (0, 1/2, 1/3) normalizes to (0, 0.6, 0.4)."""
        weights = inverse_distance_weights(3)
        np.testing.assert_allclose(weights.matrix[0], [0.0, 0.6, 0.4], atol=1e-15)

    @pytest.mark.parametrize("n", [2, 5, 40])
    def test_invariants(self, n):
        """Zero diagonal and unit row sums for any size."""
        weights = inverse_distance_weights(n)
        assert np.all(np.diag(weights.matrix) == 0.0)
        np.testing.assert_allclose(weights.matrix.sum(axis=1), 1.0, atol=1e-12)
        assert weights.normalized

    def test_two_units(self):
        """Each of two units has the other as sole neighbour."""
        np.testing.assert_array_equal(
            inverse_distance_weights(2).matrix, [[0.0, 1.0], [1.0, 0.0]]
        )


class TestRowNormalize:
    """Test row normalization."""

    def test_idempotent(self, rng):
        """Normalizing twice changes nothing."""
        once = random_weights(rng, 6)
        np.testing.assert_allclose(row_normalize(once).matrix, once.matrix, atol=1e-15)

    def test_simple_row(self):
        """(0, 2, 2) becomes (0, 0.5, 0.5)."""
        weights = row_normalize(
            SpatialWeights(matrix=[[0, 2, 2], [1, 0, 0], [1, 1, 0]])
        )
        np.testing.assert_allclose(weights.matrix[0], [0.0, 0.5, 0.5])

    def test_zero_row_kept_and_flagged(self, caplog):
        """An isolated unit keeps a zero row and is reported."""
        with caplog.at_level(logging.WARNING, logger="sfofr.spatial"):
            weights = row_normalize(
                SpatialWeights(matrix=[[0, 1, 0], [0, 0, 0], [1, 1, 0]])
            )
        np.testing.assert_array_equal(weights.matrix[1], [0.0, 0.0, 0.0])
        assert weights.zero_rows == (1,)
        assert "isolated" in caplog.text


class TestKnnBisquare:
    """Test adaptive-bandwidth bi-square weights."""

    @pytest.fixture
    def stations(self, rng):
        return StationCoords(
            longitude=rng.uniform(-100, -96, 12), latitude=rng.uniform(46, 49, 12)
        )

    def test_farthest_neighbour_gets_zero(self, stations):
        """Each row has h - 1 positive weights, the bandwidth neighbour gets 0."""
        weights = knn_bisquare_weights(stations, h=4)
        np.testing.assert_array_equal(np.count_nonzero(weights.matrix, axis=1), 3)
        np.testing.assert_allclose(weights.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_meridian_fallback(self):
        """Equidistant neighbours all at the bandwidth get uniform weights."""
        coords = StationCoords(longitude=np.zeros(5), latitude=[0.0, 1.0, 2.0, 3.0, 4.0])
        weights = knn_bisquare_weights(coords, h=2)
        np.testing.assert_allclose(weights.matrix[2], [0.0, 0.5, 0.0, 0.5, 0.0])

    def test_duplicate_coordinates(self):
        """Coincident stations leave a zero bandwidth."""
        coords = StationCoords(longitude=[1.0, 1.0, 1.0, 5.0], latitude=[2.0, 2.0, 2.0, 3.0])
        with pytest.raises(DuplicateCoordinateError):
            knn_bisquare_weights(coords, h=2)

    def test_permutation_equivariance(self, stations, rng):
        """Reordering stations reorders rows and columns alike."""
        order = rng.permutation(stations.size)
        base = knn_bisquare_weights(stations, h=4).matrix
        permuted = knn_bisquare_weights(stations.permuted(order), h=4).matrix
        np.testing.assert_allclose(permuted, base[np.ix_(order, order)], atol=1e-12)

    def test_haversine_one_degree(self):
        """One degree of latitude is about 111.19 km."""
        coords = StationCoords(longitude=[0.0, 0.0], latitude=[0.0, 1.0])
        assert great_circle_distances(coords)[0, 1] == pytest.approx(
            6371.0 * np.pi / 180.0, rel=1e-12
        )

    def test_euclidean_option(self):
        """Planar distances are used when requested."""
        coords = StationCoords(longitude=[0.0, 3.0, 0.0, 10.0], latitude=[0.0, 0.0, 4.0, 10.0])
        weights = knn_bisquare_weights(coords, h=2, distance="euclidean")
        # Unit 0: neighbours at 3 and 4, bandwidth 4.
        assert weights.matrix[0, 1] == pytest.approx(1.0)
        assert weights.matrix[0, 2] == 0.0


class TestSpatialLag:
    """Test W^q applied to curves."""

    def test_zero_weights(self, grid21, rng):
        """W = 0 lags everything to zero."""
        curves = FunctionalSample(values=rng.normal(size=(4, 21)), grid=grid21)
        lagged = spatial_lag(SpatialWeights(matrix=np.zeros((4, 4))), curves)
        np.testing.assert_array_equal(lagged.values, 0.0)

    def test_identical_curves(self, grid21, rng):
        """Averages of one curve return that curve."""
        curve = rng.normal(size=21)
        curves = FunctionalSample(values=np.tile(curve, (5, 1)), grid=grid21)
        lagged = spatial_lag(random_weights(rng, 5), curves)
        np.testing.assert_allclose(lagged.values, curves.values, atol=1e-12)

    def test_second_order_composes(self, grid21, rng):
        """Lag 2 equals lag 1 applied twice."""
        weights = random_weights(rng, 5)
        curves = FunctionalSample(values=rng.normal(size=(5, 21)), grid=grid21)
        twice = spatial_lag(weights, spatial_lag(weights, curves))
        np.testing.assert_allclose(
            spatial_lag(weights, curves, q=2).values, twice.values, atol=1e-12
        )

    def test_dimension_mismatch(self, grid21, rng):
        """W and curves must agree on the number of units."""
        curves = FunctionalSample(values=rng.normal(size=(4, 21)), grid=grid21)
        with pytest.raises(DimensionMismatchError):
            spatial_lag(inverse_distance_weights(5), curves)


class TestMoranCurve:
    """Test the functional Moran's I."""

    def test_identical_curves_give_one(self, rng):
        """Equal rows of V make I(t) = 1."""
        grid = uniform_grid(51)
        curve = 2.0 + np.sin(2 * np.pi * grid.points)
        curves = FunctionalSample(values=np.tile(curve, (6, 1)), grid=grid)
        values = moran_curve(curves, make_basis(13, 3), random_weights(rng, 6), grid.points)
        np.testing.assert_allclose(values, 1.0, atol=1e-10)

    def test_zero_weights_give_zero(self, rng):
        """W = 0 makes the numerator vanish."""
        grid = uniform_grid(51)
        curves = FunctionalSample(values=rng.normal(size=(6, 51)), grid=grid)
        values = moran_curve(
            curves, make_basis(13, 3), SpatialWeights(matrix=np.zeros((6, 6))), grid.points
        )
        np.testing.assert_array_equal(values, 0.0)

    def test_scale_invariance(self, rng):
        """Scaling every curve leaves I(t) unchanged."""
        grid = uniform_grid(51)
        weights = random_weights(rng, 8)
        curves = FunctionalSample(values=rng.normal(size=(8, 51)), grid=grid)
        basis = make_basis(13, 3)
        base = moran_curve(curves, basis, weights, grid.points)
        scaled = moran_curve(curves.with_values(-3.5 * curves.values), basis, weights, grid.points)
        np.testing.assert_allclose(scaled, base, rtol=1e-9)

    def test_vanishing_curves(self, rng):
        """All-zero curves leave I undefined."""
        grid = uniform_grid(21)
        curves = FunctionalSample(values=np.zeros((4, 21)), grid=grid)
        with pytest.raises(ZeroDenominatorError):
            moran_curve(curves, make_basis(6, 3), random_weights(rng, 4), grid.points)


class TestContraction:
    """Test the contraction diagnostic."""

    def test_below_one(self):
        """0.9 with a row-stochastic W contracts."""
        assert contraction_check(0.9, inverse_distance_weights(5))

    def test_strict_inequality(self):
        """Exactly one does not contract."""
        assert not contraction_check(1.0, inverse_distance_weights(5))

    def test_true_rho_at_half_breaks_condition(self):
        """The eta = 0.5 surface peaks at 1 on the corner."""
        from sfofr.simulate import true_rho

        points = np.linspace(0, 1, 201)
        surface = true_rho(points[:, None], points[None, :], 0.5)
        assert rho_sup(surface) == pytest.approx(1.0)
        assert not contraction_check(rho_sup(surface), inverse_distance_weights(10))
