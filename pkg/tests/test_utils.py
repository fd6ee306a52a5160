"""Tests for random streams, the worker pool and timing helpers."""

import threading
import time
from unittest.mock import patch

import numpy as np

from sfofr.utils import float_array, parallel_map, resolve_jobs, spawn_rng, stopwatch


class TestSpawnRng:
    """Test keyed random streams."""

    def test_same_key_same_stream(self):
        np.testing.assert_array_equal(spawn_rng(3, 7).normal(size=5), spawn_rng(3, 7).normal(size=5))

    def test_streams_differ(self):
        assert spawn_rng(3, 7).random() != spawn_rng(3, 8).random()
        assert spawn_rng(3).random() != spawn_rng(4).random()

    def test_independent_of_draw_order(self):
        """Stream k is the same whether or not earlier streams were used."""
        for k in range(3):
            spawn_rng(1, k).random(100)
        np.testing.assert_array_equal(spawn_rng(1, 3).random(4), spawn_rng(1, 3).random(4))


class TestResolveJobs:
    def test_positive(self):
        assert resolve_jobs(4) == 4

    @patch("os.cpu_count", return_value=6)
    def test_all_cores(self, mock_cpu_count):
        assert resolve_jobs(0) == 6
        assert resolve_jobs(-1) == 6
        assert resolve_jobs(None) == 6

    @patch("os.cpu_count", return_value=None)
    def test_unknown_core_count(self, mock_cpu_count):
        assert resolve_jobs(0) == 1


class TestParallelMap:
    """Test ordered mapping over items."""

    def test_inline(self):
        assert parallel_map(lambda x: x * x, range(5)) == [0, 1, 4, 9, 16]

    def test_order_kept_under_threads(self):
        def slow_for_small(x):
            time.sleep(0.01 * (5 - x))
            return x

        assert parallel_map(slow_for_small, range(5), jobs=3) == [0, 1, 2, 3, 4]

    def test_uses_threads(self):
        seen = set()

        def record(x):
            seen.add(threading.get_ident())
            time.sleep(0.02)
            return x

        parallel_map(record, range(4), jobs=4)
        assert len(seen) > 1

    def test_empty(self):
        assert parallel_map(lambda x: x, [], jobs=4) == []


def test_stopwatch():
    with stopwatch() as elapsed:
        time.sleep(0.01)
    assert elapsed[0] >= 0.01


def test_float_array():
    result = float_array([1, 2])
    assert result.dtype == np.float64
    np.testing.assert_array_equal(result, [1.0, 2.0])
