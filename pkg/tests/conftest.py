import logging

import attrs
import numpy as np
import pytest

from sfofr import storage
from sfofr.basis import make_basis, uniform_grid
from sfofr.schemas import EstimatorSettings, SimulationConfig
from sfofr.simulate import simulate_dataset
from sfofr.utils import spawn_rng


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep the user's config and log settings out of the tests."""
    monkeypatch.delenv("SFOFR_CONFIG", raising=False)
    monkeypatch.delenv("SFOFR_LOG", raising=False)


@pytest.fixture(autouse=True)
def restore_logging():
    """Undo root logger changes made by configure_logging."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers[:]:
        if type(handler) is logging.StreamHandler and handler not in handlers:
            root.removeHandler(handler)
    root.setLevel(level)


@pytest.fixture
def rng():
    """A fixed random generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def grid21():
    """21 equally spaced points on [0, 1]."""
    return uniform_grid(21)


@pytest.fixture
def cubic10():
    """The default cubic basis with 10 functions."""
    return make_basis(10, 3)


@pytest.fixture
def small_settings():
    """Small bases so fits take milliseconds."""
    return EstimatorSettings(num_y=5, num_x=5, degree=3, lags=2)


@pytest.fixture
def small_config():
    """A small simulation design."""
    return SimulationConfig(
        n_train=30, n_test=20, eta=0.3, grid_size=21, seed=7, replications=2
    )


@pytest.fixture
def small_data(small_config):
    """One draw of the small simulation design."""
    return simulate_dataset(small_config, spawn_rng(small_config.seed))


def greville(basis):
    """Coefficients reproducing f(t) = t in a clamped B-spline basis."""
    k = basis.degree
    return np.array(
        [basis.knots[i + 1 : i + k + 1].mean() for i in range(basis.num_funcs)]
    )


@pytest.fixture
def small_fit(small_data, small_settings):
    """A fit of the small draw at fixed smoothing parameters."""
    from sfofr.estimator import fit

    return fit(
        small_data.train_y,
        small_data.train_x,
        small_data.train_w,
        small_settings,
        lambdas=(0.1, 0.1),
    )


SMALL_RUN_CONFIG = """
seed = 3

[bases]
num_y = 5
num_x = 5

[lambda]
fixed = [0.1, 0.1]

[bootstrap]
replicates = 39

[simulation]
n_train = 30
n_test = 20
eta = 0.3
grid_size = 21
replications = 2
"""


@pytest.fixture
def cli_config(tmp_path):
    """Path of a run config small enough for command-line tests."""
    path = tmp_path / "sfofr.toml"
    path.write_text(SMALL_RUN_CONFIG)
    return str(path)


@pytest.fixture
def simulated_dir(tmp_path, cli_config):
    """Directory holding the files written by `sfofr simulate`."""
    from click.testing import CliRunner

    from sfofr.cli import cli

    out = tmp_path / "sim"
    result = CliRunner().invoke(cli, ["simulate", "--config", cli_config, "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture
def station_network(tmp_path):
    """140 stations with a year of daily curves, shaped like a state mesonet.

    Curves follow the model on bi-square nearest-neighbour weights; the grid
    row holds day numbers 1..365.
    """
    from sfofr.schemas import StationCoords
    from sfofr.simulate import gen_predictor, gen_response
    from sfofr.spatial import knn_bisquare_weights

    rng = np.random.default_rng(365)
    n = 140
    coords = StationCoords(
        longitude=rng.uniform(-104.0, -96.6, n),
        latitude=rng.uniform(45.9, 49.0, n),
        stations=tuple(f"ST{i:03d}" for i in range(n)),
    )
    days = np.arange(1, 366)
    grid = attrs.evolve(uniform_grid(days.size), source=days)
    weights = knn_bisquare_weights(coords, h=4)
    predictor = gen_predictor(n, grid, rng)
    response = gen_response(predictor, weights, 0.1, 0.1, rng)

    out = tmp_path / "stations"
    storage.ensure_dir(out)
    storage.write_curves(out / "y.csv", response)
    storage.write_curves(out / "x.csv", predictor)
    storage.write_coords(out / "coords.csv", coords)
    return out
