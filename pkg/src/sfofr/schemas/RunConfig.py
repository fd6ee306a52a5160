"""Run configuration schema."""

from typing import Optional, Tuple

import attrs
from attrs import validators

from ..errors import ConfigError
from .EstimatorSettings import EstimatorSettings
from .LambdaGrid import LambdaGrid
from .SimulationConfig import SimulationConfig

SCHEMA_VERSION = 1
DISTANCES = ("haversine", "euclidean")


def _check_alpha(instance, attribute, value):
    if not 0.0 < value < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {value}")


def _check_min(bound):
    def check(instance, attribute, value):
        if value < bound:
            raise ConfigError(f"{attribute.name} must be >= {bound}, got {value}")

    return check


def _check_fixed(instance, attribute, value):
    if value is None:
        return
    if len(value) != 2 or min(value) < 0:
        raise ConfigError(f"fixed lambdas must be two non-negative numbers, got {value!r}")


@attrs.define
class RunConfig:
    """Everything a command needs besides its input files."""

    schema_version: int = attrs.field(default=SCHEMA_VERSION)
    estimator: EstimatorSettings = attrs.Factory(EstimatorSettings)
    grid: Optional[LambdaGrid] = None
    fixed_lambdas: Optional[Tuple[float, float]] = attrs.field(
        default=None, validator=_check_fixed
    )
    bootstrap_replicates: int = attrs.field(default=199, validator=_check_min(1))
    alpha: float = attrs.field(default=0.05, validator=_check_alpha)
    simulation: SimulationConfig = attrs.Factory(SimulationConfig)
    neighbors: int = attrs.field(default=4, validator=_check_min(1))
    distance: str = attrs.field(default="haversine", validator=validators.in_(DISTANCES))
    moran_num_funcs: int = attrs.field(default=13, validator=_check_min(2))
    out_dir: Optional[str] = None
    seed: int = 0
    jobs: int = 1

    def __attrs_post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"Unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}"
            )

    def lambda_grid(self) -> LambdaGrid:
        """The search space: a fixed pair wins over an explicit grid, else the default."""
        if self.fixed_lambdas is not None:
            return LambdaGrid.single(*self.fixed_lambdas)
        return self.grid if self.grid is not None else LambdaGrid.default()

    def __str__(self) -> str:
        return (
            f"Run config (schema {self.schema_version}):\n"
            f"  {self.estimator}\n"
            f"  {self.lambda_grid()}\n"
            f"  Bootstrap: B={self.bootstrap_replicates}, alpha={self.alpha}\n"
            f"  {self.simulation}\n"
            f"  Spatial: h={self.neighbors}, {self.distance}\n"
            f"  Seed: {self.seed}, jobs: {self.jobs}"
        )
