"""Monte Carlo configuration schema."""

import attrs
from attrs import validators

from ..errors import ConfigError


def _open_unit(instance, attribute, value):
    if not 0.0 < value < 1.0:
        raise ConfigError(f"{attribute.name} must lie in (0, 1), got {value}")


def _at_least(bound):
    def check(instance, attribute, value):
        if value < bound:
            raise ConfigError(f"{attribute.name} must be >= {bound}, got {value}")

    return check


@attrs.define
class SimulationConfig:
    """Data-generating process and replication budget."""

    n_train: int = attrs.field(default=100, validator=_at_least(2))
    n_test: int = attrs.field(default=1000, validator=_at_least(2))
    eta: float = attrs.field(default=0.1, validator=_open_unit)
    grid_size: int = attrs.field(default=101, validator=_at_least(3))
    seed: int = attrs.field(default=0, validator=validators.instance_of(int))
    replications: int = attrs.field(default=50, validator=_at_least(1))
    noise_sd: float = attrs.field(default=1.0, validator=_at_least(0.0))

    def __str__(self) -> str:
        return (
            f"Simulation: eta={self.eta}, n_train={self.n_train}, n_test={self.n_test}, "
            f"grid={self.grid_size}, replications={self.replications}, seed={self.seed}"
        )
