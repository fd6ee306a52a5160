"""Estimator settings schema."""

import attrs

from ..errors import ConfigError


def _positive_int(instance, attribute, value):
    if not isinstance(value, int) or value < 1:
        raise ConfigError(f"{attribute.name} must be a positive integer, got {value!r}")


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError(f"{attribute.name} must be positive, got {value!r}")


@attrs.define
class EstimatorSettings:
    """Bases, instrument order and numerical controls for one fit."""

    num_y: int = attrs.field(default=10, validator=_positive_int)
    num_x: int = attrs.field(default=10, validator=_positive_int)
    degree: int = attrs.field(default=3, validator=_positive_int)
    lags: int = attrs.field(default=2, validator=_positive_int)
    allow_pinv: bool = True
    neumann_tol: float = attrs.field(default=0.001, validator=_positive)
    max_iter: int = attrs.field(default=1000, validator=_positive_int)

    def __attrs_post_init__(self):
        if min(self.num_y, self.num_x) < self.degree + 1:
            raise ConfigError(
                f"Basis sizes must be at least degree + 1 = {self.degree + 1}"
            )

    def __str__(self) -> str:
        return (
            f"Estimator: K_y={self.num_y}, K_x={self.num_x}, degree={self.degree}, "
            f"Q={self.lags}, tol={self.neumann_tol:g}"
        )
