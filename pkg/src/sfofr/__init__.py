"""Penalized spatial function-on-function regression."""

from .estimator import fit, predict
from .inference import bootstrap_ci
from .selection import grid_search
from .simulate import monte_carlo

__all__ = ["bootstrap_ci", "fit", "grid_search", "monte_carlo", "predict"]
