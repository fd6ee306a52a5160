"""Schemas package for the regression's domain types."""

from .BasisSystem import BasisSystem
from .BootstrapSurfaces import BootstrapSurfaces
from .CoefficientSet import CoefficientSet
from .DesignMatrices import DesignMatrices
from .EstimatorSettings import EstimatorSettings
from .FitResult import FitResult
from .FunctionalSample import FunctionalSample
from .LambdaGrid import LambdaGrid
from .MetricTable import METRIC_COLUMNS, MetricTable
from .PenaltyAssembly import PenaltyAssembly
from .QuadratureGrid import QuadratureGrid
from .RunConfig import RunConfig
from .SimulationConfig import SimulationConfig
from .SpatialWeights import SpatialWeights
from .StationCoords import StationCoords

__all__ = [
    "BasisSystem",
    "BootstrapSurfaces",
    "CoefficientSet",
    "DesignMatrices",
    "EstimatorSettings",
    "FitResult",
    "FunctionalSample",
    "LambdaGrid",
    "METRIC_COLUMNS",
    "MetricTable",
    "PenaltyAssembly",
    "QuadratureGrid",
    "RunConfig",
    "SimulationConfig",
    "SpatialWeights",
    "StationCoords",
]
