"""Station coordinates schema."""

from typing import Optional, Tuple

import attrs
import numpy as np

from ..errors import InvariantViolationError
from ..utils import float_array


@attrs.define(eq=False)
class StationCoords:
    """Longitude/latitude pairs in degrees, one per spatial unit."""

    longitude: np.ndarray = attrs.field(converter=float_array)
    latitude: np.ndarray = attrs.field(converter=float_array)
    stations: Optional[Tuple[str, ...]] = None

    def __attrs_post_init__(self):
        if self.longitude.shape != self.latitude.shape or self.longitude.ndim != 1:
            raise InvariantViolationError(
                "Longitude and latitude must be vectors of equal length"
            )
        if np.any(np.abs(self.latitude) > 90):
            raise InvariantViolationError("Latitudes must lie in [-90, 90]")
        if np.any(np.abs(self.longitude) > 180):
            raise InvariantViolationError("Longitudes must lie in [-180, 180]")
        if self.stations is not None and len(self.stations) != self.longitude.size:
            raise InvariantViolationError("One station label per coordinate pair")

    @property
    def size(self) -> int:
        return self.longitude.size

    def permuted(self, order) -> "StationCoords":
        order = np.asarray(order)
        stations = None
        if self.stations is not None:
            stations = tuple(self.stations[i] for i in order)
        return StationCoords(self.longitude[order], self.latitude[order], stations)

    def __str__(self) -> str:
        return (
            f"{self.size} stations, lon [{self.longitude.min():.3f}, "
            f"{self.longitude.max():.3f}], lat [{self.latitude.min():.3f}, "
            f"{self.latitude.max():.3f}]"
        )
