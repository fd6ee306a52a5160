"""Readers and writers for curve, surface, weight, coordinate and JSON files.

Curve files have no header: the first row holds the grid, every following
row one curve. Surface files carry the row grid in the first column and the
column grid in the header. Floats are written in shortest round-trip form.
"""

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Tuple

import attrs
import numpy as np
import pandas as pd

from .basis import quad_weights
from .errors import SchemaError, SfofrError, StorageError
from .schemas import FunctionalSample, SpatialWeights, StationCoords

logger = logging.getLogger(__name__)

COORD_COLUMNS = ("station", "lon", "lat")


@contextmanager
def _file_errors(path, action: str):
    """Translate IO and parse failures into package errors carrying the path."""
    try:
        yield
    except SfofrError as e:
        if e.path is None:
            e.path = str(path)
            e.args = (e._format_message(),)
        raise
    except FileNotFoundError as e:
        raise StorageError(f"File not found while {action}", path=str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"Malformed file while {action}", path=str(path), details=str(e)) from e
    except OSError as e:
        raise StorageError(f"IO failure while {action}", path=str(path), details=str(e)) from e


def ensure_dir(path) -> Path:
    path = Path(path)
    if not path.exists():
        path.mkdir(parents=True)
        logger.info(f"Created output directory {path}")
    return path


def _numeric_frame(frame: pd.DataFrame, what: str) -> np.ndarray:
    """Return frame as float64, naming the first non-numeric cell on failure."""
    converted = frame.apply(pd.to_numeric, errors="coerce")
    bad = converted.isna() & frame.notna()
    missing = frame.isna()
    for mask, problem in ((bad, "non-numeric value"), (missing, "missing value")):
        if mask.to_numpy().any():
            row, col = np.argwhere(mask.to_numpy())[0]
            raise SchemaError(
                f"{what}: {problem} at row {row + 1}, column {col + 1}",
                details=f"cell content {frame.iat[row, col]!r}",
            )
    return converted.to_numpy(dtype=np.float64)


def read_curves(path) -> FunctionalSample:
    """Load curves and rescale their grid to [0, 1], keeping the file grid as source."""
    with _file_errors(path, "reading curves"):
        raw = _numeric_frame(pd.read_csv(path, header=None, float_precision="round_trip"), "curve file")
        if raw.shape[0] < 2:
            raise SchemaError("Curve file needs a grid row and at least one curve")
        points = raw[0]
        span = points[-1] - points[0]
        if span <= 0:
            raise SchemaError("Grid row must be strictly increasing")
        grid = attrs.evolve(quad_weights((points - points[0]) / span), source=points)
        return FunctionalSample(values=raw[1:], grid=grid)


def write_curves(path, sample: FunctionalSample):
    with _file_errors(path, "writing curves"):
        rows = np.vstack([sample.grid.axis, sample.values])
        pd.DataFrame(rows).to_csv(path, header=False, index=False)


def read_surface(path) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (values, row_points, col_points)."""
    with _file_errors(path, "reading surface"):
        frame = pd.read_csv(path, index_col=0, float_precision="round_trip")
        values = _numeric_frame(frame, "surface file")
        try:
            cols = np.array([float(c) for c in frame.columns])
        except ValueError as e:
            raise SchemaError("Surface header must hold the column grid", details=str(e)) from e
        rows = frame.index.to_numpy(dtype=np.float64)
        return values, rows, cols


def write_surface(path, values, row_points, col_points, row_label: str = "t"):
    with _file_errors(path, "writing surface"):
        frame = pd.DataFrame(
            np.asarray(values), index=np.asarray(row_points), columns=np.asarray(col_points)
        )
        frame.to_csv(path, index_label=row_label)


def read_weights(path) -> SpatialWeights:
    """Load a plain n x n weight matrix; invariants are checked on construction."""
    with _file_errors(path, "reading weights"):
        matrix = _numeric_frame(pd.read_csv(path, header=None, float_precision="round_trip"), "weight file")
        row_sums = matrix.sum(axis=1)
        live = row_sums != 0
        normalized = bool(np.all(np.abs(row_sums[live] - 1.0) <= 1e-12))
        return SpatialWeights(matrix=matrix, normalized=normalized)


def write_weights(path, weights: SpatialWeights):
    with _file_errors(path, "writing weights"):
        pd.DataFrame(weights.matrix).to_csv(path, header=False, index=False)


def read_coords(path) -> StationCoords:
    """Load station coordinates from a `station,lon,lat` CSV."""
    with _file_errors(path, "reading coordinates"):
        frame = pd.read_csv(path, dtype={"station": str}, float_precision="round_trip")
        missing = [c for c in COORD_COLUMNS if c not in frame.columns]
        if missing:
            raise SchemaError(
                f"Coordinate file lacks column(s) {missing}",
                details=f"found {list(frame.columns)}",
            )
        lonlat = _numeric_frame(frame[["lon", "lat"]], "coordinate file")
        return StationCoords(
            longitude=lonlat[:, 0],
            latitude=lonlat[:, 1],
            stations=tuple(frame["station"]),
        )


def write_coords(path, coords: StationCoords):
    with _file_errors(path, "writing coordinates"):
        stations = coords.stations or tuple(str(i) for i in range(coords.size))
        pd.DataFrame(
            {"station": stations, "lon": coords.longitude, "lat": coords.latitude}
        ).to_csv(path, index=False)


def write_frame(path, frame: pd.DataFrame):
    with _file_errors(path, "writing table"):
        frame.to_csv(path, index=False)


def write_json(path, data: dict):
    with _file_errors(path, "writing JSON"):
        with open(path, "w") as f:
            json.dump(data, f, indent=2)


def read_json(path) -> dict:
    with _file_errors(path, "reading JSON"):
        try:
            with open(path) as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError("Invalid JSON", details=str(e)) from e
