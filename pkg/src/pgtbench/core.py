"""Geometry, point clouds and the log-odds occupancy grid.

Conventions used everywhere else in the package:

* world frame is a right-handed 2-D plane, angles counter-clockwise from +x,
  headings normalized to [-pi, pi)
* grid cells are half-open squares [k*res, (k+1)*res) per axis, indexed
  (col, row) with cell (0, 0) at the grid origin corner
* cell state is a log-odds value clamped to [L_MIN, L_MAX]; L = 0 means
  unknown (p = 0.5)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
from scipy.special import expit, logit

from .errors import DataError

# Log-odds clamp. Keeps cells out of saturation lock-in while letting
# repeated evidence dominate: p ranges over [4.5e-5, 1 - 4.5e-5].
L_MIN = -10.0
L_MAX = 10.0

#: Sentinel for a beam that produced no return (NaN so it vectorizes).
NO_RETURN = math.nan

GRID_MAGIC = "PGTGRID"
GRID_VERSION = 1

# 17 significant digits: exact float64 round-trip through decimal text.
_FLOAT_FMT = "{:.16e}"


class Label(IntEnum):
    """Provenance of a beam after perturbation (used for filter scoring)."""

    GENUINE = 0
    CLUTTER = 1
    DROPPED = 2


def normalize_angle(angle: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    a = math.remainder(angle, math.tau)
    if a >= math.pi:
        a -= math.tau
    elif a < -math.pi:
        a += math.tau
    return a


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Pose2D:
    """Position plus heading; heading is normalized to [-pi, pi) on construction."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError(f"pose fields must be finite, got ({self.x}, {self.y}, {self.heading})")
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    @property
    def position(self) -> Point2D:
        return Point2D(self.x, self.y)


@dataclass(frozen=True)
class BeamReturn:
    """One beam of a scan. ``azimuth`` is in the sensor frame (0 = boresight)."""

    azimuth: float
    range: float = NO_RETURN
    label: Label = Label.GENUINE

    @property
    def is_return(self) -> bool:
        return math.isfinite(self.range)


class PointCloud:
    """A single scan: parallel arrays of azimuth, range and label per beam.

    Azimuths are sensor-frame and strictly increasing. Ranges are meters,
    NaN (= NO_RETURN) for beams without a return. Labels default to GENUINE;
    weather perturbation rewrites them (then the cloud is conventionally
    called a perturbed cloud, same type).
    """

    __slots__ = ("frame_id", "timestamp", "azimuths", "ranges", "labels")

    def __init__(
        self,
        frame_id: int,
        timestamp: float,
        azimuths: np.ndarray,
        ranges: np.ndarray,
        labels: np.ndarray | None = None,
    ) -> None:
        if frame_id < 0:
            raise ValueError(f"frame_id must be >= 0, got {frame_id}")
        azimuths = np.ascontiguousarray(azimuths, dtype=np.float64)
        ranges = np.ascontiguousarray(ranges, dtype=np.float64)
        if labels is None:
            labels = np.zeros(azimuths.shape, dtype=np.uint8)
        else:
            labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if not (azimuths.shape == ranges.shape == labels.shape) or azimuths.ndim != 1:
            raise ValueError("azimuths, ranges and labels must be 1-D arrays of equal length")
        if azimuths.size > 1 and not np.all(np.diff(azimuths) > 0):
            raise ValueError("beam azimuths must be strictly increasing")
        self.frame_id = int(frame_id)
        self.timestamp = float(timestamp)
        self.azimuths = azimuths
        self.ranges = ranges
        self.labels = labels

    def __len__(self) -> int:
        return int(self.azimuths.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (
            self.frame_id == other.frame_id
            and self.timestamp == other.timestamp
            and np.array_equal(self.azimuths, other.azimuths)
            and np.array_equal(self.ranges, other.ranges, equal_nan=True)
            and np.array_equal(self.labels, other.labels)
        )

    def beam(self, i: int) -> BeamReturn:
        return BeamReturn(float(self.azimuths[i]), float(self.ranges[i]), Label(self.labels[i]))

    @property
    def beams(self) -> list[BeamReturn]:
        return [self.beam(i) for i in range(len(self))]

    def returned_mask(self) -> np.ndarray:
        return np.isfinite(self.ranges)

    def copy(self) -> "PointCloud":
        return PointCloud(
            self.frame_id, self.timestamp,
            self.azimuths.copy(), self.ranges.copy(), self.labels.copy(),
        )


#: Alias used where provenance labels are meaningful (post-weather clouds).
PerturbedCloud = PointCloud


@dataclass
class OccupancyGrid:
    """Dense 2-D log-odds grid.

    ``cells`` has shape (height, width); cells[row, col] covers the world
    square [origin.x + col*res, ...) x [origin.y + row*res, ...).
    """

    resolution: float
    origin: Point2D
    cells: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        self.cells = np.ascontiguousarray(self.cells, dtype=np.float64)
        if self.cells.ndim != 2 or self.cells.shape[0] < 1 or self.cells.shape[1] < 1:
            raise ValueError(f"cells must be a 2-D array with >= 1 cell per axis, got shape {self.cells.shape}")

    @classmethod
    def uniform(
        cls,
        width: int,
        height: int,
        resolution: float,
        origin: Point2D = Point2D(0.0, 0.0),
        value: float = 0.0,
    ) -> "OccupancyGrid":
        return cls(resolution, origin, np.full((height, width), value, dtype=np.float64))

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    def prob(self) -> np.ndarray:
        """Occupancy probability per cell, p = 1 - 1/(1 + e^L)."""
        return expit(self.cells)

    def cell_center(self, col: int, row: int) -> Point2D:
        return Point2D(
            self.origin.x + (col + 0.5) * self.resolution,
            self.origin.y + (row + 0.5) * self.resolution,
        )

    def aligned_with(self, other: "OccupancyGrid") -> bool:
        return (
            self.cells.shape == other.cells.shape
            and self.resolution == other.resolution
            and self.origin == other.origin
        )

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.resolution, self.origin, self.cells.copy())


def pose_transform(pose: Pose2D, local: Point2D) -> Point2D:
    """Map a sensor-frame point to the world frame (rotate by heading, then translate)."""
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    return Point2D(
        pose.x + c * local.x - s * local.y,
        pose.y + s * local.x + c * local.y,
    )


def pose_inverse(pose: Pose2D) -> Pose2D:
    """Pose such that pose_transform(inv, pose_transform(pose, p)) == p."""
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    return Pose2D(-(c * pose.x + s * pose.y), -(-s * pose.x + c * pose.y), -pose.heading)


def world_to_cell(grid: OccupancyGrid, p: Point2D) -> tuple[int, int] | None:
    """Cell index (col, row) containing ``p``, or None when out of bounds."""
    col = math.floor((p.x - grid.origin.x) / grid.resolution)
    row = math.floor((p.y - grid.origin.y) / grid.resolution)
    if 0 <= col < grid.width and 0 <= row < grid.height:
        return (col, row)
    return None


def logodds_to_prob(L):
    """p = 1 - 1/(1 + e^L); accepts scalars or arrays."""
    return expit(L)


def prob_to_logodds(p):
    """Inverse of logodds_to_prob."""
    return logit(p)


def update_cell(grid: OccupancyGrid, cell: tuple[int, int], delta: float) -> OccupancyGrid:
    """Add log-odds evidence to one cell, clamped to [L_MIN, L_MAX].

    Mutates and returns ``grid``. Out-of-bounds cells are a caller error.
    """
    col, row = cell
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise ValueError(f"cell {cell} out of bounds for {grid.width}x{grid.height} grid")
    grid.cells[row, col] = min(L_MAX, max(L_MIN, grid.cells[row, col] + delta))
    return grid


def save_grid(grid: OccupancyGrid, path: str | Path) -> None:
    """Write a grid in the PGTGRID v1 text format (value-exact round trip)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{GRID_MAGIC} {GRID_VERSION} {grid.width} {grid.height} "
            f"{_FLOAT_FMT.format(grid.resolution)} "
            f"{_FLOAT_FMT.format(grid.origin.x)} {_FLOAT_FMT.format(grid.origin.y)}\n"
        )
        for row in range(grid.height):
            fh.write(" ".join(_FLOAT_FMT.format(v) for v in grid.cells[row]))
            fh.write("\n")


def load_grid(path: str | Path) -> OccupancyGrid:
    """Read a PGTGRID v1 file; raises DataError naming the offending line."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        tokens = header.split()
        if len(tokens) != 7 or tokens[0] != GRID_MAGIC:
            raise DataError(f"{path}: line 1: not a {GRID_MAGIC} header")
        if tokens[1] != str(GRID_VERSION):
            raise DataError(f"{path}: line 1: unsupported {GRID_MAGIC} version {tokens[1]}")
        try:
            width, height = int(tokens[2]), int(tokens[3])
            resolution = float(tokens[4])
            ox, oy = float(tokens[5]), float(tokens[6])
        except ValueError as exc:
            raise DataError(f"{path}: line 1: bad header field: {exc}") from exc
        if width < 1 or height < 1 or resolution <= 0:
            raise DataError(f"{path}: line 1: invalid grid dimensions/resolution")
        cells = np.empty((height, width), dtype=np.float64)
        for row in range(height):
            line = fh.readline()
            if not line:
                raise DataError(f"{path}: line {row + 2}: unexpected end of file")
            try:
                values = np.array(line.split(), dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}: line {row + 2}: bad value: {exc}") from exc
            if values.size != width:
                raise DataError(f"{path}: line {row + 2}: expected {width} values, got {values.size}")
            cells[row] = values
    return OccupancyGrid(resolution, Point2D(ox, oy), cells)
