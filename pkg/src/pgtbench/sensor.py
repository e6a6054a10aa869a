"""Ray-cast LiDAR scan simulation parameterized by real product specs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from ._kernels import cast_rays
from .core import NO_RETURN, OccupancyGrid, Point2D, PointCloud, Pose2D, world_to_cell
from .errors import DataError

#: Blind-zone default for catalog sensors; the market table does not list
#: minimum detection ranges.
DEFAULT_MIN_RANGE = 0.3


@dataclass(frozen=True)
class SensorSpec:
    """Physical parameters of one scanner model (horizontal plane only).

    ``assumed`` names fields filled with documented defaults because the
    vendor table left them blank.
    """

    model_name: str
    max_range: float              # m
    min_range: float              # m, blind zone
    fov_horizontal: float         # rad
    angular_resolution: float     # rad per beam
    range_accuracy_sigma: float   # m, 1-sigma Gaussian
    cycle_time: float             # s per full sweep
    assumed: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.min_range < self.max_range:
            raise ValueError(f"need 0 <= min_range < max_range, got {self.min_range}, {self.max_range}")
        if not 0 < self.fov_horizontal <= math.tau + 1e-12:
            raise ValueError(f"fov_horizontal must be in (0, 2pi], got {self.fov_horizontal}")
        if self.angular_resolution <= 0:
            raise ValueError(f"angular_resolution must be > 0, got {self.angular_resolution}")
        if self.range_accuracy_sigma < 0:
            raise ValueError(f"range_accuracy_sigma must be >= 0, got {self.range_accuracy_sigma}")
        if self.cycle_time <= 0:
            raise ValueError(f"cycle_time must be > 0, got {self.cycle_time}")

    @property
    def beam_count(self) -> int:
        return math.floor(self.fov_horizontal / self.angular_resolution) + 1

    def beam_azimuths(self) -> np.ndarray:
        """Sensor-frame beam angles, strictly increasing across the FoV."""
        k = np.arange(self.beam_count, dtype=np.float64)
        return -0.5 * self.fov_horizontal + k * self.angular_resolution


# Market survey rows (units as published: m, deg, m, deg, s). None marks a
# blank cell in the source table, filled with the default next to it.
_CATALOG_ROWS = (
    # model, range, fov deg, accuracy m, accuracy deg, cycle s
    ("Quanergy M8-1", 150.0, 360.0, 0.05, 0.03, 0.033),
    ("Ibeo LUX", 200.0, 110.0, 0.10, 0.125, 0.020),
    ("Continental SRL1", 10.0, 27.0, 0.10, None, 0.010),
    ("Velodyne HDL-64ES2", 120.0, 360.0, 0.02, 0.09, 0.050),
    ("Velodyne Alpha Puck", 300.0, 360.0, 0.03, 0.11, 0.050),
    ("Ouster OS-2", 250.0, 45.0, None, 0.175, 0.050),
)
_DEFAULT_ANGULAR_DEG = 0.25
_DEFAULT_SIGMA = 0.03


def builtin_sensor_catalog() -> list[SensorSpec]:
    """The six market-survey scanner models as ready-to-use specs."""
    specs = []
    for name, rng_m, fov_deg, sigma, ang_deg, cycle in _CATALOG_ROWS:
        assumed = ["min_range"]
        if ang_deg is None:
            ang_deg = _DEFAULT_ANGULAR_DEG
            assumed.append("angular_resolution")
        if sigma is None:
            sigma = _DEFAULT_SIGMA
            assumed.append("range_accuracy_sigma")
        specs.append(
            SensorSpec(
                model_name=name,
                max_range=rng_m,
                min_range=DEFAULT_MIN_RANGE,
                fov_horizontal=math.radians(fov_deg),
                angular_resolution=math.radians(ang_deg),
                range_accuracy_sigma=sigma,
                cycle_time=cycle,
                assumed=tuple(assumed),
            )
        )
    return specs


def sensor_by_name(name: str) -> SensorSpec:
    for spec in builtin_sensor_catalog():
        if spec.model_name == name:
            return spec
    known = ", ".join(r[0] for r in _CATALOG_ROWS)
    raise DataError(f"unknown sensor model '{name}' (catalog: {known})")


def catalog_csv_rows() -> list[tuple]:
    """Catalog in source-table column order plus the assumption flags."""
    rows = []
    for name, rng_m, fov_deg, sigma, ang_deg, cycle in _CATALOG_ROWS:
        assumed = ["min_range"]
        if ang_deg is None:
            ang_deg = _DEFAULT_ANGULAR_DEG
            assumed.append("angular_resolution")
        if sigma is None:
            sigma = _DEFAULT_SIGMA
            assumed.append("range_accuracy_sigma")
        rows.append((name, rng_m, fov_deg, sigma, ang_deg, cycle, DEFAULT_MIN_RANGE, ";".join(assumed)))
    return rows


def occupancy_mask(grid: OccupancyGrid) -> np.ndarray:
    """Cells counted as solid by the ray caster (p > 0.5)."""
    return (grid.cells > 0.0).astype(np.uint8)


def raycast(
    gt: OccupancyGrid,
    origin: Point2D,
    direction: tuple[float, float],
    max_range: float,
) -> float | None:
    """Distance to the first boundary crossing into an occupied cell.

    Returns None (no hit) when no occupied cell lies within max_range or the
    ray leaves the grid first. An origin inside an occupied cell hits at 0.
    """
    dx, dy = direction
    norm = math.hypot(dx, dy)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, |d| = {norm}")
    if world_to_cell(gt, origin) is None:
        raise ValueError(f"ray origin ({origin.x}, {origin.y}) outside grid")
    out = np.empty(1, dtype=np.float64)
    cast_rays(
        occupancy_mask(gt),
        origin.x, origin.y,
        np.array([dx]), np.array([dy]),
        max_range, gt.resolution, gt.origin.x, gt.origin.y,
        out,
    )
    d = float(out[0])
    return None if math.isnan(d) else d


def scan(
    gt: OccupancyGrid,
    pose: Pose2D,
    spec: SensorSpec,
    seed: int,
    *,
    frame_id: int = 0,
    timestamp: float = 0.0,
) -> PointCloud:
    """Simulate one sweep: one beam per azimuth step across the FoV.

    Hits between min_range and max_range return the cast distance plus
    Gaussian range noise (per-beam stream keyed on (seed, frame_id, beam,
    RANGE_NOISE)); blind-zone and out-of-range targets give NO_RETURN. All
    beams are labeled GENUINE.
    """
    if world_to_cell(gt, pose.position) is None:
        raise ValueError(f"scan pose ({pose.x}, {pose.y}) outside grid")
    azimuths = spec.beam_azimuths()
    world_angles = pose.heading + azimuths
    dirx = np.cos(world_angles)
    diry = np.sin(world_angles)
    dists = np.empty(azimuths.size, dtype=np.float64)
    cast_rays(
        occupancy_mask(gt),
        pose.x, pose.y, dirx, diry,
        spec.max_range, gt.resolution, gt.origin.x, gt.origin.y,
        dists,
    )
    hit = np.isfinite(dists) & (dists >= spec.min_range) & (dists <= spec.max_range)
    ranges = np.full(azimuths.size, NO_RETURN)
    if spec.range_accuracy_sigma > 0.0:
        noise = rng.normals(
            seed, frame_id, np.arange(azimuths.size), rng.Stage.RANGE_NOISE, 1
        )[:, 0]
        noisy = dists + spec.range_accuracy_sigma * noise
        upper = spec.max_range + 3.0 * spec.range_accuracy_sigma
        ranges[hit] = np.clip(noisy[hit], spec.min_range, upper)
    else:
        ranges[hit] = dists[hit]
    return PointCloud(frame_id, timestamp, azimuths, ranges)
