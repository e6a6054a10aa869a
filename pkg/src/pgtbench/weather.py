"""Environmental degradation models and the machine-readable limitation catalog.

The catalog reproduces the literature-survey table of scanner limitations.
Eight of the fourteen entries are backed by executable models here:
obstruction (sensor-cover dirt), a two-way power-budget attenuation test
(rain / fog / snow / spray, wet-surface reflectivity loss), range-bounded
clutter injection (rain / snow / spray / sunlight) and sunlight range-noise
inflation.

Magnitude constants below are tunable model defaults chosen for plausible,
monotonic behavior; the survey sources only two numbers: the ~10 % wet-surface
reflectivity reduction and the direction of the 1550 nm rain-robustness
advantage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import rng
from .core import NO_RETURN, Label, PerturbedCloud, PointCloud, Pose2D, normalize_angle
from .sensor import SensorSpec
from .world import WorldModel

# --- model constants (defaults, not measured values) -----------------------

KOSCHMIEDER = 3.912                  # fog: alpha = KOSCHMIEDER / visibility
RAIN_EXTINCTION_COEFF = 0.002        # 1/m per (mm/h)^RAIN_EXTINCTION_EXP at 905 nm
RAIN_EXTINCTION_EXP = 0.6
SNOW_EXTINCTION_COEFF = 0.004        # 1/m per (mm/h water-eq.)^SNOW_EXTINCTION_EXP
SNOW_EXTINCTION_EXP = 0.7
SPRAY_EXTINCTION_COEFF = 0.02        # 1/m per spray level
NM1550_RAIN_FACTOR = 0.7             # rain/spray extinction scale at 1550 nm

CLUTTER_COEFF_RAIN = 0.002           # clutter probability per beam per mm/h
CLUTTER_COEFF_SNOW = 0.008
CLUTTER_COEFF_SPRAY = 0.15           # per spray level
CLUTTER_COEFF_SUN = 0.02             # per sunlight level
CLUTTER_PROB_CAP = 0.5
CLUTTER_MAX_RANGE = 30.0             # m, backscatter happens close to the sensor

SUN_NOISE_SIGMA = 0.02               # extra range sigma (m) per sunlight level

WET_REFLECTIVITY_FACTOR = 0.9        # survey-sourced ~10 % reduction

# Detection threshold: a target of reflectivity DETECTION_RHO_MIN stays
# detectable at full range under the reference extinction, so clear weather
# at rho = 1 always survives.
DETECTION_RHO_MIN = 0.05
DETECTION_ALPHA_REF = 0.002          # 1/m


class LimitationCategory(Enum):
    OBSTRUCTING = "Ob"
    ATTENUATING_NOISE = "AN"
    OTHER = "Ot"


class Evidence(Enum):
    MENTION = "Mention"
    EXPERIMENTAL = "Experimental"
    BOTH = "Both"


@dataclass(frozen=True)
class LimitationEntry:
    index: int
    name: str
    category: LimitationCategory
    evidence: Evidence
    modeled: bool


_OB = LimitationCategory.OBSTRUCTING
_AN = LimitationCategory.ATTENUATING_NOISE
_OT = LimitationCategory.OTHER

_LIMITATIONS = (
    LimitationEntry(1, "Road dirt on sensor cover", _OB, Evidence.BOTH, True),
    LimitationEntry(2, "First detection close object", _OB, Evidence.EXPERIMENTAL, True),
    LimitationEntry(3, "Material/surfaces", _OB, Evidence.BOTH, True),
    LimitationEntry(4, "Wet roadway causes road spray", _AN, Evidence.EXPERIMENTAL, True),
    LimitationEntry(5, "Rain", _AN, Evidence.BOTH, True),
    LimitationEntry(6, "Fog/Mist/Haze", _AN, Evidence.BOTH, True),
    LimitationEntry(7, "Snow", _AN, Evidence.BOTH, True),
    LimitationEntry(8, "Dust", _AN, Evidence.MENTION, False),
    LimitationEntry(9, "Wavelength related", _AN, Evidence.EXPERIMENTAL, False),
    LimitationEntry(10, "Sunlight", _AN, Evidence.BOTH, True),
    LimitationEntry(11, "Temperature", _OT, Evidence.MENTION, False),
    LimitationEntry(12, "Vibrations", _OT, Evidence.MENTION, False),
    LimitationEntry(13, "Interference", _OT, Evidence.EXPERIMENTAL, False),
    LimitationEntry(14, "Remote attacks (imitating signal)", _OT, Evidence.EXPERIMENTAL, False),
)


def limitation_catalog() -> list[LimitationEntry]:
    """All fourteen catalogued limitations, in survey order."""
    return list(_LIMITATIONS)


class WeatherKind(Enum):
    CLEAR = "clear"
    RAIN = "rain"
    FOG = "fog"
    SNOW = "snow"
    SPRAY = "spray"
    SUNLIGHT = "sunlight"
    DIRT = "dirt"


class WavelengthClass(Enum):
    NM905 = "905nm"
    NM1550 = "1550nm"


@dataclass(frozen=True)
class WeatherCondition:
    """One environmental state.

    ``intensity`` is kind-specific: rain/snow rate in mm/h (water
    equivalent), fog meteorological visibility in meters, spray/sunlight a
    severity level in [0, 1]. ``dirt_sectors`` lists blocked sensor-frame
    azimuth intervals (lo, hi), each within [-pi, pi).
    """

    kind: WeatherKind
    intensity: float = 0.0
    wavelength_class: WavelengthClass = WavelengthClass.NM905
    dirt_sectors: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        k = self.kind
        if k in (WeatherKind.RAIN, WeatherKind.SNOW) and self.intensity < 0:
            raise ValueError(f"{k.value} rate must be >= 0, got {self.intensity}")
        if k is WeatherKind.FOG and not self.intensity > 0:
            raise ValueError(f"fog visibility must be > 0, got {self.intensity}")
        if k in (WeatherKind.SPRAY, WeatherKind.SUNLIGHT) and not 0 <= self.intensity <= 1:
            raise ValueError(f"{k.value} level must be in [0, 1], got {self.intensity}")
        for lo, hi in self.dirt_sectors:
            if not (-math.pi <= lo <= hi < math.pi):
                raise ValueError(f"dirt sector ({lo}, {hi}) must satisfy -pi <= lo <= hi < pi")
        if self.dirt_sectors and k is not WeatherKind.DIRT:
            raise ValueError("dirt_sectors only valid with kind='dirt'")

    @classmethod
    def clear(cls, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.CLEAR, 0.0, wavelength)

    @classmethod
    def rain(cls, rate: float, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.RAIN, rate, wavelength)

    @classmethod
    def fog(cls, visibility: float, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.FOG, visibility, wavelength)

    @classmethod
    def snow(cls, rate: float, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.SNOW, rate, wavelength)

    @classmethod
    def spray(cls, level: float, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.SPRAY, level, wavelength)

    @classmethod
    def sunlight(cls, level: float, wavelength: WavelengthClass = WavelengthClass.NM905) -> "WeatherCondition":
        return cls(WeatherKind.SUNLIGHT, level, wavelength)

    @classmethod
    def dirt(
        cls,
        sectors: tuple[tuple[float, float], ...],
        wavelength: WavelengthClass = WavelengthClass.NM905,
    ) -> "WeatherCondition":
        return cls(WeatherKind.DIRT, 0.0, wavelength, tuple(sectors))


def wet_surface_reflectivity(rho: float) -> float:
    """Effective reflectivity of a wet surface (survey-sourced ~10 % loss)."""
    if not 0 < rho <= 1:
        raise ValueError(f"reflectivity must be in (0, 1], got {rho}")
    return WET_REFLECTIVITY_FACTOR * rho


def extinction_coefficient(cond: WeatherCondition) -> float:
    """Two-way optical extinction rate alpha (1/m) for a condition."""
    k = cond.kind
    if k is WeatherKind.FOG:
        return KOSCHMIEDER / cond.intensity
    if k is WeatherKind.RAIN:
        alpha = RAIN_EXTINCTION_COEFF * cond.intensity**RAIN_EXTINCTION_EXP
    elif k is WeatherKind.SNOW:
        return SNOW_EXTINCTION_COEFF * cond.intensity**SNOW_EXTINCTION_EXP
    elif k is WeatherKind.SPRAY:
        alpha = SPRAY_EXTINCTION_COEFF * cond.intensity
    else:
        return 0.0
    if cond.wavelength_class is WavelengthClass.NM1550:
        alpha *= NM1550_RAIN_FACTOR
    return alpha


def detection_threshold(spec: SensorSpec) -> float:
    """Minimum surviving power fraction for this sensor's range budget."""
    return DETECTION_RHO_MIN * math.exp(-2.0 * DETECTION_ALPHA_REF * spec.max_range)


def clutter_probability(cond: WeatherCondition) -> float:
    """Per-beam probability of a backscatter return replacing/inserting one."""
    k = cond.kind
    if k is WeatherKind.RAIN:
        p = CLUTTER_COEFF_RAIN * cond.intensity
    elif k is WeatherKind.SNOW:
        p = CLUTTER_COEFF_SNOW * cond.intensity
    elif k is WeatherKind.SPRAY:
        p = CLUTTER_COEFF_SPRAY * cond.intensity
    elif k is WeatherKind.SUNLIGHT:
        p = CLUTTER_COEFF_SUN * cond.intensity
    else:
        return 0.0
    return min(CLUTTER_PROB_CAP, p)


def _in_dirt_sector(azimuths: np.ndarray, sectors) -> np.ndarray:
    wrapped = np.array([normalize_angle(a) for a in azimuths])
    blocked = np.zeros(azimuths.shape, dtype=bool)
    for lo, hi in sectors:
        blocked |= (wrapped >= lo) & (wrapped <= hi)
    return blocked


def apply_weather(
    cloud: PointCloud,
    cond: WeatherCondition,
    spec: SensorSpec,
    world: WorldModel,
    pose: Pose2D,
    seed: int,
) -> PerturbedCloud:
    """Degrade a clean scan; beam count and azimuths are preserved.

    Per beam, in physical pipeline order: (1) sensor-cover obstruction drops
    beams in dirt sectors outright; (2) a hit at range d with effective
    target reflectivity rho survives iff rho * exp(-2 alpha d) clears the
    detection threshold, else the beam is dropped; (3) with the kind's
    clutter probability the beam's return is replaced/inserted by a
    backscatter return closer than both the original target and
    CLUTTER_MAX_RANGE; (4) sunlight inflates range noise on surviving
    genuine returns. Clear over a dry surface is the exact identity.

    Draws come from per-beam streams keyed (seed, frame_id, beam, stage), so
    outcomes at one intensity are comparable beam-for-beam across
    intensities under the same seed.
    """
    if cond.kind is WeatherKind.CLEAR and not world.surface_wet:
        return cloud.copy()

    n = len(cloud)
    beam_idx = np.arange(n)
    azimuths = cloud.azimuths
    ranges = cloud.ranges.copy()
    labels = cloud.labels.copy()

    # (1) obstruction: terminally blocked, no later stage applies
    if cond.kind is WeatherKind.DIRT and cond.dirt_sectors:
        blocked = _in_dirt_sector(azimuths, cond.dirt_sectors)
        ranges[blocked] = NO_RETURN
        labels[blocked] = Label.DROPPED
    else:
        blocked = np.zeros(n, dtype=bool)

    # (2) attenuation on hits: two-way power budget vs detection threshold
    alpha = extinction_coefficient(cond)
    hits = np.isfinite(ranges) & ~blocked
    if np.any(hits) and (alpha > 0.0 or world.surface_wet):
        world_angles = pose.heading + azimuths[hits]
        d = ranges[hits]
        ex = pose.x + d * np.cos(world_angles)
        ey = pose.y + d * np.sin(world_angles)
        rho = world.reflectivity_at(ex, ey)
        if world.surface_wet:
            rho = WET_REFLECTIVITY_FACTOR * rho
        survives = rho * np.exp(-2.0 * alpha * d) >= detection_threshold(spec)
        dropped = np.zeros(n, dtype=bool)
        dropped[hits] = ~survives
        ranges[dropped] = NO_RETURN
        labels[dropped] = Label.DROPPED

    # (3) clutter: backscatter before the (original) target
    p_c = clutter_probability(cond)
    if p_c > 0.0:
        u = rng.uniforms(seed, cloud.frame_id, beam_idx, rng.Stage.CLUTTER, 2)
        original = np.where(np.isfinite(cloud.ranges), cloud.ranges, spec.max_range)
        upper = np.minimum(original, CLUTTER_MAX_RANGE)
        upper = np.maximum(upper, spec.min_range)
        cluttered = (u[:, 0] < p_c) & ~blocked
        ranges[cluttered] = spec.min_range + u[cluttered, 1] * (upper[cluttered] - spec.min_range)
        labels[cluttered] = Label.CLUTTER

    # (4) sunlight inflates receiver noise on surviving genuine returns
    if cond.kind is WeatherKind.SUNLIGHT and cond.intensity > 0.0:
        sigma_extra = SUN_NOISE_SIGMA * cond.intensity
        z = rng.normals(seed, cloud.frame_id, beam_idx, rng.Stage.SUN_NOISE, 1)[:, 0]
        genuine = (labels == Label.GENUINE) & np.isfinite(ranges)
        upper_r = spec.max_range + 3.0 * (spec.range_accuracy_sigma + sigma_extra)
        ranges[genuine] = np.clip(
            ranges[genuine] + sigma_extra * z[genuine], spec.min_range, upper_r
        )

    return PointCloud(cloud.frame_id, cloud.timestamp, azimuths.copy(), ranges, labels)
