"""Deterministic pose sampling and approach trajectory generation.

Sampling uses a counter-based generator (Philox) keyed on the seed, so a
given (spec, config) pair always produces the same poses regardless of
platform or call history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GenerationError, InvalidInputError
from .geometry import CartesianPose, Georef
from .odd_spec import CONE_PARAMETERS, ApproachCone, Pose, contains

# One nautical mile is one arc-minute of latitude on the sphere used for
# local flat-earth conversion: 1852 * 60 meters per degree.
METERS_PER_DEG_LAT = 111120.0

NOMINAL = "nominal"
CRAB_DECRAB = "crab_decrab"


@dataclass(frozen=True)
class SamplingConfig:
    """How to draw poses from a cone.

    ``strategy`` is "uniform" (independent uniform draws per parameter) or
    "stratified" (an even grid of cells visited in a seeded random order,
    cycling when the count exceeds the cell count, one uniform jitter
    inside each visited cell).  ``strata`` gives the per-parameter cell
    counts for the stratified strategy.
    """

    count: int
    seed: int = 0
    strategy: str = "uniform"
    strata: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.strategy not in ("uniform", "stratified"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "stratified":
            if self.strata is None:
                object.__setattr__(self, "strata", (4,) * len(CONE_PARAMETERS))
            if (len(self.strata) != len(CONE_PARAMETERS)
                    or any(s < 1 for s in self.strata)):
                raise ValueError("strata needs one count >= 1 per parameter")


@dataclass(frozen=True)
class ScenarioKind:
    """Trajectory shape selector.

    ``crab_decrab`` holds a constant crab yaw until ``decrab_start_m``,
    then blends linearly (in along-track distance) to zero yaw at the cone
    minimum; ``nominal`` keeps the entry attitude throughout.
    """

    name: str
    crab_yaw_deg: float | None = None
    decrab_start_m: float | None = None

    def __post_init__(self):
        if self.name not in (NOMINAL, CRAB_DECRAB):
            raise ValueError(f"unknown scenario kind {self.name!r}")
        if self.name == CRAB_DECRAB:
            if self.crab_yaw_deg is None or self.decrab_start_m is None:
                raise ValueError("crab_decrab needs crab_yaw_deg and "
                                 "decrab_start_m")

    @classmethod
    def nominal(cls) -> "ScenarioKind":
        return cls(NOMINAL)

    @classmethod
    def crab_decrab(cls, crab_yaw_deg: float,
                    decrab_start_m: float) -> "ScenarioKind":
        return cls(CRAB_DECRAB, crab_yaw_deg, decrab_start_m)


@dataclass(frozen=True)
class Trajectory:
    """An ordered run of poses with a fixed time step between frames."""

    frames: tuple[Pose, ...]
    frame_interval_s: float
    scenario: ScenarioKind

    def __post_init__(self):
        if len(self.frames) < 2:
            raise ValueError("a trajectory needs at least two frames")
        if not self.frame_interval_s > 0:
            raise ValueError("frame_interval_s must be positive")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def sample_cone(cone: ApproachCone, config: SamplingConfig) -> list[Pose]:
    """Draw poses from the cone according to the configured strategy.

    Every returned pose lies inside the cone by construction; the draw
    order is deterministic in the seed.
    """
    bounds = cone.canonical_bounds()
    lows = np.array([bounds[n].lo for n in CONE_PARAMETERS])
    highs = np.array([bounds[n].hi for n in CONE_PARAMETERS])
    rng = _rng(config.seed)
    jitter = rng.random((config.count, len(CONE_PARAMETERS)))

    if config.strategy == "uniform":
        values = lows + jitter * (highs - lows)
    else:
        strata = np.array(config.strata, dtype=float)
        n_cells = int(np.prod(config.strata))
        # a seeded permutation spreads partial grids across the whole
        # cone instead of filling a corner when count < n_cells
        visit_order = rng.permutation(n_cells)
        flat = visit_order[np.arange(config.count) % n_cells]
        cell_idx = np.empty((config.count, len(CONE_PARAMETERS)))
        for axis in range(len(CONE_PARAMETERS) - 1, -1, -1):
            cell_idx[:, axis] = flat % config.strata[axis]
            flat = flat // config.strata[axis]
        values = lows + (cell_idx + jitter) / strata * (highs - lows)

    # guard the closed-interval invariant against rounding at the edges
    values = np.clip(values, lows, highs)
    by_name = {name: values[:, i] for i, name in enumerate(CONE_PARAMETERS)}
    return [Pose(along_track_m=float(by_name["along_track"][i]),
                 lateral_path_deg=float(by_name["lateral_path"][i]),
                 vertical_path_deg=float(by_name["vertical_path"][i]),
                 yaw_deg=float(by_name["yaw"][i]),
                 pitch_deg=float(by_name["pitch"][i]),
                 roll_deg=float(by_name["roll"][i]))
            for i in range(config.count)]


def generate_trajectory(entry: Pose, frames: int, kind: ScenarioKind,
                        cone: ApproachCone | None = None,
                        frame_interval_s: float = 1.0) -> Trajectory:
    """Build an approach trajectory from an entry pose down the cone.

    Along-track distance decreases linearly from the entry to the cone's
    minimum; path angles and pitch hold their entry values.  Every frame
    is validated against the cone and the first violation aborts with the
    offending frame and parameter named.
    """
    if frames < 2:
        raise InvalidInputError("frames must be >= 2")
    cone = cone if cone is not None else ApproachCone.generic()
    bounds = cone.canonical_bounds()
    if not contains(cone, entry):
        violated = [name for name in CONE_PARAMETERS
                    if not bounds[name].contains(entry.value(name))]
        raise GenerationError(
            f"entry pose lies outside the cone on {', '.join(violated)}",
            frame=0, parameter=violated[0] if violated else None)
    d_entry = entry.along_track_m
    d_end = bounds["along_track"].lo
    if not d_entry > d_end:
        raise GenerationError(
            f"entry along-track {d_entry} m does not exceed the cone "
            f"minimum {d_end} m", frame=0, parameter="along_track")

    distances = np.linspace(d_entry, d_end, frames)
    if kind.name == CRAB_DECRAB:
        start = float(kind.decrab_start_m)
        crab = float(kind.crab_yaw_deg)
        if start <= d_end:
            raise GenerationError(
                f"decrab start {start} m must exceed the cone minimum "
                f"{d_end} m", parameter="along_track")
        ramp = np.clip((distances - d_end) / (start - d_end), 0.0, 1.0)
        yaws = crab * ramp
    else:
        yaws = np.full(frames, entry.yaw_deg)

    out: list[Pose] = []
    for i, (d, yaw) in enumerate(zip(distances, yaws)):
        pose = Pose(
            along_track_m=float(d),
            lateral_path_deg=entry.lateral_path_deg,
            vertical_path_deg=entry.vertical_path_deg,
            yaw_deg=float(yaw),
            pitch_deg=entry.pitch_deg,
            roll_deg=entry.roll_deg,
        )
        for name in CONE_PARAMETERS:
            if not bounds[name].contains(pose.value(name)):
                raise GenerationError(
                    f"frame {i}: parameter {name} = {pose.value(name):.4f} "
                    f"outside [{bounds[name].lo}, {bounds[name].hi}]",
                    frame=i, parameter=name)
        out.append(pose)
    return Trajectory(tuple(out), frame_interval_s, kind)


def to_geodetic(cpose: CartesianPose,
                georef: Georef) -> tuple[float, float, float]:
    """Flat-earth conversion of a world-frame position to (lat, lon, alt).

    The runway heading rotates world axes into north/east; longitude
    scaling uses the cosine of the reference latitude.  Valid for the few
    kilometers an approach cone spans, not for global use.
    """
    if georef is None:
        raise ConfigurationError("runway has no georeference")
    heading = math.radians(georef.heading_deg)
    north = -cpose.x_m * math.cos(heading) - cpose.y_m * math.sin(heading)
    east = -cpose.x_m * math.sin(heading) + cpose.y_m * math.cos(heading)
    lat = georef.lat_deg + north / METERS_PER_DEG_LAT
    lon = georef.lon_deg + east / (
        METERS_PER_DEG_LAT * math.cos(math.radians(georef.lat_deg)))
    alt = georef.elevation_m + cpose.z_m
    return lat, lon, alt
