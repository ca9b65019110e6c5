import numpy as np
import pytest

from odd_forge.dataset_io import DatasetSplit, make_synthetic_record
from odd_forge.geometry import CameraModel, Georef, RunwayGeometry
from odd_forge.odd_spec import ApproachCone, OddSpec, Pose


def make_fleet(n: int = 12) -> list[RunwayGeometry]:
    """Virtual runways with varied dimensions, one airport each."""
    lengths = np.linspace(2400.0, 4000.0, n)
    widths = np.linspace(45.0, 60.0, n)
    return [
        RunwayGeometry(
            id=f"VR{i:02d}-{(i * 3) % 36:02d}",
            airport=f"VA{i:02d}",
            length_m=float(lengths[i]),
            width_m=float(widths[i]),
            georef=Georef(lat_deg=40.0 + i, lon_deg=-3.0 + 0.5 * i,
                          elevation_m=100.0 + 10.0 * i,
                          heading_deg=float((i * 33) % 360)),
        )
        for i in range(n)
    ]


def nominal_poses(rng: np.random.Generator, count: int,
                  cone: ApproachCone) -> list[Pose]:
    """In-cone poses with calm-approach attitude jitter.

    Position parameters sweep their full ranges; yaw and roll stay within
    a degree or so of runway-aligned flight and pitch tracks the vertical
    path, the way a stabilized approach flies.
    """
    bounds = cone.canonical_bounds()
    d = rng.uniform(bounds["along_track"].lo, bounds["along_track"].hi, count)
    lat = rng.uniform(bounds["lateral_path"].lo, bounds["lateral_path"].hi,
                      count)
    vert = rng.uniform(bounds["vertical_path"].lo,
                       bounds["vertical_path"].hi, count)
    yaw = rng.uniform(-1.0, 1.0, count)
    pitch = np.clip(vert + rng.uniform(-0.5, 0.5, count),
                    bounds["pitch"].lo, bounds["pitch"].hi)
    roll = rng.uniform(-1.5, 1.5, count)
    return [Pose(along_track_m=float(d[i]), lateral_path_deg=float(lat[i]),
                 vertical_path_deg=float(vert[i]), yaw_deg=float(yaw[i]),
                 pitch_deg=float(pitch[i]), roll_deg=float(roll[i]))
            for i in range(count)]


def nominal_records(fleet, camera, per_runway: int, seed: int = 1000):
    """Fully visible synthetic records across the fleet."""
    cone = ApproachCone.generic()
    records = []
    for k, runway in enumerate(fleet):
        rng = np.random.Generator(np.random.Philox(key=seed + k))
        for i, pose in enumerate(nominal_poses(rng, per_runway, cone)):
            record = make_synthetic_record(f"{runway.id}_{i:05d}", pose,
                                           runway, camera)
            if record.label.fully_visible:
                records.append(record)
    return records


def split_even_odd(records):
    return (DatasetSplit("train", tuple(records[0::2])),
            DatasetSplit("test", tuple(records[1::2])))


@pytest.fixture(scope="session")
def cone() -> ApproachCone:
    return ApproachCone.generic()


@pytest.fixture(scope="session")
def odd_v1(cone) -> OddSpec:
    return OddSpec(version=1, cone=cone)


@pytest.fixture(scope="session")
def camera() -> CameraModel:
    return CameraModel.default()


@pytest.fixture(scope="session")
def fleet() -> list[RunwayGeometry]:
    return make_fleet()


@pytest.fixture(scope="session")
def runway(fleet) -> RunwayGeometry:
    return fleet[0]


@pytest.fixture(scope="session")
def mini_records(fleet, camera):
    """Small nominal dataset shared by module tests (about 550 records)."""
    return nominal_records(fleet, camera, per_runway=48, seed=7000)


@pytest.fixture(scope="session")
def mini_splits(mini_records):
    return split_even_odd(mini_records)
