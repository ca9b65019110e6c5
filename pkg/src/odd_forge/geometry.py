"""Pinhole projection of runway geometry into the camera image.

Frame conventions, used everywhere in this package:

* Runway (world) frame: origin at the aiming point on the centerline,
  X positive toward the approaching aircraft, Y to the right as seen by
  that aircraft, Z up.  The runway surface is the z = 0 plane and the
  threshold lies at x = aiming_point_offset_m.
* Body frame at zero attitude: X forward (toward the runway, i.e. world
  -X), Y right (world +Y), Z down (world -Z).  Attitude is applied as
  intrinsic yaw (about body Z), then pitch (about the new Y), then roll
  (about the new X).  Positive yaw turns the nose right, positive pitch
  raises it, positive roll drops the right wing.
* Camera frame: boresight along body X, so camera Z points forward,
  X right, Y down; pixels have u right and v down with the origin at the
  top-left corner.

With this layout a pose whose pitch equals its vertical path angle puts
the aiming point exactly on the boresight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidLabelError
from .odd_spec import Pose

DEFAULT_MARGIN_PX = 5.0

# Zero-attitude body axes expressed in the world frame (columns X, Y, Z).
_R_WORLD_BODY0 = np.array([
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, -1.0],
])

# Camera axes expressed in the body frame (columns X, Y, Z): camera X is
# body Y, camera Y is body Z, camera Z is body X.
_R_BODY_CAMERA = np.array([
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
])


@dataclass(frozen=True)
class Georef:
    """Geodetic anchor for a runway: aiming point position and true heading."""

    lat_deg: float
    lon_deg: float
    elevation_m: float
    heading_deg: float


@dataclass(frozen=True)
class RunwayGeometry:
    """Physical runway model: a rectangle with an aiming point on its axis.

    The aiming point sits ``aiming_point_offset_m`` beyond the landing
    threshold (300 m for a standard precision approach marking).  A zero
    offset is degenerate but tolerated so thresholds themselves can be
    modelled.
    """

    id: str
    length_m: float
    width_m: float
    aiming_point_offset_m: float = 300.0
    airport: str = ""
    georef: Georef | None = None

    def __post_init__(self):
        if not self.width_m > 0:
            raise ValueError("width_m must be positive")
        if not self.length_m > self.aiming_point_offset_m >= 0:
            raise ValueError(
                "need length_m > aiming_point_offset_m >= 0, got "
                f"{self.length_m} and {self.aiming_point_offset_m}")


@dataclass(frozen=True)
class CartesianPose:
    """Camera position in the world frame plus attitude angles (degrees)."""

    x_m: float
    y_m: float
    z_m: float
    yaw_deg: float
    pitch_deg: float
    roll_deg: float


@dataclass(frozen=True)
class CameraModel:
    """Square-pixel pinhole camera with a horizontal crop band.

    Rows above ``crop_top_px`` and below ``height_px - crop_bottom_px``
    are discarded by the capture pipeline; a label is only fully visible
    when the runway stays inside the remaining band.
    """

    width_px: int
    height_px: int
    focal_px: float
    cx: float
    cy: float
    crop_top_px: int = 0
    crop_bottom_px: int = 0

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("image dimensions must be positive")
        if not self.focal_px > 0:
            raise ValueError("focal_px must be positive")
        if not (0 <= self.cx <= self.width_px and 0 <= self.cy <= self.height_px):
            raise ValueError("principal point outside the image")
        if self.crop_top_px < 0 or self.crop_bottom_px < 0:
            raise ValueError("crop bands must be non-negative")
        if self.crop_top_px + self.crop_bottom_px >= self.height_px:
            raise ValueError("crop bands leave no visible rows")

    @classmethod
    def default(cls) -> "CameraModel":
        """2448 x 2048 sensor, 1400 px focal, 300 px sky/ground crops."""
        return cls(width_px=2448, height_px=2048, focal_px=1400.0,
                   cx=1224.0, cy=1024.0, crop_top_px=300, crop_bottom_px=300)

    @property
    def visible_v_range(self) -> tuple[float, float]:
        return float(self.crop_top_px), float(self.height_px - self.crop_bottom_px)


@dataclass(frozen=True)
class ImageLabel:
    """Projected runway annotation for one image.

    ``corners`` are pixel (u, v) pairs ordered near-left, near-right,
    far-right, far-left as seen by the approaching aircraft.  Corners that
    fall behind the camera are recorded as NaN and force
    ``fully_visible = False``; the bbox is NaN in that case too.
    """

    corners: tuple[tuple[float, float], ...]
    bbox: tuple[float, float, float, float]
    fully_visible: bool
    margin_px: float

    def __post_init__(self):
        if len(self.corners) != 4:
            raise ValueError("a runway label has exactly four corners")


def to_cartesian(pose: Pose) -> CartesianPose:
    """Convert a cone-parameterized pose to world coordinates.

    The camera sits at distance d = along_track up the approach, offset
    laterally by d*tan(lateral) and vertically by d*tan(-vertical); the
    attitude angles carry over unchanged.
    """
    if abs(pose.lateral_path_deg) >= 90 or abs(pose.vertical_path_deg) >= 90:
        raise InvalidInputError("path angles must lie strictly inside +-90 deg")
    d = pose.along_track_m
    return CartesianPose(
        x_m=d,
        y_m=d * math.tan(math.radians(pose.lateral_path_deg)),
        z_m=d * math.tan(math.radians(-pose.vertical_path_deg)),
        yaw_deg=pose.yaw_deg,
        pitch_deg=pose.pitch_deg,
        roll_deg=pose.roll_deg,
    )


def slant_distance(cpose: CartesianPose) -> float:
    """Straight-line distance from the camera to the aiming point."""
    return math.sqrt(cpose.x_m ** 2 + cpose.y_m ** 2 + cpose.z_m ** 2)


def runway_corners_world(runway: RunwayGeometry) -> np.ndarray:
    """The four runway corners in the world frame, shape (4, 3).

    Order: near-left, near-right, far-right, far-left.  The near edge is
    the landing threshold at x = offset; the far edge sits at
    x = offset - length.
    """
    x_near = runway.aiming_point_offset_m
    x_far = x_near - runway.length_m
    half_w = runway.width_m / 2.0
    return np.array([
        [x_near, -half_w, 0.0],
        [x_near, half_w, 0.0],
        [x_far, half_w, 0.0],
        [x_far, -half_w, 0.0],
    ])


def _rotation_world_camera(cpose: CartesianPose) -> np.ndarray:
    yaw = math.radians(cpose.yaw_deg)
    pitch = math.radians(cpose.pitch_deg)
    roll = math.radians(cpose.roll_deg)
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return _R_WORLD_BODY0 @ rz @ ry @ rx @ _R_BODY_CAMERA


def extrinsic_matrix(cpose: CartesianPose) -> np.ndarray:
    """4x4 rigid transform taking world coordinates to camera coordinates."""
    r_wc = _rotation_world_camera(cpose)
    center = np.array([cpose.x_m, cpose.y_m, cpose.z_m])
    out = np.eye(4)
    out[:3, :3] = r_wc.T
    out[:3, 3] = -r_wc.T @ center
    return out


def intrinsic_matrix(camera: CameraModel) -> np.ndarray:
    """3x3 pinhole intrinsics with square pixels and no skew."""
    return np.array([
        [camera.focal_px, 0.0, camera.cx],
        [0.0, camera.focal_px, camera.cy],
        [0.0, 0.0, 1.0],
    ])


def project_points(points_world: np.ndarray, cpose: CartesianPose,
                   camera: CameraModel) -> tuple[np.ndarray, np.ndarray]:
    """Project world points; returns (pixels (N, 2), depths (N,)).

    Points at or behind the camera plane (depth <= 0) come back as NaN
    pixels; callers decide how to treat them.
    """
    points_world = np.asarray(points_world, dtype=float)
    extr = extrinsic_matrix(cpose)
    cam_pts = points_world @ extr[:3, :3].T + extr[:3, 3]
    depths = cam_pts[:, 2]
    k = intrinsic_matrix(camera)
    with np.errstate(divide="ignore", invalid="ignore"):
        homo = cam_pts @ k.T
        pixels = homo[:, :2] / homo[:, 2:3]
    pixels = np.where(depths[:, None] > 0, pixels, np.nan)
    return pixels, depths


def bounding_box(corners: np.ndarray, margin_px: float,
                 camera: CameraModel) -> tuple[float, float, float, float]:
    """Axis-aligned box around the corners, margin-expanded then clamped.

    Clamping uses the full sensor width but the cropped row band, matching
    what the stored image actually contains.
    """
    if margin_px < 0:
        raise InvalidInputError("margin_px must be non-negative")
    corners = np.asarray(corners, dtype=float)
    if not np.all(np.isfinite(corners)):
        return (math.nan, math.nan, math.nan, math.nan)
    v_lo, v_hi = camera.visible_v_range
    x_min = max(float(corners[:, 0].min()) - margin_px, 0.0)
    y_min = max(float(corners[:, 1].min()) - margin_px, v_lo)
    x_max = min(float(corners[:, 0].max()) + margin_px, float(camera.width_px))
    y_max = min(float(corners[:, 1].max()) + margin_px, v_hi)
    return (x_min, y_min, x_max, y_max)


def project_runway(pose: Pose, runway: RunwayGeometry, camera: CameraModel,
                   margin_px: float = DEFAULT_MARGIN_PX) -> ImageLabel:
    """Project the runway rectangle for one pose into an image label.

    The label is fully visible only if all four corners have positive
    depth and land inside the cropped sensor area.  Corners behind the
    camera are NaN and the bbox degenerates to NaN as well.
    """
    cpose = to_cartesian(pose)
    pixels, depths = project_points(runway_corners_world(runway), cpose, camera)
    in_front = bool(np.all(depths > 0))
    v_lo, v_hi = camera.visible_v_range
    if in_front:
        u, v = pixels[:, 0], pixels[:, 1]
        on_sensor = bool(np.all((u >= 0) & (u <= camera.width_px)
                                & (v >= v_lo) & (v <= v_hi)))
    else:
        on_sensor = False
    bbox = bounding_box(pixels, margin_px, camera)
    corners = tuple((float(p[0]), float(p[1])) for p in pixels)
    return ImageLabel(corners=corners, bbox=bbox,
                      fully_visible=in_front and on_sensor,
                      margin_px=float(margin_px))


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def quad_area(corners: np.ndarray) -> float:
    """Shoelace area of the corner polygon in pixel^2."""
    corners = np.asarray(corners, dtype=float)
    x, y = corners[:, 0], corners[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def fill_ratio(corners: np.ndarray,
               bbox: tuple[float, float, float, float] | None = None) -> float:
    """Fraction of the bbox covered by the corner quadrilateral.

    When ``bbox`` is omitted the tight (zero-margin) hull of the corners
    is used, which is the definition the quality checks rely on.
    """
    corners = np.asarray(corners, dtype=float)
    if corners.shape != (4, 2) or not np.all(np.isfinite(corners)):
        raise InvalidLabelError("need four finite corners")
    pts = [tuple(p) for p in corners]
    if (_segments_cross(pts[0], pts[1], pts[2], pts[3])
            or _segments_cross(pts[1], pts[2], pts[3], pts[0])):
        raise InvalidLabelError("corner polygon is self-intersecting")
    if bbox is None:
        bbox = (float(corners[:, 0].min()), float(corners[:, 1].min()),
                float(corners[:, 0].max()), float(corners[:, 1].max()))
    box_area = (bbox[2] - bbox[0]) * (bbox[3] - bbox[1])
    if not box_area > 0:
        raise InvalidLabelError("bbox area must be positive")
    return quad_area(corners) / box_area


def aspect_ratio(bbox: tuple[float, float, float, float]) -> float:
    """Height over width of a bbox; raises on zero width."""
    width = bbox[2] - bbox[0]
    height = bbox[3] - bbox[1]
    if not width > 0:
        raise InvalidLabelError("bbox width must be positive")
    return height / width


def bbox_area(bbox: tuple[float, float, float, float]) -> float:
    return max(bbox[2] - bbox[0], 0.0) * max(bbox[3] - bbox[1], 0.0)
