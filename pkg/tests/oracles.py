"""Independent reference implementations used to cross-check the package.

Nothing here imports the production geometry or statistics code paths for
its math: rotations are built with the Rodrigues formula instead of
matrix composition, projection solves a ray-intersection system instead
of applying intrinsic/extrinsic matrices, fill ratios are rasterized,
and the divergence is a direct pure-Python transcription of the formula.
"""

import math

import numpy as np


def rotate_about(v: np.ndarray, axis: np.ndarray,
                 angle_deg: float) -> np.ndarray:
    """Rodrigues rotation of v about a unit axis by angle_deg."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    v = np.asarray(v, dtype=float)
    theta = math.radians(angle_deg)
    return (v * math.cos(theta) + np.cross(k, v) * math.sin(theta)
            + k * float(np.dot(k, v)) * (1.0 - math.cos(theta)))


def camera_axes(yaw_deg: float, pitch_deg: float,
                roll_deg: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Camera axis triad in world coordinates via sequential rotations.

    Start from the zero-attitude triad (forward toward the runway, right
    wing, down) and rotate about the *current* axes: yaw about down,
    pitch about the new right, roll about the new forward.  Returns
    (camera X = right, camera Y = down, camera Z = forward).
    """
    forward = np.array([-1.0, 0.0, 0.0])
    right = np.array([0.0, 1.0, 0.0])
    down = np.array([0.0, 0.0, -1.0])

    forward, right = (rotate_about(forward, down, yaw_deg),
                      rotate_about(right, down, yaw_deg))
    forward, down = (rotate_about(forward, right, pitch_deg),
                     rotate_about(down, right, pitch_deg))
    right, down = (rotate_about(right, forward, roll_deg),
                   rotate_about(down, forward, roll_deg))
    return right, down, forward


def project_points(center: np.ndarray, yaw_deg: float, pitch_deg: float,
                   roll_deg: float, points: np.ndarray, focal_px: float,
                   cx: float, cy: float) -> tuple[np.ndarray, np.ndarray]:
    """Ray-intersection projection of world points.

    For each point P solve a*X_c + b*Y_c + Z_c = s*(P - C) for (a, b, s):
    the ray through pixel offset (a, b) hits P iff the system holds, and
    the point lies in front of the camera iff s > 0 (camera depth is
    1/s).  Returns (pixels (N, 2) with NaN behind the camera, depths).
    """
    x_c, y_c, z_c = camera_axes(yaw_deg, pitch_deg, roll_deg)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    m = np.empty((n, 3, 3))
    m[:, :, 0] = x_c
    m[:, :, 1] = y_c
    m[:, :, 2] = -(points - np.asarray(center, dtype=float))
    rhs = np.tile(-z_c, (n, 1))
    sol = np.linalg.solve(m, rhs[..., None])[..., 0]
    a, b, s = sol[:, 0], sol[:, 1], sol[:, 2]
    with np.errstate(divide="ignore"):
        depths = 1.0 / s
    pixels = np.stack([cx + focal_px * a, cy + focal_px * b], axis=1)
    pixels[s <= 0] = np.nan
    return pixels, depths


def raster_fill_ratio(corners: np.ndarray, resolution: int = 400) -> float:
    """Fill ratio estimated by counting rasterized samples in the quad."""
    from matplotlib.path import Path

    corners = np.asarray(corners, dtype=float)
    x_min, y_min = corners.min(axis=0)
    x_max, y_max = corners.max(axis=0)
    xs = np.linspace(x_min, x_max, resolution, endpoint=False)
    ys = np.linspace(y_min, y_max, resolution, endpoint=False)
    dx = (x_max - x_min) / resolution
    dy = (y_max - y_min) / resolution
    gx, gy = np.meshgrid(xs + dx / 2, ys + dy / 2)
    samples = np.stack([gx.ravel(), gy.ravel()], axis=1)
    inside = Path(corners).contains_points(samples)
    return float(inside.mean())


def triangle_area(a, b, c) -> float:
    return 0.5 * abs((b[0] - a[0]) * (c[1] - a[1])
                     - (b[1] - a[1]) * (c[0] - a[0]))


def quad_area_by_triangles(corners: np.ndarray) -> float:
    """Area of a convex quad as two triangles (independent of shoelace)."""
    a, b, c, d = [tuple(p) for p in np.asarray(corners, dtype=float)]
    return triangle_area(a, b, c) + triangle_area(a, c, d)


def geodetic_inverse(lat: float, lon: float, alt: float, lat0: float,
                     lon0: float, elev0: float,
                     heading_deg: float) -> tuple[float, float, float]:
    """Invert the flat-earth conversion back to runway-frame meters."""
    meters_per_deg = 1852.0 * 60.0
    north = (lat - lat0) * meters_per_deg
    east = (lon - lon0) * meters_per_deg * math.cos(math.radians(lat0))
    h = math.radians(heading_deg)
    x = -north * math.cos(h) - east * math.sin(h)
    y = -north * math.sin(h) + east * math.cos(h)
    return x, y, alt - elev0


def brute_jsd(p, q) -> float:
    """Direct transcription of the Jensen-Shannon definition in nats."""
    p = [float(v) for v in p]
    q = [float(v) for v in q]
    sp, sq = sum(p), sum(q)
    p = [v / sp for v in p]
    q = [v / sq for v in q]
    total = 0.0
    for pi, qi in zip(p, q):
        mi = 0.5 * (pi + qi)
        if pi > 0:
            total += 0.5 * pi * math.log(pi / mi)
        if qi > 0:
            total += 0.5 * qi * math.log(qi / mi)
    return total
