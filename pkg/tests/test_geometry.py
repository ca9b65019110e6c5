import math

import numpy as np
import pytest

import oracles
from odd_forge.errors import InvalidInputError, InvalidLabelError
from odd_forge.geometry import (CameraModel, CartesianPose, ImageLabel,
                                RunwayGeometry, aspect_ratio, bbox_area,
                                bounding_box, extrinsic_matrix, fill_ratio,
                                intrinsic_matrix, project_points,
                                project_runway, quad_area,
                                runway_corners_world, slant_distance,
                                to_cartesian)
from odd_forge.odd_spec import Pose


def random_cone_poses(rng, count):
    """Full-attitude-range poses, distances kept clear of the runway."""
    out = []
    for _ in range(count):
        out.append(Pose(
            along_track_m=float(rng.uniform(400.0, 5556.0)),
            lateral_path_deg=float(rng.uniform(-4.0, 4.0)),
            vertical_path_deg=float(rng.uniform(-3.8, -2.2)),
            yaw_deg=float(rng.uniform(-10.0, 10.0)),
            pitch_deg=float(rng.uniform(-8.0, 0.0)),
            roll_deg=float(rng.uniform(-10.0, 10.0)),
        ))
    return out


class TestToCartesian:
    def test_frozen_lateral_offset(self):
        cpose = to_cartesian(Pose(1000.0, 3.0, -2.2, 0.0, 0.0, 0.0))
        assert cpose.y_m == pytest.approx(52.40778, abs=1e-5)

    def test_frozen_vertical_offset(self):
        cpose = to_cartesian(Pose(1000.0, 0.0, -4.0, 0.0, 0.0, 0.0))
        assert cpose.z_m == pytest.approx(69.92681, abs=1e-5)
        assert cpose.x_m == 1000.0

    def test_descending_path_means_positive_altitude(self):
        cpose = to_cartesian(Pose(2000.0, -1.0, -3.0, 0.0, 0.0, 0.0))
        assert cpose.z_m > 0
        assert cpose.y_m < 0

    def test_attitude_carries_over(self):
        cpose = to_cartesian(Pose(800.0, 0.0, -3.0, 5.0, -2.0, 7.0))
        assert (cpose.yaw_deg, cpose.pitch_deg, cpose.roll_deg) == \
            (5.0, -2.0, 7.0)

    def test_path_angles_near_ninety_rejected(self):
        with pytest.raises(InvalidInputError):
            to_cartesian(Pose(1000.0, 90.0, -3.0, 0.0, 0.0, 0.0))

    def test_slant_distance_pythagorean(self):
        assert slant_distance(CartesianPose(300.0, 0.0, 400.0,
                                            0.0, 0.0, 0.0)) == 500.0

    def test_slant_exceeds_along_track(self):
        rng = np.random.Generator(np.random.Philox(key=21))
        for pose in random_cone_poses(rng, 50):
            cpose = to_cartesian(pose)
            assert slant_distance(cpose) >= pose.along_track_m


class TestRunwayCorners:
    def test_order_and_positions(self):
        runway = RunwayGeometry(id="XX-09", length_m=2400.0, width_m=60.0)
        corners = runway_corners_world(runway)
        np.testing.assert_allclose(corners, [
            [300.0, -30.0, 0.0],
            [300.0, 30.0, 0.0],
            [-2100.0, 30.0, 0.0],
            [-2100.0, -30.0, 0.0],
        ])

    def test_validation(self):
        with pytest.raises(ValueError):
            RunwayGeometry(id="r", length_m=200.0, width_m=45.0,
                           aiming_point_offset_m=300.0)
        with pytest.raises(ValueError):
            RunwayGeometry(id="r", length_m=2400.0, width_m=0.0)
        with pytest.raises(ValueError):
            RunwayGeometry(id="r", length_m=2400.0, width_m=45.0,
                           aiming_point_offset_m=-1.0)


class TestExtrinsics:
    def test_rotation_block_is_orthonormal(self):
        rng = np.random.Generator(np.random.Philox(key=22))
        for pose in random_cone_poses(rng, 30):
            extr = extrinsic_matrix(to_cartesian(pose))
            r = extr[:3, :3]
            np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
            assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)

    def test_camera_center_maps_to_camera_origin(self):
        cpose = CartesianPose(1200.0, -40.0, 70.0, 3.0, -5.0, 2.0)
        extr = extrinsic_matrix(cpose)
        center = np.array([cpose.x_m, cpose.y_m, cpose.z_m, 1.0])
        np.testing.assert_allclose(extr @ center, [0, 0, 0, 1], atol=1e-9)

    def test_matches_sequential_rotation_oracle(self):
        rng = np.random.Generator(np.random.Philox(key=23))
        for pose in random_cone_poses(rng, 60):
            cpose = to_cartesian(pose)
            extr = extrinsic_matrix(cpose)
            right, down, forward = oracles.camera_axes(
                pose.yaw_deg, pose.pitch_deg, pose.roll_deg)
            # rows of the extrinsic rotation are the camera axes in world
            np.testing.assert_allclose(extr[0, :3], right, atol=1e-12)
            np.testing.assert_allclose(extr[1, :3], down, atol=1e-12)
            np.testing.assert_allclose(extr[2, :3], forward, atol=1e-12)

    def test_zero_attitude_looks_down_the_approach(self):
        camera = CameraModel.default()
        pixels, depths = project_points(
            np.array([[0.0, 0.0, 0.0]]),
            CartesianPose(1000.0, 0.0, 0.0, 0.0, 0.0, 0.0), camera)
        np.testing.assert_allclose(pixels[0], [camera.cx, camera.cy],
                                   atol=1e-9)
        assert depths[0] == pytest.approx(1000.0)


class TestProjection:
    def test_matches_ray_intersection_oracle(self, camera):
        rng = np.random.Generator(np.random.Philox(key=24))
        points = rng.uniform([-2500, -200, 0], [500, 200, 50], size=(40, 3))
        for pose in random_cone_poses(rng, 40):
            cpose = to_cartesian(pose)
            pixels, depths = project_points(points, cpose, camera)
            center = np.array([cpose.x_m, cpose.y_m, cpose.z_m])
            ref_pixels, ref_depths = oracles.project_points(
                center, pose.yaw_deg, pose.pitch_deg, pose.roll_deg,
                points, camera.focal_px, camera.cx, camera.cy)
            front = depths > 0
            ref_front = ref_depths > 0
            np.testing.assert_array_equal(front, ref_front)
            np.testing.assert_allclose(pixels[front], ref_pixels[front],
                                       atol=1e-6)
            np.testing.assert_allclose(depths[front], ref_depths[front],
                                       rtol=1e-9)

    def test_aiming_point_on_boresight(self, camera):
        """Pitch equal to the path angle centers the aiming point."""
        rng = np.random.Generator(np.random.Philox(key=25))
        for _ in range(25):
            d = float(rng.uniform(200.0, 5556.0))
            vertical = float(rng.uniform(-3.8, -2.2))
            pose = Pose(d, 0.0, vertical, 0.0, vertical, 0.0)
            pixels, _ = project_points(np.zeros((1, 3)),
                                       to_cartesian(pose), camera)
            np.testing.assert_allclose(pixels[0], [camera.cx, camera.cy],
                                       atol=1e-6)

    def test_symmetric_pose_centers_runway_horizontally(self, camera,
                                                        runway):
        pose = Pose(1000.0, 0.0, -3.0, 0.0, -3.0, 0.0)
        pixels, _ = project_points(runway_corners_world(runway),
                                   to_cartesian(pose), camera)
        near_l, near_r, far_r, far_l = pixels
        assert near_l[0] + near_r[0] == pytest.approx(2 * camera.cx,
                                                      abs=1e-6)
        assert far_l[0] + far_r[0] == pytest.approx(2 * camera.cx, abs=1e-6)
        assert near_l[1] == pytest.approx(near_r[1], abs=1e-6)

    def test_focal_doubling_doubles_centered_pixels(self, runway):
        base = CameraModel(width_px=2448, height_px=2048, focal_px=1400.0,
                           cx=1224.0, cy=1024.0)
        doubled = CameraModel(width_px=2448, height_px=2048,
                              focal_px=2800.0, cx=1224.0, cy=1024.0)
        cpose = to_cartesian(Pose(1500.0, 2.0, -3.0, 4.0, -2.0, 6.0))
        corners = runway_corners_world(runway)
        px1, _ = project_points(corners, cpose, base)
        px2, _ = project_points(corners, cpose, doubled)
        centered1 = px1 - [base.cx, base.cy]
        centered2 = px2 - [doubled.cx, doubled.cy]
        np.testing.assert_allclose(centered2, 2.0 * centered1, atol=1e-9)

    def test_roll_rotates_image_by_negative_angle(self, camera, runway):
        theta = 10.0
        base = Pose(1200.0, 1.0, -3.0, 2.0, -3.0, 0.0)
        rolled = Pose(1200.0, 1.0, -3.0, 2.0, -3.0, theta)
        corners = runway_corners_world(runway)
        px0, _ = project_points(corners, to_cartesian(base), camera)
        px1, _ = project_points(corners, to_cartesian(rolled), camera)
        c0 = px0 - [camera.cx, camera.cy]
        c1 = px1 - [camera.cx, camera.cy]
        np.testing.assert_allclose(np.hypot(c1[:, 0], c1[:, 1]),
                                   np.hypot(c0[:, 0], c0[:, 1]), rtol=1e-12)
        ang0 = np.arctan2(c0[:, 1], c0[:, 0])
        ang1 = np.arctan2(c1[:, 1], c1[:, 0])
        delta = np.angle(np.exp(1j * (ang1 - ang0)))
        np.testing.assert_allclose(delta, -math.radians(theta), atol=1e-9)

    def test_depth_decreases_on_approach(self, camera, runway):
        corners = runway_corners_world(runway)
        _, far_depths = project_points(
            corners, to_cartesian(Pose(3000.0, 0.0, -3.0, 0, -3, 0)), camera)
        _, near_depths = project_points(
            corners, to_cartesian(Pose(500.0, 0.0, -3.0, 0, -3, 0)), camera)
        assert np.all(near_depths < far_depths)


class TestProjectRunway:
    def test_interior_pose_fully_visible(self, camera, runway):
        label = project_runway(Pose(1000.0, 0.0, -3.0, 0.0, -3.0, 0.0),
                               runway, camera)
        assert label.fully_visible
        assert all(math.isfinite(c) for pair in label.corners for c in pair)
        x0, y0, x1, y1 = label.bbox
        assert 0 <= x0 < x1 <= camera.width_px
        v_lo, v_hi = camera.visible_v_range
        assert v_lo <= y0 < y1 <= v_hi

    def test_corners_behind_camera_go_nan(self, camera, runway):
        # camera 200 m up the approach sits past the threshold at x = 300
        label = project_runway(Pose(200.0, 0.0, -3.0, 0.0, -3.0, 0.0),
                               runway, camera)
        assert not label.fully_visible
        near_l, near_r = label.corners[0], label.corners[1]
        assert math.isnan(near_l[0]) and math.isnan(near_r[1])
        assert all(math.isnan(v) for v in label.bbox)

    def test_crop_band_blocks_full_visibility(self, runway):
        # short final: the near edge lands in the bottom 300 cropped rows
        pose = Pose(330.0, 0.0, -3.8, 0.0, 0.0, 0.0)
        cropped = CameraModel.default()
        uncropped = CameraModel(width_px=2448, height_px=2048,
                                focal_px=1400.0, cx=1224.0, cy=1024.0)
        assert not project_runway(pose, runway, cropped).fully_visible
        assert project_runway(pose, runway, uncropped).fully_visible

    def test_margin_recorded_and_box_expanded(self, camera, runway):
        pose = Pose(1500.0, 0.0, -3.0, 0.0, -3.0, 0.0)
        tight = project_runway(pose, runway, camera, margin_px=0.0)
        wide = project_runway(pose, runway, camera, margin_px=5.0)
        assert tight.margin_px == 0.0 and wide.margin_px == 5.0
        assert wide.bbox[0] == pytest.approx(tight.bbox[0] - 5.0)
        assert wide.bbox[2] == pytest.approx(tight.bbox[2] + 5.0)

    def test_label_needs_four_corners(self):
        with pytest.raises(ValueError):
            ImageLabel(corners=((0.0, 0.0),) * 3,
                       bbox=(0, 0, 1, 1), fully_visible=False, margin_px=0)


class TestBoundingBox:
    def test_margin_then_clamp(self, camera):
        corners = np.array([[10.0, 400.0], [20.0, 400.0],
                            [20.0, 420.0], [10.0, 420.0]])
        assert bounding_box(corners, 5.0, camera) == (5.0, 395.0, 25.0, 425.0)
        assert bounding_box(corners, 50.0, camera) == (0.0, 350.0, 70.0,
                                                       470.0)

    def test_clamps_to_crop_band(self, camera):
        corners = np.array([[100.0, 310.0], [300.0, 310.0],
                            [300.0, 1740.0], [100.0, 1740.0]])
        box = bounding_box(corners, 20.0, camera)
        assert box[1] == camera.visible_v_range[0]
        assert box[3] == camera.visible_v_range[1]

    def test_negative_margin_rejected(self, camera):
        with pytest.raises(InvalidInputError):
            bounding_box(np.zeros((4, 2)), -1.0, camera)

    def test_nan_corners_give_nan_box(self, camera):
        corners = np.array([[np.nan, 0.0], [1, 1], [2, 2], [3, 3.0]])
        assert all(math.isnan(v) for v in bounding_box(corners, 5.0, camera))


class TestShapeMetrics:
    def test_axis_aligned_square_fills_box(self):
        square = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0],
                           [0.0, 10.0]])
        assert fill_ratio(square) == pytest.approx(1.0)
        assert quad_area(square) == 100.0

    def test_diamond_fills_half(self):
        diamond = np.array([[5.0, 0.0], [10.0, 5.0], [5.0, 10.0],
                            [0.0, 5.0]])
        assert fill_ratio(diamond) == pytest.approx(0.5)

    def test_explicit_bbox_dilutes_fill(self):
        square = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0],
                           [0.0, 10.0]])
        assert fill_ratio(square, bbox=(0.0, 0.0, 20.0, 10.0)) == \
            pytest.approx(0.5)

    def test_self_intersecting_quad_rejected(self):
        bowtie = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0],
                           [10.0, 10.0]])
        with pytest.raises(InvalidLabelError):
            fill_ratio(bowtie)

    def test_nan_corner_rejected(self):
        corners = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, np.nan],
                            [0.0, 10.0]])
        with pytest.raises(InvalidLabelError):
            fill_ratio(corners)

    def test_fill_matches_raster_oracle_on_projected_runways(self, camera,
                                                             runway):
        rng = np.random.Generator(np.random.Philox(key=26))
        checked = 0
        for pose in random_cone_poses(rng, 60):
            label = project_runway(pose, runway, camera)
            if not label.fully_visible:
                continue
            corners = np.array(label.corners)
            ours = fill_ratio(corners)
            ref = oracles.raster_fill_ratio(corners)
            assert ours == pytest.approx(ref, abs=0.01)
            checked += 1
        assert checked >= 20

    def test_area_matches_triangle_oracle(self, camera, runway):
        rng = np.random.Generator(np.random.Philox(key=27))
        for pose in random_cone_poses(rng, 40):
            label = project_runway(pose, runway, camera)
            corners = np.array(label.corners)
            if not np.all(np.isfinite(corners)):
                continue
            assert quad_area(corners) == pytest.approx(
                oracles.quad_area_by_triangles(corners), rel=1e-9)

    def test_aspect_ratio_and_area(self):
        assert aspect_ratio((0.0, 0.0, 200.0, 100.0)) == 0.5
        assert bbox_area((0.0, 0.0, 200.0, 100.0)) == 20000.0
        with pytest.raises(InvalidLabelError):
            aspect_ratio((5.0, 0.0, 5.0, 10.0))


class TestCameraModel:
    def test_default_crop_band(self):
        camera = CameraModel.default()
        assert camera.visible_v_range == (300.0, 1748.0)

    def test_intrinsic_layout(self):
        camera = CameraModel.default()
        k = intrinsic_matrix(camera)
        np.testing.assert_allclose(k, [[1400.0, 0.0, 1224.0],
                                       [0.0, 1400.0, 1024.0],
                                       [0.0, 0.0, 1.0]])

    def test_validation(self):
        with pytest.raises(ValueError):
            CameraModel(0, 2048, 1400.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            CameraModel(2448, 2048, -1.0, 1224.0, 1024.0)
        with pytest.raises(ValueError):
            CameraModel(2448, 2048, 1400.0, 5000.0, 1024.0)
        with pytest.raises(ValueError):
            CameraModel(2448, 2048, 1400.0, 1224.0, 1024.0,
                        crop_top_px=1024, crop_bottom_px=1024)
