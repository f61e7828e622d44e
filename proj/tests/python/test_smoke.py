"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import stereoshape as ss


@pytest.fixture
def intrinsics():
    return ss.CameraIntrinsics(500.0, 500.0, 320.0, 240.0)


def test_project_backproject_round_trip(intrinsics):
    pts = np.array([[0.0, 0.0, 2.0], [1.0, -0.5, 8.0], [-2.0, 0.3, 15.0]])
    px = ss.project(pts, intrinsics)
    assert px.shape == (3, 2)
    assert np.allclose(px[0], [320.0, 240.0])
    back = ss.backproject(px, pts[:, 2].copy(), intrinsics)
    assert np.allclose(back, pts, atol=1e-9)


def test_disparity_depth(intrinsics):
    rig = ss.StereoRig(intrinsics, 0.54)
    depth = ss.disparity_to_depth(27.0, rig)
    assert math.isclose(ss.depth_to_disparity(depth, rig), 27.0, rel_tol=1e-12)
    with pytest.raises(ss.StereoShapeError):
        ss.disparity_to_depth(-1.0, rig)


def test_ocs_round_trip_and_corners():
    box = ss.Box3D(2.0, 0.0, 12.0, 1.5, 1.6, 4.0, 0.4)
    corners = box.corners()
    ocs = ss.ocs_transform(corners, box)
    assert np.allclose(np.abs(ocs[:, 0]), 0.5, atol=1e-9)
    assert np.allclose(np.abs(ocs[:, 1]), 1.5 / 8.0, atol=1e-9)
    assert np.allclose(np.abs(ocs[:, 2]), 1.6 / 8.0, atol=1e-9)
    assert np.allclose(ss.ocs_inverse(ocs, box), corners, atol=1e-9)


def test_mirror_completion_and_chamfer():
    half = np.array([[0.3, 0.0, 0.2], [0.1, 0.05, 0.15]])
    completed = ss.mirror_hallucinate(half, 4)
    assert completed.shape == (4, 3)
    # the output contains the reflections
    as_set = {tuple(np.round(p, 9)) for p in completed}
    assert tuple(np.round([0.3, 0.0, -0.2], 9)) in as_set

    a = np.array([[0.0, 0.0, 0.0]])
    b = np.array([[1.0, 0.0, 0.0]])
    assert math.isclose(ss.chamfer(a, b), 2.0, rel_tol=1e-12)


def test_mmd_and_ap():
    rng = np.random.default_rng(5)
    template = rng.uniform(-0.4, 0.4, size=(64, 3))
    lib = ss.TemplateLibrary([template], 0)
    assert len(lib) == 1
    assert ss.mmd(template, lib) == 0.0

    assert ss.delta_mmd(0.0) == 1.0
    assert ss.delta_mmd(0.05) == 0.0
    pairs = [(i / 10.0, 1.0) for i in range(1, 11)]
    assert math.isclose(ss.ap_11(pairs), 1.0)


def test_iou():
    a = ss.Box3D(0.0, 0.0, 10.0, 1.5, 1.6, 4.0, 0.0)
    assert math.isclose(ss.iou_bev(a, a), 1.0, rel_tol=1e-9)
    assert math.isclose(ss.iou_3d(a, a), 1.0, rel_tol=1e-9)
    assert math.isclose(ss.iou_2d((0, 0, 1, 1), (0.5, 0, 1.5, 1)), 1.0 / 3.0)


def test_marching_cubes_sphere():
    n = 32
    axis = np.linspace(-0.5, 0.5, n)
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    dist = np.sqrt(x * x + y * y + z * z) - 0.4
    occupancy = 1.0 / (1.0 + np.exp(dist / 0.05))
    vertices, triangles = ss.marching_cubes(occupancy, (-0.5,) * 3, (0.5,) * 3, 0.5)
    assert len(triangles) > 100
    radii = np.linalg.norm(vertices, axis=1)
    assert np.all(np.abs(radii - 0.4) < 0.1)


def test_template_cloud():
    sphere = ss.template_cloud("sphere", 256, seed=3)
    assert sphere.shape == (256, 3)
    assert np.allclose(np.linalg.norm(sphere, axis=1), 0.5, atol=1e-9)
    with pytest.raises(ss.StereoShapeError):
        ss.template_cloud("teapot", 10)
