"""Stereo 3D detection shape pipeline and evaluation metrics."""

from ._stereoshape import (
    Box3D,
    CameraIntrinsics,
    StereoRig,
    StereoShapeError,
    TemplateLibrary,
    ap_11,
    backproject,
    chamfer,
    delta_mmd,
    depth_to_disparity,
    disparity_to_depth,
    iou_2d,
    iou_3d,
    iou_bev,
    marching_cubes,
    mirror_hallucinate,
    mmd,
    ocs_inverse,
    ocs_transform,
    orientation_similarity,
    project,
    resample_fps,
    template_cloud,
    __version__,
)

__all__ = [
    "Box3D",
    "CameraIntrinsics",
    "StereoRig",
    "StereoShapeError",
    "TemplateLibrary",
    "ap_11",
    "backproject",
    "chamfer",
    "delta_mmd",
    "depth_to_disparity",
    "disparity_to_depth",
    "iou_2d",
    "iou_3d",
    "iou_bev",
    "marching_cubes",
    "mirror_hallucinate",
    "mmd",
    "ocs_inverse",
    "ocs_transform",
    "orientation_similarity",
    "project",
    "resample_fps",
    "template_cloud",
    "__version__",
]
