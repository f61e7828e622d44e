#include "stereoshape/geometry.hpp"

namespace stereoshape {

double normalize_angle(double theta) {
    const double two_pi = 2.0 * M_PI;
    double a = std::fmod(theta, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

Pixel project(const Vec3& p, const CameraIntrinsics& k) {
    if (!(p.z > 0.0)) throw NonPositiveDepth("project: point depth must be positive");
    return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

Vec3 backproject(const Pixel& px, double depth, const CameraIntrinsics& k) {
    if (!(depth > 0.0)) throw NonPositiveDepth("backproject: depth must be positive");
    return {(px.u - k.cx) * depth / k.fx, (px.v - k.cy) * depth / k.fy, depth};
}

double disparity_to_depth(double disparity_px, const StereoRig& rig) {
    if (!(disparity_px > 0.0)) throw NonPositiveDisparity();
    return rig.focal() * rig.baseline_m / disparity_px;
}

double depth_to_disparity(double depth_m, const StereoRig& rig) {
    if (!(depth_m > 0.0)) throw NonPositiveDepth("depth_to_disparity: depth must be positive");
    return rig.focal() * rig.baseline_m / depth_m;
}

Mat3 yaw_rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Mat3 r = Mat3::identity();
    r.m[0][0] = c;
    r.m[0][2] = s;
    r.m[2][0] = -s;
    r.m[2][2] = c;
    return r;
}

}  // namespace stereoshape
