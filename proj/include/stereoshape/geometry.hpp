#pragma once

// Pinhole and rectified-stereo camera models plus the small fixed-size
// vector/matrix math shared by the rest of the library.
//
// Conventions (documented once, used everywhere):
//   - CCS is right-handed with z forward and y down (left camera frame).
//   - Pixel coordinates are continuous; integer coordinates sit at pixel
//     centers. Rounding happens only at raster sampling sites.
//   - Yaw rotates about the camera y-axis with R[0][2] = sin, R[2][0] = -sin.

#include <array>
#include <cmath>

#include "stereoshape/errors.hpp"

namespace stereoshape {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Squared Euclidean distance; the one expression every nearest-neighbor path
// (brute force and k-d tree) must share so their results agree bit for bit.
inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

struct Pixel {
    double u = 0.0;  // column, sub-pixel
    double v = 0.0;  // row, sub-pixel
};

// Row-major 3x3 matrix; just enough linear algebra for rotations and K.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    double determinant() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
};

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx_, double fy_, double cx_, double cy_)
        : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
        if (fx <= 0.0 || fy <= 0.0)
            throw DegenerateBox("camera focal lengths must be positive");
    }

    // Upper-triangular K with K[2][2] = 1.
    Mat3 matrix() const {
        Mat3 k;
        k.m[0][0] = fx;
        k.m[0][2] = cx;
        k.m[1][1] = fy;
        k.m[1][2] = cy;
        k.m[2][2] = 1.0;
        return k;
    }
};

// Rectified pair: shared intrinsics, horizontal baseline. Focal length for
// the disparity relation is taken from left.fx.
struct StereoRig {
    CameraIntrinsics left;
    double baseline_m = 0.0;

    StereoRig() = default;
    StereoRig(CameraIntrinsics left_, double baseline)
        : left(left_), baseline_m(baseline) {
        if (baseline_m <= 0.0) throw DegenerateBox("stereo baseline must be positive");
    }

    double focal() const { return left.fx; }
};

// Normalize an angle to (-pi, pi].
double normalize_angle(double theta);

// Planar pose: translation plus yaw about the camera y-axis. Yaw is
// normalized at construction so orientation comparisons are well-defined.
struct Pose2DYaw {
    Vec3 translation{};
    double yaw = 0.0;

    Pose2DYaw() = default;
    Pose2DYaw(const Vec3& t, double theta) : translation(t), yaw(normalize_angle(theta)) {}
};

// Perspective projection of a CCS point. Throws NonPositiveDepth if p.z <= 0.
Pixel project(const Vec3& p, const CameraIntrinsics& k);

// Inverse of project for a known depth. Throws NonPositiveDepth.
Vec3 backproject(const Pixel& px, double depth, const CameraIntrinsics& k);

// depth = f * B / disparity. Throws NonPositiveDisparity.
double disparity_to_depth(double disparity_px, const StereoRig& rig);

// disparity = f * B / depth. Throws NonPositiveDepth.
double depth_to_disparity(double depth_m, const StereoRig& rig);

// Rotation about the camera y-axis:
//   [ cos  0  sin ]
//   [  0   1   0  ]
//   [-sin  0  cos ]
Mat3 yaw_rotation(double theta);

}  // namespace stereoshape
