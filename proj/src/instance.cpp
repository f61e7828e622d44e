#include "stereoshape/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stereoshape {

std::vector<Vec3> Box3D::corners() const {
    const Mat3 r = yaw_rotation(yaw);
    std::vector<Vec3> out;
    out.reserve(8);
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1}) {
                const Vec3 local{0.5 * length * sx, 0.5 * height * sy, 0.5 * width * sz};
                out.push_back(center + r * local);
            }
    return out;
}

std::size_t PointCloud::valid_count() const {
    if (padding.empty()) return points.size();
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!is_padding(i)) ++n;
    return n;
}

std::vector<Vec3> PointCloud::valid_points() const {
    if (padding.empty()) return points;
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!is_padding(i)) out.push_back(points[i]);
    return out;
}

void ForegroundMask::validate() const {
    for (const MaskPixel& m : pixels) {
        if (m.px.u < origin_u || m.px.v < origin_v ||
            m.px.u >= origin_u + static_cast<double>(width) ||
            m.px.v >= origin_v + static_cast<double>(height))
            throw IndexOutOfRange("foreground pixel outside its RoI");
        if (!(m.disparity > 0.0)) throw NonPositiveDisparity();
    }
}

std::vector<MaskPixel> sample_foreground(const ForegroundMask& mask, std::size_t e,
                                         std::uint64_t seed) {
    if (mask.pixels.empty()) throw EmptyMask();
    if (e < 1) throw IndexOutOfRange("sample size must be >= 1");
    mask.validate();

    std::vector<MaskPixel> out;
    out.reserve(e);
    if (mask.pixels.size() <= e) {
        out = mask.pixels;
        for (MaskPixel& m : out) m.is_padding = false;
        MaskPixel pad;
        pad.px = {0.0, 0.0};
        pad.disparity = 0.0;
        pad.is_padding = true;
        while (out.size() < e) out.push_back(pad);
        return out;
    }

    Rng rng(seed);
    for (std::size_t idx : rng.sample_without_replacement(mask.pixels.size(), e)) {
        out.push_back(mask.pixels[idx]);
        out.back().is_padding = false;
    }
    return out;
}

PointCloud extract_visible(const ForegroundMask& mask, const StereoRig& rig,
                           const CameraIntrinsics& k, std::size_t e, std::uint64_t seed) {
    const std::vector<MaskPixel> sample = sample_foreground(mask, e, seed);
    PointCloud cloud;
    cloud.frame = Frame::CCS;
    cloud.points.reserve(e);
    bool any_padding = false;
    for (const MaskPixel& m : sample) {
        if (m.is_padding) {
            cloud.points.push_back({0.0, 0.0, 0.0});
            any_padding = true;
            continue;
        }
        const double depth = disparity_to_depth(m.disparity, rig);
        cloud.points.push_back(backproject(m.px, depth, k));
    }
    if (any_padding) {
        cloud.padding.assign(e, 0);
        for (std::size_t i = 0; i < e; ++i) cloud.padding[i] = sample[i].is_padding ? 1 : 0;
    }
    return cloud;
}

namespace {

Vec3 ocs_scale_factors(const Box3D& box, OcsScale scale) {
    if (scale == OcsScale::UniformL) return {box.length, box.length, box.length};
    return {box.length, box.height, box.width};
}

}  // namespace

PointCloud ocs_transform(const PointCloud& cloud_ccs, const Box3D& box, OcsScale scale) {
    if (box.length <= 0.0 || box.height <= 0.0 || box.width <= 0.0)
        throw DegenerateBox("ocs_transform: box dimensions must be positive");
    const Mat3 rt = yaw_rotation(box.yaw).transposed();
    const Vec3 s = ocs_scale_factors(box, scale);

    PointCloud out;
    out.frame = Frame::OCS;
    out.padding = cloud_ccs.padding;
    out.points.reserve(cloud_ccs.size());
    for (std::size_t i = 0; i < cloud_ccs.size(); ++i) {
        if (cloud_ccs.is_padding(i)) {
            out.points.push_back({0.0, 0.0, 0.0});
            continue;
        }
        const Vec3 centered = rt * (cloud_ccs.points[i] - box.center);
        out.points.push_back({centered.x / s.x, centered.y / s.y, centered.z / s.z});
    }
    return out;
}

PointCloud ocs_inverse(const PointCloud& cloud_ocs, const Box3D& box, OcsScale scale) {
    if (box.length <= 0.0 || box.height <= 0.0 || box.width <= 0.0)
        throw DegenerateBox("ocs_inverse: box dimensions must be positive");
    const Mat3 r = yaw_rotation(box.yaw);
    const Vec3 s = ocs_scale_factors(box, scale);

    PointCloud out;
    out.frame = Frame::CCS;
    out.padding = cloud_ocs.padding;
    out.points.reserve(cloud_ocs.size());
    for (std::size_t i = 0; i < cloud_ocs.size(); ++i) {
        const Vec3& p = cloud_ocs.points[i];
        if (cloud_ocs.is_padding(i)) {
            out.points.push_back(box.center);
            continue;
        }
        out.points.push_back(box.center + r * Vec3{p.x * s.x, p.y * s.y, p.z * s.z});
    }
    return out;
}

namespace {

// First `take` entries of the farthest-point ordering: start at the max-norm
// point (lowest index on ties), then repeatedly take the point farthest from
// the selected set.
std::vector<std::size_t> fps_ordering(const std::vector<Vec3>& pts, std::size_t take) {
    const std::size_t n = pts.size();
    std::vector<std::size_t> order;
    order.reserve(take);

    std::size_t start = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pts[i].squared_norm();
        if (d > best) {
            best = d;
            start = i;
        }
    }
    order.push_back(start);

    std::vector<double> min_d2(n);
    std::vector<bool> taken(n, false);
    taken[start] = true;
    for (std::size_t i = 0; i < n; ++i) min_d2[i] = squared_distance(pts[i], pts[start]);

    while (order.size() < take) {
        std::size_t far_idx = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (min_d2[i] > far_d2) {
                far_d2 = min_d2[i];
                far_idx = i;
            }
        }
        order.push_back(far_idx);
        taken[far_idx] = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double d2 = squared_distance(pts[i], pts[far_idx]);
            if (d2 < min_d2[i]) min_d2[i] = d2;
        }
    }
    return order;
}

}  // namespace

PointCloud resample_fps(const PointCloud& cloud, std::size_t n) {
    const std::vector<Vec3> pts = cloud.valid_points();
    if (pts.empty()) throw EmptyCloud();
    if (n < 1) throw IndexOutOfRange("resample size must be >= 1");

    const std::vector<std::size_t> order = fps_ordering(pts, std::min(n, pts.size()));
    PointCloud out;
    out.frame = cloud.frame;
    out.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.points.push_back(pts[order[i % pts.size()]]);
    return out;
}

ShapeCode encode_shape(const PointCloud& completed_ocs) {
    const std::vector<Vec3> pts = completed_ocs.valid_points();
    if (pts.empty()) throw EmptyCloud("encode_shape: no non-padding points");
    ShapeCode code;
    code.values.reserve(pts.size() * 3);
    for (const Vec3& p : pts) {
        code.values.push_back(p.x);
        code.values.push_back(p.y);
        code.values.push_back(p.z);
    }
    return code;
}

PointCloud mirror_hallucinate(const PointCloud& partial_ocs, std::size_t target_count) {
    const std::vector<Vec3> pts = partial_ocs.valid_points();
    if (pts.empty()) throw EmptyCloud("mirror_hallucinate: no non-padding points");

    PointCloud merged;
    merged.frame = Frame::OCS;
    merged.points.reserve(pts.size() * 2);
    for (const Vec3& p : pts) merged.points.push_back(p);
    for (const Vec3& p : pts) merged.points.push_back({p.x, p.y, -p.z});
    return resample_fps(merged, target_count);
}

}  // namespace stereoshape
