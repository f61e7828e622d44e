#pragma once

// Instance pipeline: visible-point extraction from a foreground mask,
// canonical object-coordinate-system (OCS) normalization conditioned on a
// 3D box, and pluggable completion of the unseen surface. The reference
// completer mirrors the cloud across the lateral (z = 0) OCS plane.
//
// OCS convention: origin at the box center, x along object length, y along
// height, z along width. The default normalization scales all three axes
// uniformly by 1/length; per-axis (1/l, 1/h, 1/w) scaling is available
// behind OcsScale::PerAxis.

#include <cstdint>
#include <optional>
#include <vector>

#include "stereoshape/geometry.hpp"
#include "stereoshape/rng.hpp"

namespace stereoshape {

// Coordinate frame tag carried by every point cloud.
enum class Frame : std::uint8_t { CCS, OCS };

enum class OcsScale : std::uint8_t { UniformL, PerAxis };

// 7-tuple 3D box in camera coordinates; center-based, yaw about the y-axis.
struct Box3D {
    Vec3 center{};
    double height = 1.0;
    double width = 1.0;
    double length = 1.0;
    double yaw = 0.0;
    std::optional<double> score;

    Box3D() = default;
    Box3D(const Vec3& c, double h, double w, double l, double theta,
          std::optional<double> s = std::nullopt)
        : center(c), height(h), width(w), length(l), yaw(normalize_angle(theta)), score(s) {
        if (h <= 0.0 || w <= 0.0 || l <= 0.0)
            throw DegenerateBox("box dimensions must be positive");
    }

    double volume() const { return height * width * length; }

    // 8 corners in CCS, local offsets (+-l/2, +-h/2, +-w/2) rotated by yaw.
    std::vector<Vec3> corners() const;
};

// Ordered points with a frame tag. Padding entries are batching artifacts,
// not geometry: they are flagged so metric code can skip them.
struct PointCloud {
    Frame frame = Frame::CCS;
    std::vector<Vec3> points;
    std::vector<std::uint8_t> padding;  // empty means "no padding anywhere"

    PointCloud() = default;
    PointCloud(Frame f, std::vector<Vec3> pts) : frame(f), points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool is_padding(std::size_t i) const { return !padding.empty() && padding[i] != 0; }
    std::size_t valid_count() const;
    // The non-padding points, in order.
    std::vector<Vec3> valid_points() const;
};

// One foreground pixel of a stereo RoI with its predicted disparity.
struct MaskPixel {
    Pixel px;           // image coordinates (not RoI-local)
    double disparity;   // pixels, > 0
    bool is_padding = false;
};

// Predicted foreground of an RoI: pixel set plus per-pixel disparity.
struct ForegroundMask {
    double origin_u = 0.0;  // RoI top-left in image coordinates
    double origin_v = 0.0;
    std::size_t width = 0;  // RoI extent, pixels
    std::size_t height = 0;
    std::vector<MaskPixel> pixels;

    void validate() const;
};

// Opaque implicit-shape vector; produced by a learned encoder elsewhere,
// carried through here so the pipeline signature stays complete.
struct ShapeCode {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
};

// Stand-in for the learned shape encoder: packs the completed cloud's
// coordinates into an opaque code so the composite pipeline is total.
// Throws EmptyCloud.
ShapeCode encode_shape(const PointCloud& completed_ocs);

// Completion stage contract: exactly `target_count` OCS points out.
class Hallucinator {
public:
    virtual ~Hallucinator() = default;
    virtual PointCloud complete(const PointCloud& partial_ocs,
                                std::size_t target_count) const = 0;
};

// Uniform subset of e foreground pixels (without replacement), deterministic
// for a fixed seed. When the mask holds fewer than e pixels the result is
// zero-padded with flagged entries. Throws EmptyMask.
std::vector<MaskPixel> sample_foreground(const ForegroundMask& mask, std::size_t e,
                                         std::uint64_t seed);

// V of the pipeline: sample e foreground pixels and re-project them to the
// CCS with depth f*B/disparity. Padding entries become flagged zero points.
PointCloud extract_visible(const ForegroundMask& mask, const StereoRig& rig,
                           const CameraIntrinsics& k, std::size_t e, std::uint64_t seed);

// O of the pipeline: map a CCS cloud into the box's canonical OCS. The box
// center goes to the origin; padding points are pinned to the origin and
// stay flagged. Throws DegenerateBox.
PointCloud ocs_transform(const PointCloud& cloud_ccs, const Box3D& box,
                         OcsScale scale = OcsScale::UniformL);

// Exact inverse of ocs_transform.
PointCloud ocs_inverse(const PointCloud& cloud_ocs, const Box3D& box,
                       OcsScale scale = OcsScale::UniformL);

// Deterministic farthest-point resampling to exactly n points. Starts at the
// max-norm point; when n exceeds the cloud size the FPS ordering is repeated
// cyclically. Padding points are dropped first. Throws EmptyCloud.
PointCloud resample_fps(const PointCloud& cloud, std::size_t n);

// Reference Hallucinator: reflect across the lateral OCS plane (z -> -z),
// merge with the input and resample to target_count. Deterministic.
PointCloud mirror_hallucinate(const PointCloud& partial_ocs, std::size_t target_count);

class MirrorHallucinator final : public Hallucinator {
public:
    PointCloud complete(const PointCloud& partial_ocs,
                        std::size_t target_count) const override {
        return mirror_hallucinate(partial_ocs, target_count);
    }
};

}  // namespace stereoshape
