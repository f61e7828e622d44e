#pragma once

// Geometric evaluation primitives: Chamfer distance (k-d tree accelerated),
// minimal matching distance against a template library, axis-aligned and
// rotated-box IoU, greedy detection matching and 11-point average precision.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stereoshape/geometry.hpp"
#include "stereoshape/instance.hpp"
#include "stereoshape/kdtree.hpp"

namespace stereoshape {

enum class ChamferNorm : std::uint8_t { L2, SquaredL2 };

// Bidirectional mean nearest-neighbor distance, each direction normalized by
// its own cardinality. Padding-tagged points are skipped. Throws EmptyCloud.
double chamfer(const PointCloud& p, const PointCloud& g, ChamferNorm norm = ChamferNorm::L2);

// Canonical class shapes the minimal matching distance is taken against
// (the reference car-class library holds 250 templates; any non-empty set
// works). Clouds are resampled to a fixed cardinality at load so distances
// are comparable across templates; a nearest-neighbor tree per template is
// cached for the accelerated Chamfer path.
class TemplateLibrary {
public:
    TemplateLibrary() = default;

    // resample_n == 0 keeps each cloud's native cardinality.
    static TemplateLibrary from_clouds(std::vector<std::string> names,
                                       std::vector<PointCloud> clouds,
                                       std::size_t resample_n = 2048);

    std::size_t size() const { return clouds_.size(); }
    bool empty() const { return clouds_.empty(); }
    const std::vector<std::string>& names() const { return names_; }
    const PointCloud& cloud(std::size_t i) const { return clouds_[i]; }
    const KdTree3& tree(std::size_t i) const { return trees_[i]; }

private:
    std::vector<std::string> names_;
    std::vector<PointCloud> clouds_;
    std::vector<KdTree3> trees_;
};

// min over templates of chamfer(p, template). Throws EmptyLibrary/EmptyCloud.
double mmd(const PointCloud& p, const TemplateLibrary& lib, ChamferNorm norm = ChamferNorm::L2);

// Axis-aligned image-plane rectangle, pixels.
struct Rect2D {
    double left = 0.0, top = 0.0, right = 0.0, bottom = 0.0;

    double width() const { return right - left; }
    double height() const { return bottom - top; }
    double area() const { return width() * height(); }
};

double iou_2d(const Rect2D& a, const Rect2D& b);

// Ground-plane footprint of a box: 4 (x, z) corners, counter-clockwise.
struct BevPoint {
    double x = 0.0;
    double z = 0.0;
};
std::vector<BevPoint> bev_footprint(const Box3D& box);

// Convex polygon intersection area (Sutherland-Hodgman clip + shoelace).
double convex_polygon_intersection_area(const std::vector<BevPoint>& a,
                                        const std::vector<BevPoint>& b);

// Rotated-rectangle overlap of the two footprints.
double bev_intersection_area(const Box3D& a, const Box3D& b);
double iou_bev(const Box3D& a, const Box3D& b);

// BEV intersection area times 1-D height overlap, over the volume union.
double iou_3d(const Box3D& a, const Box3D& b);

// --- Detection evaluation -------------------------------------------------

enum class Difficulty : std::uint8_t { Easy = 0, Moderate = 1, Hard = 2, Ignored = 3 };

// KITTI-style difficulty thresholds; the benchmark's published values, kept
// in config rather than hard-coded.
struct DifficultyTable {
    std::array<double, 3> min_height{40.0, 25.0, 25.0};     // bbox pixels, strict >
    std::array<int, 3> max_occlusion{0, 1, 2};
    std::array<double, 3> max_truncation{0.15, 0.30, 0.50};
};

struct GroundTruthObject {
    Box3D box;
    Rect2D bbox;
    double truncation = 0.0;
    int occlusion = 0;
    std::string label = "Car";
    bool dont_care = false;
};

struct Detection {
    Box3D box;  // score must be set
    Rect2D bbox;
    std::optional<PointCloud> cloud;  // completed OCS cloud, if any
};

// Easy/Moderate/Hard by bbox height, occlusion and truncation; Ignored when
// even the Hard gate fails. The three categories nest.
Difficulty assign_difficulty(const GroundTruthObject& gt, const DifficultyTable& table);

enum class MatchCriterion : std::uint8_t { Iou2D, IouBev, Iou3D };

struct MatchResult {
    struct PerDetection {
        bool tp = false;
        bool excluded = false;  // claimed an ignored ground truth
        int gt_index = -1;
        double iou = 0.0;
    };
    std::vector<PerDetection> detections;
    std::vector<bool> gt_matched;
};

// Greedy matching: detections in descending score (ties by input order) each
// claim the unmatched ground truth with the highest IoU strictly above the
// threshold (ties by lower ground-truth index). A detection that claims an
// ignored ground truth is excluded from both TP and FP counts.
MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthObject>& gts,
                             MatchCriterion criterion, double threshold,
                             const std::vector<bool>* gt_ignored = nullptr);

// One point of a recall sweep; `value` is precision or a similarity.
struct RecallPoint {
    double recall = 0.0;
    double value = 0.0;
};

// Mean over the 11 recall anchors {0, 0.1, ..., 1} of the maximum value at
// recall >= anchor; anchors beyond the reached recall contribute 0.
double ap_11(const std::vector<RecallPoint>& points);

// (0.05 - mmd) * 20, floored at 0. The false-positive gate (delta = 0) is
// applied by the caller.
double delta_mmd(double mmd_value);

// Orientation similarity (1 + cos(dyaw)) / 2.
double orientation_similarity(double yaw_a, double yaw_b);

}  // namespace stereoshape
