#include "stereoshape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stereoshape {

namespace {

double directed_mean_nn(const std::vector<Vec3>& from, const KdTree3& to_tree,
                        ChamferNorm norm) {
    double sum = 0.0;
    for (const Vec3& p : from) {
        const double d2 = to_tree.nearest(p).squared_dist;
        sum += norm == ChamferNorm::L2 ? std::sqrt(d2) : d2;
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const PointCloud& p, const PointCloud& g, ChamferNorm norm) {
    const std::vector<Vec3> pp = p.valid_points();
    const std::vector<Vec3> gp = g.valid_points();
    if (pp.empty() || gp.empty()) throw EmptyCloud("chamfer: empty cloud");
    const KdTree3 p_tree(pp);
    const KdTree3 g_tree(gp);
    return directed_mean_nn(pp, g_tree, norm) + directed_mean_nn(gp, p_tree, norm);
}

TemplateLibrary TemplateLibrary::from_clouds(std::vector<std::string> names,
                                             std::vector<PointCloud> clouds,
                                             std::size_t resample_n) {
    if (clouds.empty()) throw EmptyLibrary();
    if (names.size() != clouds.size())
        throw IndexOutOfRange("template library: one name per cloud required");
    TemplateLibrary lib;
    lib.names_ = std::move(names);
    lib.clouds_.reserve(clouds.size());
    for (PointCloud& c : clouds) {
        if (c.valid_count() == 0) throw EmptyCloud("template library: empty template");
        lib.clouds_.push_back(resample_n == 0 ? std::move(c) : resample_fps(c, resample_n));
    }
    lib.trees_.reserve(lib.clouds_.size());
    for (const PointCloud& c : lib.clouds_) lib.trees_.emplace_back(c.valid_points());
    return lib;
}

double mmd(const PointCloud& p, const TemplateLibrary& lib, ChamferNorm norm) {
    if (lib.empty()) throw EmptyLibrary();
    const std::vector<Vec3> pp = p.valid_points();
    if (pp.empty()) throw EmptyCloud("mmd: empty cloud");
    const KdTree3 p_tree(pp);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < lib.size(); ++t) {
        const std::vector<Vec3> gp = lib.cloud(t).valid_points();
        const double cd = directed_mean_nn(pp, lib.tree(t), norm) +
                          directed_mean_nn(gp, p_tree, norm);
        best = std::min(best, cd);
    }
    return best;
}

double iou_2d(const Rect2D& a, const Rect2D& b) {
    if (a.area() <= 0.0 || b.area() <= 0.0)
        throw DegenerateBox("iou_2d: zero-area rectangle");
    const double w = std::min(a.right, b.right) - std::max(a.left, b.left);
    const double h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    const double inter = w * h;
    return inter / (a.area() + b.area() - inter);
}

std::vector<BevPoint> bev_footprint(const Box3D& box) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const double hl = 0.5 * box.length;
    const double hw = 0.5 * box.width;
    // Local (x, z) corners, counter-clockwise when viewed with z up.
    const double lx[4] = {hl, -hl, -hl, hl};
    const double lz[4] = {hw, hw, -hw, -hw};
    std::vector<BevPoint> out(4);
    for (int i = 0; i < 4; ++i) {
        out[i].x = box.center.x + c * lx[i] + s * lz[i];
        out[i].z = box.center.z - s * lx[i] + c * lz[i];
    }
    return out;
}

namespace {

double polygon_area(const std::vector<BevPoint>& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const BevPoint& a = poly[i];
        const BevPoint& b = poly[(i + 1) % n];
        twice += a.x * b.z - b.x * a.z;
    }
    return 0.5 * std::abs(twice);
}

double cross_side(const BevPoint& edge_a, const BevPoint& edge_b, const BevPoint& p) {
    return (edge_b.x - edge_a.x) * (p.z - edge_a.z) - (edge_b.z - edge_a.z) * (p.x - edge_a.x);
}

BevPoint edge_intersection(const BevPoint& a, const BevPoint& b, const BevPoint& c,
                           const BevPoint& d) {
    const double a1 = b.z - a.z;
    const double b1 = a.x - b.x;
    const double c1 = a1 * a.x + b1 * a.z;
    const double a2 = d.z - c.z;
    const double b2 = c.x - d.x;
    const double c2 = a2 * c.x + b2 * c.z;
    const double det = a1 * b2 - a2 * b1;
    return {(b2 * c1 - b1 * c2) / det, (a1 * c2 - a2 * c1) / det};
}

// Orientation sign of a simple polygon (positive = counter-clockwise).
double signed_area(const std::vector<BevPoint>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const BevPoint& a = poly[i];
        const BevPoint& b = poly[(i + 1) % poly.size()];
        twice += a.x * b.z - b.x * a.z;
    }
    return 0.5 * twice;
}

}  // namespace

double convex_polygon_intersection_area(const std::vector<BevPoint>& a,
                                        const std::vector<BevPoint>& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;

    // Sutherland-Hodgman: clip a against every edge of b. The clip polygon
    // must wind counter-clockwise for the inside test below.
    std::vector<BevPoint> clip = b;
    if (signed_area(clip) < 0.0) std::reverse(clip.begin(), clip.end());

    std::vector<BevPoint> poly = a;
    for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i) {
        const BevPoint& ca = clip[i];
        const BevPoint& cb = clip[(i + 1) % clip.size()];
        std::vector<BevPoint> next;
        next.reserve(poly.size() + 1);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            const BevPoint& p = poly[j];
            const BevPoint& q = poly[(j + 1) % poly.size()];
            const bool p_in = cross_side(ca, cb, p) >= 0.0;
            const bool q_in = cross_side(ca, cb, q) >= 0.0;
            if (p_in) {
                next.push_back(p);
                if (!q_in) next.push_back(edge_intersection(p, q, ca, cb));
            } else if (q_in) {
                next.push_back(edge_intersection(p, q, ca, cb));
            }
        }
        poly = std::move(next);
    }
    if (poly.size() < 3) return 0.0;
    return polygon_area(poly);
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
    return convex_polygon_intersection_area(bev_footprint(a), bev_footprint(b));
}

double iou_bev(const Box3D& a, const Box3D& b) {
    const double area_a = a.length * a.width;
    const double area_b = b.length * b.width;
    if (area_a <= 0.0 || area_b <= 0.0) throw DegenerateBox("iou_bev: zero-area footprint");
    const double inter = bev_intersection_area(a, b);
    return inter / (area_a + area_b - inter);
}

double iou_3d(const Box3D& a, const Box3D& b) {
    if (a.volume() <= 0.0 || b.volume() <= 0.0) throw DegenerateBox("iou_3d: zero volume");
    const double y_top = std::min(a.center.y + 0.5 * a.height, b.center.y + 0.5 * b.height);
    const double y_bot = std::max(a.center.y - 0.5 * a.height, b.center.y - 0.5 * b.height);
    const double h_overlap = std::max(0.0, y_top - y_bot);
    const double inter = bev_intersection_area(a, b) * h_overlap;
    return inter / (a.volume() + b.volume() - inter);
}

Difficulty assign_difficulty(const GroundTruthObject& gt, const DifficultyTable& table) {
    const double height = gt.bbox.height();
    for (int d = 0; d < 3; ++d) {
        if (height > table.min_height[d] && gt.occlusion <= table.max_occlusion[d] &&
            gt.truncation <= table.max_truncation[d])
            return static_cast<Difficulty>(d);
    }
    return Difficulty::Ignored;
}

namespace {

double criterion_iou(const Detection& det, const GroundTruthObject& gt,
                     MatchCriterion criterion) {
    switch (criterion) {
        case MatchCriterion::Iou2D: return iou_2d(det.bbox, gt.bbox);
        case MatchCriterion::IouBev: return iou_bev(det.box, gt.box);
        case MatchCriterion::Iou3D: return iou_3d(det.box, gt.box);
    }
    return 0.0;
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthObject>& gts,
                             MatchCriterion criterion, double threshold,
                             const std::vector<bool>* gt_ignored) {
    MatchResult result;
    result.detections.resize(dets.size());
    result.gt_matched.assign(gts.size(), false);

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].box.score.value_or(0.0) > dets[b].box.score.value_or(0.0);
    });

    for (std::size_t d : order) {
        int best_gt = -1;
        double best_iou = threshold;  // strict > required to claim
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (result.gt_matched[g]) continue;
            const double iou = criterion_iou(dets[d], gts[g], criterion);
            if (iou > best_iou) {
                best_iou = iou;
                best_gt = static_cast<int>(g);
            }
        }
        MatchResult::PerDetection& pd = result.detections[d];
        if (best_gt < 0) continue;  // false positive
        result.gt_matched[best_gt] = true;
        pd.gt_index = best_gt;
        pd.iou = best_iou;
        const bool ignored = gt_ignored && (*gt_ignored)[best_gt];
        pd.tp = !ignored;
        pd.excluded = ignored;
    }
    return result;
}

double ap_11(const std::vector<RecallPoint>& points) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
        const double anchor = static_cast<double>(i) / 10.0;
        double best = 0.0;
        for (const RecallPoint& p : points)
            if (p.recall >= anchor - 1e-12) best = std::max(best, p.value);
        sum += best;
    }
    return sum / 11.0;
}

double delta_mmd(double mmd_value) {
    return std::max(0.0, (0.05 - mmd_value) * 20.0);
}

double orientation_similarity(double yaw_a, double yaw_b) {
    return 0.5 * (1.0 + std::cos(yaw_a - yaw_b));
}

}  // namespace stereoshape
