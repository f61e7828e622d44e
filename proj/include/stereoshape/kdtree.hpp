#pragma once

// Static 3D k-d tree for exact nearest-neighbor queries. Median split over
// the widest axis, leaves of a few points, no dynamic updates. Candidate
// distances go through squared_distance() so results agree bit for bit with
// a brute-force scan over the same points.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "stereoshape/geometry.hpp"

namespace stereoshape {

class KdTree3 {
public:
    KdTree3() = default;

    explicit KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
        indices_.resize(points_.size());
        for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = i;
        if (!points_.empty()) {
            nodes_.reserve(2 * points_.size() / kLeafSize + 2);
            root_ = build(0, points_.size());
        }
    }

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

    struct Hit {
        std::size_t index = 0;
        double squared_dist = 0.0;
    };

    // Exact nearest neighbor; tree must be non-empty.
    Hit nearest(const Vec3& query) const {
        Hit best;
        best.squared_dist = std::numeric_limits<double>::infinity();
        search(root_, query, best);
        return best;
    }

private:
    static constexpr std::size_t kLeafSize = 8;

    struct Node {
        double split = 0.0;
        int axis = -1;             // -1 marks a leaf
        std::size_t begin = 0;     // leaf: range into indices_
        std::size_t end = 0;
        int left = -1;
        int right = -1;
    };

    static double coord(const Vec3& p, int axis) {
        return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
    }

    int build(std::size_t begin, std::size_t end) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        if (end - begin <= kLeafSize) {
            nodes_[node_id].begin = begin;
            nodes_[node_id].end = end;
            return node_id;
        }

        Vec3 lo = points_[indices_[begin]];
        Vec3 hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const Vec3& p = points_[indices_[i]];
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        const Vec3 extent = hi - lo;
        int axis = 0;
        if (extent.y > extent.x) axis = 1;
        if (extent.z > coord(extent, axis)) axis = 2;

        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                         indices_.begin() + end, [&](std::size_t a, std::size_t b) {
                             return coord(points_[a], axis) < coord(points_[b], axis);
                         });

        nodes_[node_id].axis = axis;
        nodes_[node_id].split = coord(points_[indices_[mid]], axis);
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[node_id].left = left;
        nodes_[node_id].right = right;
        return node_id;
    }

    void search(int node_id, const Vec3& query, Hit& best) const {
        const Node& node = nodes_[node_id];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = indices_[i];
                const double d2 = squared_distance(points_[idx], query);
                if (d2 < best.squared_dist) {
                    best.squared_dist = d2;
                    best.index = idx;
                }
            }
            return;
        }
        const double delta = coord(query, node.axis) - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        search(near, query, best);
        if (delta * delta < best.squared_dist) search(far, query, best);
    }

    std::vector<Vec3> points_;
    std::vector<std::size_t> indices_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace stereoshape
