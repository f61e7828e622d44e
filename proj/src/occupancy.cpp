#include "stereoshape/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mc_tables.hpp"

namespace stereoshape {

AnalyticField::AnalyticField(AnalyticShape shape, std::vector<double> params,
                             double boundary_width, const Vec3& center)
    : shape_(shape), params_(std::move(params)), width_(boundary_width), center_(center) {
    const std::size_t expected = shape == AnalyticShape::Sphere          ? 1
                                 : shape == AnalyticShape::AxisBox       ? 3
                                                                         : 4;
    if (params_.size() != expected)
        throw UnknownShape("analytic field: wrong parameter count");
    for (double p : params_)
        if (!(p > 0.0)) throw UnknownShape("analytic field: parameters must be positive");
    if (!(width_ > 0.0)) throw UnknownShape("analytic field: boundary width must be positive");
}

double AnalyticField::signed_distance(const Vec3& p) const {
    const Vec3 q = p - center_;
    switch (shape_) {
        case AnalyticShape::Sphere:
            return q.norm() - params_[0];
        case AnalyticShape::AxisBox: {
            const Vec3 d{std::abs(q.x) - params_[0], std::abs(q.y) - params_[1],
                         std::abs(q.z) - params_[2]};
            const Vec3 outside{std::max(d.x, 0.0), std::max(d.y, 0.0), std::max(d.z, 0.0)};
            const double inside = std::min(0.0, std::max(d.x, std::max(d.y, d.z)));
            return outside.norm() + inside;
        }
        case AnalyticShape::Superellipsoid: {
            const double e = params_[3];
            const double r = std::pow(std::pow(std::abs(q.x) / params_[0], e) +
                                          std::pow(std::abs(q.y) / params_[1], e) +
                                          std::pow(std::abs(q.z) / params_[2], e),
                                      1.0 / e);
            const double scale = std::min(params_[0], std::min(params_[1], params_[2]));
            return (r - 1.0) * scale;
        }
    }
    return 0.0;
}

double AnalyticField::query(const Vec3& p) const {
    // Logistic in the signed distance: 0.5 exactly on the surface, >0.5 inside.
    return 1.0 / (1.0 + std::exp(signed_distance(p) / width_));
}

TabulatedField::TabulatedField(Vec3 min_corner, Vec3 max_corner, std::size_t nx,
                               std::size_t ny, std::size_t nz, std::vector<double> values)
    : min_(min_corner), max_(max_corner), nx_(nx), ny_(ny), nz_(nz), values_(std::move(values)) {
    if (nx_ < 2 || ny_ < 2 || nz_ < 2)
        throw IndexOutOfGrid("tabulated field needs >= 2 nodes per axis");
    if (values_.size() != nx_ * ny_ * nz_)
        throw IndexOutOfGrid("tabulated field: value count does not match lattice");
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0))
            throw IndexOutOfGrid("tabulated field: confidences must lie in [0, 1]");
    if (!(max_.x > min_.x && max_.y > min_.y && max_.z > min_.z))
        throw IndexOutOfGrid("tabulated field: empty domain");
}

TabulatedField TabulatedField::from_tensor(const Tensor& t, const Vec3& min_corner,
                                           const Vec3& max_corner) {
    if (t.dims.size() != 3)
        throw ParseError("tensor", 0, "tabulated field needs dims (nx ny nz)");
    std::vector<double> values(t.values.begin(), t.values.end());
    return TabulatedField(min_corner, max_corner, t.dims[0], t.dims[1], t.dims[2],
                          std::move(values));
}

Vec3 TabulatedField::node_position(std::size_t i, std::size_t j, std::size_t k) const {
    return {min_.x + (max_.x - min_.x) * static_cast<double>(i) / static_cast<double>(nx_ - 1),
            min_.y + (max_.y - min_.y) * static_cast<double>(j) / static_cast<double>(ny_ - 1),
            min_.z + (max_.z - min_.z) * static_cast<double>(k) / static_cast<double>(nz_ - 1)};
}

double TabulatedField::query(const Vec3& p) const {
    const double gx = (p.x - min_.x) / (max_.x - min_.x) * static_cast<double>(nx_ - 1);
    const double gy = (p.y - min_.y) / (max_.y - min_.y) * static_cast<double>(ny_ - 1);
    const double gz = (p.z - min_.z) / (max_.z - min_.z) * static_cast<double>(nz_ - 1);
    if (gx < 0.0 || gy < 0.0 || gz < 0.0 || gx > static_cast<double>(nx_ - 1) ||
        gy > static_cast<double>(ny_ - 1) || gz > static_cast<double>(nz_ - 1))
        return 0.0;

    const auto low = [](double g, std::size_t n) {
        return std::min(static_cast<std::size_t>(g), n - 2);
    };
    const std::size_t i0 = low(gx, nx_), j0 = low(gy, ny_), k0 = low(gz, nz_);
    const double fx = gx - static_cast<double>(i0);
    const double fy = gy - static_cast<double>(j0);
    const double fz = gz - static_cast<double>(k0);

    const auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
    const double c00 = lerp(node_value(i0, j0, k0), node_value(i0 + 1, j0, k0), fx);
    const double c10 = lerp(node_value(i0, j0 + 1, k0), node_value(i0 + 1, j0 + 1, k0), fx);
    const double c01 = lerp(node_value(i0, j0, k0 + 1), node_value(i0 + 1, j0, k0 + 1), fx);
    const double c11 =
        lerp(node_value(i0, j0 + 1, k0 + 1), node_value(i0 + 1, j0 + 1, k0 + 1), fx);
    return lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz);
}

std::vector<double> query_field(const OccupancyField& field, const SampleGrid& grid) {
    if (grid.points.empty()) throw IndexOutOfRange("query_field: empty sample grid");
    std::vector<double> out;
    out.reserve(grid.points.size());
    for (const Vec3& p : grid.points) out.push_back(field.query(p));
    return out;
}

void IsoGridSpec::validate() const {
    if (nx < 2 || ny < 2 || nz < 2)
        throw IndexOutOfGrid("iso grid needs >= 2 nodes per axis");
    if (!(max_corner.x > min_corner.x && max_corner.y > min_corner.y &&
          max_corner.z > min_corner.z))
        throw IndexOutOfGrid("iso grid: empty domain");
}

namespace {

// Global edge key: owning node index plus the axis the edge runs along.
struct EdgeKey {
    std::uint64_t node;
    int axis;
    bool operator==(const EdgeKey& o) const { return node == o.node && axis == o.axis; }
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const {
        return std::hash<std::uint64_t>()(k.node * 3u + static_cast<std::uint64_t>(k.axis));
    }
};

// Corner offsets in table order (see mc_tables.hpp).
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

// Edge -> (corner a, corner b) in table order.
constexpr int kEdgeCorner[12][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6},
                                    {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Axis the edge runs along.
constexpr int kEdgeAxis[12] = {0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2};

}  // namespace

TriangleMesh marching_cubes(const OccupancyField& field, const IsoGridSpec& grid, double iso) {
    grid.validate();
    const std::size_t nx = grid.nx, ny = grid.ny, nz = grid.nz;
    const Vec3 cell = grid.cell_size();

    // Sample every lattice node once.
    std::vector<double> values(nx * ny * nz);
    const auto node_id = [&](std::size_t i, std::size_t j, std::size_t k) {
        return (i * ny + j) * nz + k;
    };
    const auto node_pos = [&](std::size_t i, std::size_t j, std::size_t k) {
        return Vec3{grid.min_corner.x + cell.x * static_cast<double>(i),
                    grid.min_corner.y + cell.y * static_cast<double>(j),
                    grid.min_corner.z + cell.z * static_cast<double>(k)};
    };
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k)
                values[node_id(i, j, k)] = field.query(node_pos(i, j, k));

    TriangleMesh mesh;
    std::unordered_map<EdgeKey, std::uint32_t, EdgeKeyHash> edge_vertex;

    // Vertex on the edge that starts at node (i,j,k) and runs along axis;
    // interpolated in canonical node order so both adjacent cells agree.
    const auto edge_point = [&](std::size_t i, std::size_t j, std::size_t k,
                                int axis) -> std::uint32_t {
        const EdgeKey key{node_id(i, j, k), axis};
        const auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;

        const std::size_t i2 = i + (axis == 0), j2 = j + (axis == 1), k2 = k + (axis == 2);
        const double va = values[node_id(i, j, k)];
        const double vb = values[node_id(i2, j2, k2)];
        const Vec3 pa = node_pos(i, j, k);
        const Vec3 pb = node_pos(i2, j2, k2);
        const double t = va == vb ? 0.5 : (iso - va) / (vb - va);
        const Vec3 p = pa + (pb - pa) * t;

        const std::uint32_t index = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(p);
        edge_vertex.emplace(key, index);
        return index;
    };

    for (std::size_t i = 0; i + 1 < nx; ++i) {
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            for (std::size_t k = 0; k + 1 < nz; ++k) {
                unsigned caseindex = 0;
                double corner_val[8];
                for (int c = 0; c < 8; ++c) {
                    corner_val[c] = values[node_id(i + kCorner[c][0], j + kCorner[c][1],
                                                   k + kCorner[c][2])];
                    if (corner_val[c] < iso) caseindex |= 1u << c;
                }
                const std::uint16_t edges = kMcEdgeTable[caseindex];
                if (edges == 0) continue;

                std::uint32_t edge_index[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1u << e))) continue;
                    const int ca = kEdgeCorner[e][0];
                    const int cb = kEdgeCorner[e][1];
                    // Owning node = the lower of the two endpoints.
                    const std::size_t oi = i + std::min(kCorner[ca][0], kCorner[cb][0]);
                    const std::size_t oj = j + std::min(kCorner[ca][1], kCorner[cb][1]);
                    const std::size_t ok = k + std::min(kCorner[ca][2], kCorner[cb][2]);
                    edge_index[e] = edge_point(oi, oj, ok, kEdgeAxis[e]);
                }

                const std::int8_t* tri = kMcTriangleTable[caseindex];
                for (int t = 0; t < 16 && tri[t] >= 0; t += 3) {
                    const std::uint32_t a = edge_index[tri[t]];
                    const std::uint32_t b = edge_index[tri[t + 1]];
                    const std::uint32_t c = edge_index[tri[t + 2]];
                    if (a == b || b == c || a == c) continue;
                    const Vec3 ab = mesh.vertices[b] - mesh.vertices[a];
                    const Vec3 ac = mesh.vertices[c] - mesh.vertices[a];
                    if (ab.cross(ac).squared_norm() == 0.0) continue;  // degenerate
                    mesh.triangles.push_back({a, b, c});
                }
            }
        }
    }
    return mesh;
}

TriangleMesh mixed_resolution_extract(const OccupancyField& field,
                                      const std::vector<IsoGridSpec>& regions, double iso) {
    if (regions.empty()) throw InvalidPartition("no regions given");
    for (const IsoGridSpec& r : regions) r.validate();
    if (regions.size() > 1) {
        // Find the split axis: extents must agree on the other two axes and
        // tile contiguously along it.
        const auto lo = [](const IsoGridSpec& r, int a) {
            return a == 0 ? r.min_corner.x : a == 1 ? r.min_corner.y : r.min_corner.z;
        };
        const auto hi = [](const IsoGridSpec& r, int a) {
            return a == 0 ? r.max_corner.x : a == 1 ? r.max_corner.y : r.max_corner.z;
        };
        int split_axis = -1;
        for (int a = 0; a < 3 && split_axis < 0; ++a) {
            bool same_elsewhere = true;
            for (const IsoGridSpec& r : regions)
                for (int b = 0; b < 3; ++b)
                    if (b != a && (lo(r, b) != lo(regions[0], b) || hi(r, b) != hi(regions[0], b)))
                        same_elsewhere = false;
            if (!same_elsewhere) continue;
            std::vector<std::pair<double, double>> spans;
            for (const IsoGridSpec& r : regions) spans.emplace_back(lo(r, a), hi(r, a));
            std::sort(spans.begin(), spans.end());
            bool contiguous = true;
            for (std::size_t s = 0; s + 1 < spans.size(); ++s)
                if (std::abs(spans[s].second - spans[s + 1].first) > 1e-12) contiguous = false;
            if (contiguous) split_axis = a;
        }
        if (split_axis < 0)
            throw InvalidPartition("regions must partition the domain along one axis");
    }

    TriangleMesh out;
    for (const IsoGridSpec& region : regions) {
        const TriangleMesh part = marching_cubes(field, region, iso);
        const std::uint32_t base = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
        for (const auto& t : part.triangles)
            out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
    return out;
}

std::vector<Vec3> estimate_normals(const TriangleMesh& mesh, const OccupancyField& field,
                                   double gradient_step) {
    if (mesh.empty()) throw EmptyMesh();
    std::vector<Vec3> normals;
    normals.reserve(mesh.triangles.size());
    const double h = gradient_step;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Vec3 n = (b - a).cross(c - a);
        const double len = n.norm();
        if (len > 0.0) n = n / len;
        const Vec3 centroid = (a + b + c) / 3.0;
        const Vec3 grad{
            (field.query({centroid.x + h, centroid.y, centroid.z}) -
             field.query({centroid.x - h, centroid.y, centroid.z})) /
                (2.0 * h),
            (field.query({centroid.x, centroid.y + h, centroid.z}) -
             field.query({centroid.x, centroid.y - h, centroid.z})) /
                (2.0 * h),
            (field.query({centroid.x, centroid.y, centroid.z + h}) -
             field.query({centroid.x, centroid.y, centroid.z - h})) /
                (2.0 * h)};
        if (n.dot(grad) > 0.0) n = n * -1.0;  // outward: occupancy decreases
        normals.push_back(n);
    }
    return normals;
}

}  // namespace stereoshape
