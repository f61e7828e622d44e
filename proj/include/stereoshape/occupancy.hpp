#pragma once

// Implicit-shape decoding: occupancy fields queried on arbitrary grids,
// isosurface extraction with the classic marching-cubes lookup, and
// mixed-resolution extraction where each axis-aligned region of the domain
// is meshed at its own grid density.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stereoshape/geometry.hpp"
#include "stereoshape/tensor_io.hpp"

namespace stereoshape {

// Scalar field mapping an OCS point to an in-object confidence in [0, 1].
// Implementations must be pure and deterministic; 0.5 is the surface.
class OccupancyField {
public:
    virtual ~OccupancyField() = default;
    virtual double query(const Vec3& p) const = 0;
};

enum class AnalyticShape : std::uint8_t { Sphere, AxisBox, Superellipsoid };

// Closed-form occupancy: a logistic ramp over the signed distance of a
// simple solid, so the 0.5 level sits exactly on the analytic surface.
class AnalyticField final : public OccupancyField {
public:
    // Sphere: params = {radius}. AxisBox: params = half-extents {hx, hy, hz}.
    // Superellipsoid: {a, b, c, exponent}. boundary_width controls how fast
    // confidence falls off across the surface.
    AnalyticField(AnalyticShape shape, std::vector<double> params,
                  double boundary_width = 0.05, const Vec3& center = {});

    double query(const Vec3& p) const override;
    double signed_distance(const Vec3& p) const;

private:
    AnalyticShape shape_;
    std::vector<double> params_;
    double width_;
    Vec3 center_;
};

// Regular lattice of confidences with trilinear interpolation between nodes;
// zero outside the lattice domain. Stand-in for a precomputed decoder output.
class TabulatedField final : public OccupancyField {
public:
    TabulatedField(Vec3 min_corner, Vec3 max_corner, std::size_t nx, std::size_t ny,
                   std::size_t nz, std::vector<double> values);

    // Tensor dims (nx, ny, nz) over the given domain.
    static TabulatedField from_tensor(const Tensor& t, const Vec3& min_corner,
                                      const Vec3& max_corner);

    double query(const Vec3& p) const override;

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    double node_value(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * ny_ + j) * nz_ + k];
    }
    Vec3 node_position(std::size_t i, std::size_t j, std::size_t k) const;

private:
    Vec3 min_, max_;
    std::size_t nx_, ny_, nz_;
    std::vector<double> values_;
};

// Explicit query-point list; not necessarily uniform.
struct SampleGrid {
    std::vector<Vec3> points;
};

// Field values order-aligned with the grid points. Throws IndexOutOfRange
// when the grid is empty.
std::vector<double> query_field(const OccupancyField& field, const SampleGrid& grid);

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }
};

// Uniform node lattice over an axis-aligned domain; nx/ny/nz are node counts
// per axis (>= 2 each for meshing).
struct IsoGridSpec {
    Vec3 min_corner{-0.5, -0.5, -0.5};
    Vec3 max_corner{0.5, 0.5, 0.5};
    std::size_t nx = 32, ny = 32, nz = 32;

    Vec3 cell_size() const {
        return {(max_corner.x - min_corner.x) / static_cast<double>(nx - 1),
                (max_corner.y - min_corner.y) / static_cast<double>(ny - 1),
                (max_corner.z - min_corner.z) / static_cast<double>(nz - 1)};
    }
    void validate() const;
};

// Classic marching cubes at the given iso level. Vertices lie on cell edges
// (linear interpolation) and are shared between adjacent cells; indices are
// assigned in cell-lattice order so the output is schedule-independent. An
// empty mesh is a valid result when no cell straddles the iso level.
TriangleMesh marching_cubes(const OccupancyField& field, const IsoGridSpec& grid,
                            double iso = 0.5);

// Per-region extraction: the regions must partition an axis-aligned domain
// along one axis (equal extents elsewhere, contiguous along the split).
// Region meshes are concatenated; seam vertices are not welded, so T-junction
// cracks along the split planes are expected. Throws InvalidPartition.
TriangleMesh mixed_resolution_extract(const OccupancyField& field,
                                      const std::vector<IsoGridSpec>& regions,
                                      double iso = 0.5);

// Unit per-triangle normals, oriented outward: against the field gradient at
// the triangle centroid (occupancy decreases outward). Throws EmptyMesh.
std::vector<Vec3> estimate_normals(const TriangleMesh& mesh, const OccupancyField& field,
                                   double gradient_step = 1e-4);

}  // namespace stereoshape
