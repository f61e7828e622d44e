#include "stereoshape/voxel.hpp"

#include <cmath>

#include "stereoshape/parallel.hpp"

namespace stereoshape {

FeatureGrid2D::FeatureGrid2D(const Tensor& t) {
    if (t.dims.size() != 3)
        throw ParseError("tensor", 0, "2D feature grid needs dims (height width channels)");
    height = t.dims[0];
    width = t.dims[1];
    channels = t.dims[2];
    values = t.values;
}

FeatureGrid3D::FeatureGrid3D(const Tensor& t) {
    if (t.dims.size() != 4)
        throw ParseError("tensor", 0,
                         "3D feature grid needs dims (levels height width channels)");
    levels = t.dims[0];
    height = t.dims[1];
    width = t.dims[2];
    channels = t.dims[3];
    values = t.values;
}

Vec3 voxel_center(std::size_t i, std::size_t j, std::size_t k, const VoxelGridSpec& spec) {
    spec.validate();
    if (i < 1 || i > spec.nx || j < 1 || j > spec.ny || k < 1 || k > spec.nz)
        throw IndexOutOfGrid("voxel index (" + std::to_string(i) + "," + std::to_string(j) +
                             "," + std::to_string(k) + ") outside grid");
    return {spec.start.x + static_cast<double>(i - 1) * spec.resolution.x,
            spec.start.y + static_cast<double>(j - 1) * spec.resolution.y,
            spec.start.z + static_cast<double>(k - 1) * spec.resolution.z};
}

namespace {

// Linear blend a + t * (b - a); exact at t == 0, so samples sitting on the
// last in-bounds site never pick up the zero padding beyond it.
inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Fetch one channel with zero padding outside the grid.
inline double fetch2(const FeatureGrid2D& g, long v, long u, std::size_t c) {
    if (u < 0 || v < 0 || u >= static_cast<long>(g.width) || v >= static_cast<long>(g.height))
        return 0.0;
    return g.at(static_cast<std::size_t>(v), static_cast<std::size_t>(u), c);
}

inline double fetch3(const FeatureGrid3D& g, long d, long v, long u, std::size_t c) {
    if (d < 0 || u < 0 || v < 0 || d >= static_cast<long>(g.levels) ||
        u >= static_cast<long>(g.width) || v >= static_cast<long>(g.height))
        return 0.0;
    return g.at(static_cast<std::size_t>(d), static_cast<std::size_t>(v),
                static_cast<std::size_t>(u), c);
}

}  // namespace

std::vector<double> bilinear_sample(const FeatureGrid2D& grid, const Pixel& px) {
    std::vector<double> out(grid.channels, 0.0);
    const double u0f = std::floor(px.u);
    const double v0f = std::floor(px.v);
    const long u0 = static_cast<long>(u0f);
    const long v0 = static_cast<long>(v0f);
    const double fu = px.u - u0f;
    const double fv = px.v - v0f;
    for (std::size_t c = 0; c < grid.channels; ++c) {
        const double top = lerp(fetch2(grid, v0, u0, c), fetch2(grid, v0, u0 + 1, c), fu);
        const double bot = lerp(fetch2(grid, v0 + 1, u0, c), fetch2(grid, v0 + 1, u0 + 1, c), fu);
        out[c] = lerp(top, bot, fv);
    }
    return out;
}

std::vector<double> trilinear_sample(const FeatureGrid3D& grid, const CostIndex& idx) {
    std::vector<double> out(grid.channels, 0.0);
    const double u0f = std::floor(idx.u);
    const double v0f = std::floor(idx.v);
    const double d0f = std::floor(idx.disparity);
    const long u0 = static_cast<long>(u0f);
    const long v0 = static_cast<long>(v0f);
    const long d0 = static_cast<long>(d0f);
    const double fu = idx.u - u0f;
    const double fv = idx.v - v0f;
    const double fd = idx.disparity - d0f;
    for (std::size_t c = 0; c < grid.channels; ++c) {
        const double t00 = lerp(fetch3(grid, d0, v0, u0, c), fetch3(grid, d0, v0, u0 + 1, c), fu);
        const double t01 =
            lerp(fetch3(grid, d0, v0 + 1, u0, c), fetch3(grid, d0, v0 + 1, u0 + 1, c), fu);
        const double t10 =
            lerp(fetch3(grid, d0 + 1, v0, u0, c), fetch3(grid, d0 + 1, v0, u0 + 1, c), fu);
        const double t11 = lerp(fetch3(grid, d0 + 1, v0 + 1, u0, c),
                                fetch3(grid, d0 + 1, v0 + 1, u0 + 1, c), fu);
        out[c] = lerp(lerp(t00, t01, fv), lerp(t10, t11, fv), fd);
    }
    return out;
}

CostIndex voxel_to_cost_index(const Vec3& p, const CameraIntrinsics& k, const StereoRig& rig,
                              unsigned downsample) {
    if (downsample == 0) downsample = 1;
    const Pixel px = project(p, k);
    const double disp = depth_to_disparity(p.z, rig);
    const double ds = static_cast<double>(downsample);
    return {px.u / ds, px.v / ds, disp / ds};
}

VoxelFeatureVolume aggregate_features(const VoxelGridSpec& spec, const CameraIntrinsics& k,
                                      const StereoRig& rig, const FeatureGrid2D& semantic,
                                      const FeatureGrid3D& cost, unsigned downsample,
                                      unsigned jobs) {
    spec.validate();
    if (semantic.values.empty() || cost.values.empty())
        throw IndexOutOfGrid("aggregate_features: feature grids must be non-empty");
    if (downsample == 0) downsample = 1;

    VoxelFeatureVolume vol;
    vol.spec = spec;
    vol.channels = cost.channels + semantic.channels;
    vol.values.assign(spec.voxel_count() * vol.channels, 0.0);

    const double ds = static_cast<double>(downsample);
    parallel_for(spec.nx, jobs, [&](std::size_t i0) {
        for (std::size_t j0 = 0; j0 < spec.ny; ++j0) {
            for (std::size_t k0 = 0; k0 < spec.nz; ++k0) {
                const Vec3 center = voxel_center(i0 + 1, j0 + 1, k0 + 1, spec);
                if (!(center.z > 0.0)) continue;  // behind the camera: stays zero
                const Pixel full = project(center, k);
                const Pixel px{full.u / ds, full.v / ds};
                const CostIndex ci{px.u, px.v, depth_to_disparity(center.z, rig) / ds};
                const std::vector<double> geom = trilinear_sample(cost, ci);
                const std::vector<double> sem = bilinear_sample(semantic, px);
                double* dst = &vol.at(i0, j0, k0, 0);
                for (std::size_t c = 0; c < cost.channels; ++c) dst[c] = geom[c];
                for (std::size_t c = 0; c < semantic.channels; ++c)
                    dst[cost.channels + c] = sem[c];
            }
        }
    });
    return vol;
}

BevGrid bev_reduce(const VoxelFeatureVolume& volume) {
    BevGrid bev;
    bev.nx = volume.spec.nx;
    bev.nz = volume.spec.nz;
    bev.channels = volume.channels;
    bev.values.assign(bev.nx * bev.nz * bev.channels, 0.0);
    const double inv_ny = 1.0 / static_cast<double>(volume.spec.ny);
    for (std::size_t i = 0; i < bev.nx; ++i)
        for (std::size_t j = 0; j < volume.spec.ny; ++j)
            for (std::size_t k = 0; k < bev.nz; ++k)
                for (std::size_t c = 0; c < bev.channels; ++c)
                    bev.at(i, k, c) += volume.at(i, j, k, c);
    for (double& v : bev.values) v *= inv_ny;
    return bev;
}

}  // namespace stereoshape
