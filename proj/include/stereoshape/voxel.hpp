#pragma once

// Global scene voxel grid: voxel center enumeration, projection onto the
// image, bilinear/trilinear feature warping, cost-volume indexing and BEV
// height reduction over generic numeric feature grids.
//
// Samples that fall outside a grid blend against zeros (the volume stays
// shape-total); whether out-of-frame voxels should instead clamp is not
// defined by the source method, zero padding is this library's choice.

#include <cstddef>
#include <vector>

#include "stereoshape/geometry.hpp"
#include "stereoshape/tensor_io.hpp"

namespace stereoshape {

struct VoxelGridSpec {
    std::size_t nx = 304, ny = 20, nz = 288;
    Vec3 start{-30.0, -1.0, 2.0};          // center of voxel (1,1,1), meters
    Vec3 resolution{0.2, 0.2, 0.2};        // meters per step

    std::size_t voxel_count() const { return nx * ny * nz; }

    void validate() const {
        if (nx < 1 || ny < 1 || nz < 1)
            throw IndexOutOfGrid("voxel grid counts must be >= 1");
        if (resolution.x <= 0.0 || resolution.y <= 0.0 || resolution.z <= 0.0)
            throw IndexOutOfGrid("voxel resolutions must be positive");
    }
};

// Dense H x W x C grid of 32-bit values (image-like feature map).
struct FeatureGrid2D {
    std::size_t height = 0, width = 0, channels = 0;
    std::vector<float> values;  // (v, u, c) row-major

    FeatureGrid2D() = default;
    FeatureGrid2D(std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
        : height(h), width(w), channels(c), values(h * w * c, fill) {}
    explicit FeatureGrid2D(const Tensor& t);

    float& at(std::size_t v, std::size_t u, std::size_t c) {
        return values[(v * width + u) * channels + c];
    }
    float at(std::size_t v, std::size_t u, std::size_t c) const {
        return values[(v * width + u) * channels + c];
    }
};

// Dense D x H x W x C cost-feature stack; D indexes disparity levels.
struct FeatureGrid3D {
    std::size_t levels = 0, height = 0, width = 0, channels = 0;
    std::vector<float> values;  // (d, v, u, c) row-major

    FeatureGrid3D() = default;
    FeatureGrid3D(std::size_t d, std::size_t h, std::size_t w, std::size_t c, float fill = 0.0f)
        : levels(d), height(h), width(w), channels(c), values(d * h * w * c, fill) {}
    explicit FeatureGrid3D(const Tensor& t);

    float& at(std::size_t d, std::size_t v, std::size_t u, std::size_t c) {
        return values[((d * height + v) * width + u) * channels + c];
    }
    float at(std::size_t d, std::size_t v, std::size_t u, std::size_t c) const {
        return values[((d * height + v) * width + u) * channels + c];
    }
};

// Per-voxel feature vectors, shape (nx, ny, nz, channels).
struct VoxelFeatureVolume {
    VoxelGridSpec spec;
    std::size_t channels = 0;
    std::vector<double> values;  // (i, j, k, c) row-major, 0-based

    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) {
        return values[((i * spec.ny + j) * spec.nz + k) * channels + c];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) const {
        return values[((i * spec.ny + j) * spec.nz + k) * channels + c];
    }
};

// Ground-plane feature map produced by bev_reduce, shape (nx, nz, channels).
struct BevGrid {
    std::size_t nx = 0, nz = 0, channels = 0;
    std::vector<double> values;

    double& at(std::size_t i, std::size_t k, std::size_t c) {
        return values[(i * nz + k) * channels + c];
    }
    double at(std::size_t i, std::size_t k, std::size_t c) const {
        return values[(i * nz + k) * channels + c];
    }
};

// Continuous (u, v, disparity) cost-volume index for a CCS point.
struct CostIndex {
    double u = 0.0;
    double v = 0.0;
    double disparity = 0.0;
};

// Center of voxel (i, j, k), 1-based indices: start + (index - 1) * resolution.
// Throws IndexOutOfGrid when an index falls outside the grid.
Vec3 voxel_center(std::size_t i, std::size_t j, std::size_t k, const VoxelGridSpec& spec);

// Bilinear blend of the 4 neighboring sites; exact at integer coordinates,
// zero contribution from sites outside the grid.
std::vector<double> bilinear_sample(const FeatureGrid2D& grid, const Pixel& px);

// Trilinear blend over (u, v, disparity) with the same zero-padding rule.
std::vector<double> trilinear_sample(const FeatureGrid3D& grid, const CostIndex& idx);

// Projection and disparity of a CCS point, both divided by the grid
// downsample factor. Throws NonPositiveDepth.
CostIndex voxel_to_cost_index(const Vec3& p, const CameraIntrinsics& k, const StereoRig& rig,
                              unsigned downsample);

// Per-voxel concatenation of the trilinear cost sample and the bilinear
// semantic sample at the voxel's projection. Voxels behind the camera or
// projecting out of bounds get zeros. Pure gather; parallelized over the
// x-axis with bit-identical output regardless of thread count.
VoxelFeatureVolume aggregate_features(const VoxelGridSpec& spec, const CameraIntrinsics& k,
                                      const StereoRig& rig, const FeatureGrid2D& semantic,
                                      const FeatureGrid3D& cost, unsigned downsample,
                                      unsigned jobs = 1);

// Arithmetic mean over the height (j) axis.
BevGrid bev_reduce(const VoxelFeatureVolume& volume);

}  // namespace stereoshape
