#pragma once

// Strict parsers and writers for the KITTI object-detection text formats,
// plus mesh / point-cloud / raster exporters. Parsers reject malformed input
// with a located error instead of guessing; all text output is line-oriented
// with "\n" terminators and 6-significant-digit floats so identical inputs
// produce byte-identical files.

#include <optional>
#include <string>
#include <vector>

#include "stereoshape/instance.hpp"
#include "stereoshape/metrics.hpp"
#include "stereoshape/occupancy.hpp"

namespace stereoshape {

// One line of a KITTI label or prediction file (15 or 16 fields).
struct LabelRecord {
    std::string type;
    double truncated = 0.0;
    int occluded = 0;
    double alpha = 0.0;
    Rect2D bbox;
    double height = 0.0, width = 0.0, length = 0.0;  // meters
    Vec3 location;                                   // bottom-center, camera coords
    double rotation_y = 0.0;
    std::optional<double> score;
    bool dont_care = false;
};

// Left/right color-camera projection matrices and what falls out of them.
struct CalibRecord {
    std::array<double, 12> p2{};
    std::array<double, 12> p3{};
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    double baseline_m = 0.0;

    CameraIntrinsics intrinsics() const { return {fx, fy, cx, cy}; }
    StereoRig rig() const { return {intrinsics(), baseline_m}; }
};

std::vector<LabelRecord> parse_label_file(const std::string& text,
                                          const std::string& source_label);
std::string write_label_file(const std::vector<LabelRecord>& records);

CalibRecord parse_calib_file(const std::string& text, const std::string& source_label);

// KITTI locations are bottom-center; Box3D is center-based, so y is lifted
// by half the box height.
Box3D box_from_label(const LabelRecord& record);
GroundTruthObject ground_truth_from_label(const LabelRecord& record);
Detection detection_from_label(const LabelRecord& record);

// --- meshes and clouds ------------------------------------------------------

std::string write_mesh_obj(const TriangleMesh& mesh);
TriangleMesh parse_mesh_obj(const std::string& text, const std::string& source_label);

std::string write_mesh_stl(const TriangleMesh& mesh);  // binary little-endian
TriangleMesh parse_mesh_stl(const std::string& bytes, const std::string& source_label);

std::string write_cloud_ply(const PointCloud& cloud);  // ascii, valid points only
PointCloud parse_cloud_ply(const std::string& text, const std::string& source_label,
                           Frame frame = Frame::OCS);

std::string write_cloud_xyz(const PointCloud& cloud);
PointCloud parse_cloud_xyz(const std::string& text, const std::string& source_label,
                           Frame frame = Frame::OCS);

// --- rasters ----------------------------------------------------------------

// 8-bit binary PGM (P5, maxval 255).
struct GrayImage {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, top-down

    std::uint8_t at(std::size_t row, std::size_t col) const {
        return pixels[row * width + col];
    }
};

std::string write_pgm(const GrayImage& image);
GrayImage parse_pgm(const std::string& bytes, const std::string& source_label);

// 32-bit float PFM (grayscale "Pf", little-endian, bottom-up scanlines).
struct FloatImage {
    std::size_t width = 0, height = 0;
    std::vector<float> pixels;  // row-major, top-down

    float at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

std::string write_pfm(const FloatImage& image);
FloatImage parse_pfm(const std::string& bytes, const std::string& source_label);

// Mask <-> raster pair: the PGM holds 0 (background) / 255 (foreground) over
// the RoI, the PFM holds per-pixel disparities (0 where background).
std::pair<GrayImage, FloatImage> mask_to_images(const ForegroundMask& mask);
ForegroundMask mask_from_images(const GrayImage& mask_image, const FloatImage& disparity,
                                double origin_u, double origin_v,
                                const std::string& source_label);

// --- files ------------------------------------------------------------------

std::string read_file(const std::string& path);             // throws IoFailure
void write_file(const std::string& path, const std::string& content);

// Sorted *.ply / *.xyz clouds from a directory, file stem as template name.
TemplateLibrary load_template_library(const std::string& dir, std::size_t resample_n);

}  // namespace stereoshape
