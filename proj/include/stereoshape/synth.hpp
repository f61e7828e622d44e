#pragma once

// Deterministic synthetic scenes for end-to-end tests: simple laterally
// symmetric shape templates placed as 3D boxes, rendered to foreground masks
// and disparity patches through the camera model with a per-instance z-buffer.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stereoshape/instance.hpp"

namespace stereoshape {

enum class SynthShape : std::uint8_t { Sphere, BoxShell, ToyCar };

SynthShape synth_shape_from_string(const std::string& name);  // UnknownShape on bad names
std::string to_string(SynthShape shape);

struct SynthInstance {
    Box3D box;
    SynthShape shape = SynthShape::Sphere;
};

struct SynthScene {
    StereoRig rig;
    std::vector<SynthInstance> items;
    std::uint64_t seed = 1;
    std::size_t surface_samples = 20000;  // template samples per instance

    void validate() const;  // boxes must sit in front of the camera
};

// n points uniformly distributed on the template surface, in canonical OCS
// coordinates (unit length along x). Deterministic per seed.
PointCloud template_cloud(SynthShape shape, std::size_t n, std::uint64_t seed);

// Renders one instance: surface samples are placed into the scene, projected,
// and resolved per integer pixel with a z-buffer over the template's own
// surface. Returns the mask (pixel + disparity per winning sample) and the
// true visible partial cloud in CCS, in raster order.
std::pair<ForegroundMask, PointCloud> render_instance(const SynthScene& scene,
                                                      std::size_t index);

// Plain-text scene description (key = value per line) so fixtures diff well.
SynthScene parse_scene_config(const std::string& text, const std::string& source_label);
SynthScene load_scene_config(const std::string& path);

}  // namespace stereoshape
