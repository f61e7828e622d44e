#include "stereoshape/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "stereoshape/rng.hpp"

namespace stereoshape {

SynthShape synth_shape_from_string(const std::string& name) {
    if (name == "sphere") return SynthShape::Sphere;
    if (name == "box_shell") return SynthShape::BoxShell;
    if (name == "toy_car") return SynthShape::ToyCar;
    throw UnknownShape("unknown template shape \"" + name + "\"");
}

std::string to_string(SynthShape shape) {
    switch (shape) {
        case SynthShape::Sphere: return "sphere";
        case SynthShape::BoxShell: return "box_shell";
        case SynthShape::ToyCar: return "toy_car";
    }
    return "?";
}

void SynthScene::validate() const {
    for (const SynthInstance& item : items)
        if (!(item.box.center.z > 0.0))
            throw IndexOutOfRange("synth scene: boxes must lie in front of the camera");
}

namespace {

// Template dimensions in OCS units (length normalized to 1). The box shell
// and toy car use a car-like aspect so OCS-normalized partials line up with
// the canonical template.
constexpr double kBoxY = 0.375;  // full height
constexpr double kBoxZ = 0.4;    // full width

struct FacePatch {
    // Axis-aligned rectangle: origin corner plus two edge vectors.
    Vec3 origin;
    Vec3 edge_u;
    Vec3 edge_v;
    double area() const { return edge_u.cross(edge_v).norm(); }
};

std::vector<FacePatch> box_faces(double lx, double ly, double lz, const Vec3& center) {
    const double hx = 0.5 * lx, hy = 0.5 * ly, hz = 0.5 * lz;
    std::vector<FacePatch> faces;
    // +-x, +-y, +-z faces.
    faces.push_back({center + Vec3{hx, -hy, -hz}, {0, 2 * hy, 0}, {0, 0, 2 * hz}});
    faces.push_back({center + Vec3{-hx, -hy, -hz}, {0, 2 * hy, 0}, {0, 0, 2 * hz}});
    faces.push_back({center + Vec3{-hx, hy, -hz}, {2 * hx, 0, 0}, {0, 0, 2 * hz}});
    faces.push_back({center + Vec3{-hx, -hy, -hz}, {2 * hx, 0, 0}, {0, 0, 2 * hz}});
    faces.push_back({center + Vec3{-hx, -hy, hz}, {2 * hx, 0, 0}, {0, 2 * hy, 0}});
    faces.push_back({center + Vec3{-hx, -hy, -hz}, {2 * hx, 0, 0}, {0, 2 * hy, 0}});
    return faces;
}

PointCloud sample_faces(const std::vector<FacePatch>& faces, std::size_t n, Rng& rng) {
    std::vector<double> cumulative;
    double total = 0.0;
    for (const FacePatch& f : faces) {
        total += f.area();
        cumulative.push_back(total);
    }
    PointCloud cloud;
    cloud.frame = Frame::OCS;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = rng.next_double() * total;
        std::size_t f = 0;
        while (f + 1 < faces.size() && pick > cumulative[f]) ++f;
        const double a = rng.next_double();
        const double b = rng.next_double();
        cloud.points.push_back(faces[f].origin + faces[f].edge_u * a + faces[f].edge_v * b);
    }
    return cloud;
}

PointCloud sample_sphere(std::size_t n, Rng& rng) {
    PointCloud cloud;
    cloud.frame = Frame::OCS;
    cloud.points.reserve(n);
    while (cloud.points.size() < n) {
        Vec3 dir{rng.next_normal(), rng.next_normal(), rng.next_normal()};
        const double len = dir.norm();
        if (len < 1e-12) continue;
        cloud.points.push_back(dir * (0.5 / len));  // diameter-1 convention
    }
    return cloud;
}

// Box body with a half-cylinder cabin on top (up is -y in camera coords).
PointCloud sample_toy_car(std::size_t n, Rng& rng) {
    const double body_height = 0.25;
    const Vec3 body_center{0.0, kBoxY / 2.0 - body_height / 2.0, 0.0};
    const double cabin_r = 0.125;
    const double cabin_half_z = 0.15;
    const double body_y_top = body_center.y - body_height / 2.0;

    std::vector<FacePatch> faces = box_faces(1.0, body_height, kBoxZ, body_center);
    const double face_area =
        2.0 * (body_height * kBoxZ + 1.0 * kBoxZ + 1.0 * body_height);
    const double shell_area = M_PI * cabin_r * (2.0 * cabin_half_z);  // half-cylinder wall
    const double cap_area = M_PI * cabin_r * cabin_r;                 // two half-discs
    const double total = face_area + shell_area + cap_area;

    PointCloud cloud;
    cloud.frame = Frame::OCS;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = rng.next_double() * total;
        if (pick < face_area) {
            const double sub = rng.next_double() * face_area;
            double acc = 0.0;
            std::size_t f = 0;
            for (; f < faces.size(); ++f) {
                acc += faces[f].area();
                if (sub <= acc) break;
            }
            f = std::min(f, faces.size() - 1);
            const double a = rng.next_double();
            const double b = rng.next_double();
            cloud.points.push_back(faces[f].origin + faces[f].edge_u * a +
                                   faces[f].edge_v * b);
        } else if (pick < face_area + shell_area) {
            const double phi = M_PI * rng.next_double();  // upper half (y below body top)
            const double z = (2.0 * rng.next_double() - 1.0) * cabin_half_z;
            cloud.points.push_back({cabin_r * std::cos(phi),
                                    body_y_top - cabin_r * std::sin(phi), z});
        } else {
            // End caps at z = +-cabin_half_z: uniform in the half-disc.
            const double r = cabin_r * std::sqrt(rng.next_double());
            const double phi = M_PI * rng.next_double();
            const double side = rng.next_double() < 0.5 ? -1.0 : 1.0;
            cloud.points.push_back({r * std::cos(phi), body_y_top - r * std::sin(phi),
                                    side * cabin_half_z});
        }
    }
    return cloud;
}

}  // namespace

PointCloud template_cloud(SynthShape shape, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw IndexOutOfRange("template_cloud: n must be >= 1");
    Rng rng(seed);
    switch (shape) {
        case SynthShape::Sphere: return sample_sphere(n, rng);
        case SynthShape::BoxShell: {
            const auto faces = box_faces(1.0, kBoxY, kBoxZ, {0.0, 0.0, 0.0});
            return sample_faces(faces, n, rng);
        }
        case SynthShape::ToyCar: return sample_toy_car(n, rng);
    }
    throw UnknownShape("template_cloud: bad shape id");
}

std::pair<ForegroundMask, PointCloud> render_instance(const SynthScene& scene,
                                                      std::size_t index) {
    if (index >= scene.items.size())
        throw IndexOutOfRange("render_instance: no instance " + std::to_string(index));
    scene.validate();
    const SynthInstance& item = scene.items[index];

    const std::uint64_t seed =
        scene.seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1));
    const PointCloud surface_ocs = template_cloud(item.shape, scene.surface_samples, seed);
    const PointCloud surface_ccs = ocs_inverse(surface_ocs, item.box);

    // z-buffer at integer pixel sites over the instance's own surface. Random
    // surface samples are sparser than the raster, so each sample's depth is
    // splatted over a footprint sized by the sampling density; a sample stays
    // visible only if nothing meaningfully closer covers its own pixel.
    struct Projected {
        long u, v;
        double depth;
        Vec3 point;
    };
    std::vector<Projected> projected;
    projected.reserve(surface_ccs.points.size());
    long min_u = 0, max_u = 0, min_v = 0, max_v = 0;
    for (const Vec3& p : surface_ccs.points) {
        if (!(p.z > 0.0)) continue;
        const Pixel px = project(p, scene.rig.left);
        const Projected pr{std::lround(px.u), std::lround(px.v), p.z, p};
        if (projected.empty()) {
            min_u = max_u = pr.u;
            min_v = max_v = pr.v;
        } else {
            min_u = std::min(min_u, pr.u);
            max_u = std::max(max_u, pr.u);
            min_v = std::min(min_v, pr.v);
            max_v = std::max(max_v, pr.v);
        }
        projected.push_back(pr);
    }
    if (projected.empty()) throw EmptyMask();

    const std::size_t buf_w = static_cast<std::size_t>(max_u - min_u + 1);
    const std::size_t buf_h = static_cast<std::size_t>(max_v - min_v + 1);
    const double per_sample =
        static_cast<double>(buf_w * buf_h) / static_cast<double>(projected.size());
    // Footprint well above the mean sample spacing, so coverage gaps (which
    // would let occluded surface through) are vanishingly rare.
    const long splat =
        2 + static_cast<long>(std::ceil(std::sqrt(3.0 * std::max(1.0, per_sample))));

    std::vector<double> zbuf(buf_w * buf_h, std::numeric_limits<double>::infinity());
    for (const Projected& pr : projected) {
        for (long dv = -splat; dv <= splat; ++dv) {
            for (long du = -splat; du <= splat; ++du) {
                const long u = pr.u + du, v = pr.v + dv;
                if (u < min_u || u > max_u || v < min_v || v > max_v) continue;
                double& cell = zbuf[static_cast<std::size_t>(v - min_v) * buf_w +
                                    static_cast<std::size_t>(u - min_u)];
                cell = std::min(cell, pr.depth);
            }
        }
    }

    constexpr double kDepthSlack = 1.02;  // tolerate local surface slope
    struct Winner {
        double depth;
        Vec3 point;
    };
    std::map<std::pair<long, long>, Winner> raster;  // (v, u) -> nearest visible sample
    for (const Projected& pr : projected) {
        const double occluder = zbuf[static_cast<std::size_t>(pr.v - min_v) * buf_w +
                                     static_cast<std::size_t>(pr.u - min_u)];
        if (pr.depth > occluder * kDepthSlack) continue;
        const std::pair<long, long> site{pr.v, pr.u};
        const auto it = raster.find(site);
        if (it == raster.end() || pr.depth < it->second.depth) raster[site] = {pr.depth, pr.point};
    }

    // Tighten the RoI to the visible pixels.
    min_u = raster.begin()->first.second;
    max_u = min_u;
    min_v = raster.begin()->first.first;
    max_v = min_v;
    for (const auto& [site, w] : raster) {
        min_v = std::min(min_v, site.first);
        max_v = std::max(max_v, site.first);
        min_u = std::min(min_u, site.second);
        max_u = std::max(max_u, site.second);
    }

    ForegroundMask mask;
    mask.origin_u = static_cast<double>(min_u);
    mask.origin_v = static_cast<double>(min_v);
    mask.width = static_cast<std::size_t>(max_u - min_u + 1);
    mask.height = static_cast<std::size_t>(max_v - min_v + 1);

    PointCloud partial;
    partial.frame = Frame::CCS;
    for (const auto& [site, w] : raster) {  // std::map iterates in raster order
        MaskPixel m;
        m.px = {static_cast<double>(site.second), static_cast<double>(site.first)};
        m.disparity = depth_to_disparity(w.depth, scene.rig);
        mask.pixels.push_back(m);
        partial.points.push_back(w.point);
    }
    return {std::move(mask), std::move(partial)};
}

// --- scene config -------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double scene_double(const std::string& tok, const std::string& source, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MalformedLine(source, line, "bad numeric value \"" + tok + "\"");
    }
}

}  // namespace

SynthScene parse_scene_config(const std::string& text, const std::string& source_label) {
    SynthScene scene;
    double fx = 500.0, fy = 500.0, cx = 320.0, cy = 240.0, baseline = 0.54;
    std::istringstream iss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(iss, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw MalformedLine(source_label, line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "fx") fx = scene_double(value, source_label, line_no);
        else if (key == "fy") fy = scene_double(value, source_label, line_no);
        else if (key == "cx") cx = scene_double(value, source_label, line_no);
        else if (key == "cy") cy = scene_double(value, source_label, line_no);
        else if (key == "baseline") baseline = scene_double(value, source_label, line_no);
        else if (key == "seed")
            scene.seed = static_cast<std::uint64_t>(scene_double(value, source_label, line_no));
        else if (key == "surface_samples")
            scene.surface_samples =
                static_cast<std::size_t>(scene_double(value, source_label, line_no));
        else if (key == "instance") {
            std::vector<std::string> parts;
            std::istringstream ps(value);
            std::string tok;
            while (std::getline(ps, tok, ',')) parts.push_back(trim(tok));
            if (parts.size() != 8)
                throw MalformedLine(source_label, line_no,
                                    "instance needs shape, x, y, z, h, w, l, yaw");
            SynthInstance item;
            item.shape = synth_shape_from_string(parts[0]);
            const double x = scene_double(parts[1], source_label, line_no);
            const double y = scene_double(parts[2], source_label, line_no);
            const double z = scene_double(parts[3], source_label, line_no);
            const double h = scene_double(parts[4], source_label, line_no);
            const double w = scene_double(parts[5], source_label, line_no);
            const double l = scene_double(parts[6], source_label, line_no);
            const double yaw = scene_double(parts[7], source_label, line_no);
            item.box = Box3D({x, y, z}, h, w, l, yaw);
            scene.items.push_back(item);
        } else {
            throw MalformedLine(source_label, line_no, "unknown scene key \"" + key + "\"");
        }
    }
    scene.rig = StereoRig(CameraIntrinsics(fx, fy, cx, cy), baseline);
    scene.validate();
    return scene;
}

SynthScene load_scene_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene_config(buf.str(), path);
}

}  // namespace stereoshape
