#include "stereoshape/kitti_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stereoshape {

namespace {

std::string fmt_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

double strict_double(const std::string& tok, const std::string& source, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw MalformedLine(source, line, "bad number \"" + tok + "\"");
    if (!std::isfinite(v))
        throw MalformedLine(source, line, "non-finite number \"" + tok + "\"");
    return v;
}

long strict_int(const std::string& tok, const std::string& source, std::size_t line) {
    long v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw MalformedLine(source, line, "bad integer \"" + tok + "\"");
    return v;
}

}  // namespace

std::vector<LabelRecord> parse_label_file(const std::string& text,
                                          const std::string& source_label) {
    std::vector<LabelRecord> records;
    std::istringstream iss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 15 && tok.size() != 16)
            throw MalformedLine(source_label, line_no,
                                "expected 15 or 16 fields, got " + std::to_string(tok.size()));
        LabelRecord r;
        r.type = tok[0];
        r.dont_care = (r.type == "DontCare");
        r.truncated = strict_double(tok[1], source_label, line_no);
        r.occluded = static_cast<int>(strict_int(tok[2], source_label, line_no));
        r.alpha = strict_double(tok[3], source_label, line_no);
        r.bbox.left = strict_double(tok[4], source_label, line_no);
        r.bbox.top = strict_double(tok[5], source_label, line_no);
        r.bbox.right = strict_double(tok[6], source_label, line_no);
        r.bbox.bottom = strict_double(tok[7], source_label, line_no);
        r.height = strict_double(tok[8], source_label, line_no);
        r.width = strict_double(tok[9], source_label, line_no);
        r.length = strict_double(tok[10], source_label, line_no);
        r.location.x = strict_double(tok[11], source_label, line_no);
        r.location.y = strict_double(tok[12], source_label, line_no);
        r.location.z = strict_double(tok[13], source_label, line_no);
        r.rotation_y = strict_double(tok[14], source_label, line_no);
        if (tok.size() == 16) r.score = strict_double(tok[15], source_label, line_no);
        if (r.bbox.right < r.bbox.left || r.bbox.bottom < r.bbox.top)
            throw MalformedLine(source_label, line_no, "inverted 2D bounding box");
        records.push_back(std::move(r));
    }
    return records;
}

std::string write_label_file(const std::vector<LabelRecord>& records) {
    std::ostringstream os;
    for (const LabelRecord& r : records) {
        os << r.type << ' ' << fmt_g6(r.truncated) << ' ' << r.occluded << ' '
           << fmt_g6(r.alpha) << ' ' << fmt_g6(r.bbox.left) << ' ' << fmt_g6(r.bbox.top) << ' '
           << fmt_g6(r.bbox.right) << ' ' << fmt_g6(r.bbox.bottom) << ' ' << fmt_g6(r.height)
           << ' ' << fmt_g6(r.width) << ' ' << fmt_g6(r.length) << ' ' << fmt_g6(r.location.x)
           << ' ' << fmt_g6(r.location.y) << ' ' << fmt_g6(r.location.z) << ' '
           << fmt_g6(r.rotation_y);
        if (r.score) os << ' ' << fmt_g6(*r.score);
        os << '\n';
    }
    return os.str();
}

CalibRecord parse_calib_file(const std::string& text, const std::string& source_label) {
    std::optional<std::array<double, 12>> p2, p3;
    std::istringstream iss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;  // unrelated key rows are allowed
        const std::string key = line.substr(0, colon);
        if (key != "P2" && key != "P3") continue;
        const std::vector<std::string> tok = split_ws(line.substr(colon + 1));
        if (tok.size() != 12)
            throw MalformedMatrix(source_label, line_no,
                                  key + " needs 12 values, got " + std::to_string(tok.size()));
        std::array<double, 12> m{};
        for (std::size_t i = 0; i < 12; ++i)
            m[i] = strict_double(tok[i], source_label, line_no);
        (key == "P2" ? p2 : p3) = m;
    }
    if (!p2) throw MissingKey(source_label, "P2");
    if (!p3) throw MissingKey(source_label, "P3");

    CalibRecord c;
    c.p2 = *p2;
    c.p3 = *p3;
    c.fx = c.p2[0];
    c.fy = c.p2[5];
    c.cx = c.p2[2];
    c.cy = c.p2[6];
    if (!(c.fx > 0.0) || !(c.fy > 0.0))
        throw MalformedMatrix(source_label, 0, "P2 focal lengths must be positive");
    c.baseline_m = (c.p2[3] - c.p3[3]) / c.fx;
    if (!(c.baseline_m > 0.0))
        throw MalformedMatrix(source_label, 0, "derived baseline must be positive");
    return c;
}

Box3D box_from_label(const LabelRecord& record) {
    return Box3D({record.location.x, record.location.y - 0.5 * record.height,
                  record.location.z},
                 record.height, record.width, record.length, record.rotation_y, record.score);
}

GroundTruthObject ground_truth_from_label(const LabelRecord& record) {
    GroundTruthObject gt;
    gt.box = box_from_label(record);
    gt.bbox = record.bbox;
    gt.truncation = record.truncated;
    gt.occlusion = record.occluded;
    gt.label = record.type;
    gt.dont_care = record.dont_care;
    return gt;
}

Detection detection_from_label(const LabelRecord& record) {
    Detection det;
    det.box = box_from_label(record);
    if (!det.box.score) det.box.score = 0.0;
    det.bbox = record.bbox;
    return det;
}

// --- meshes ------------------------------------------------------------------

std::string write_mesh_obj(const TriangleMesh& mesh) {
    std::ostringstream os;
    for (const Vec3& v : mesh.vertices)
        os << "v " << fmt_g6(v.x) << ' ' << fmt_g6(v.y) << ' ' << fmt_g6(v.z) << '\n';
    for (const auto& t : mesh.triangles)
        os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    return os.str();
}

TriangleMesh parse_mesh_obj(const std::string& text, const std::string& source_label) {
    TriangleMesh mesh;
    std::istringstream iss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() != 4)
                throw MalformedLine(source_label, line_no, "vertex needs 3 coordinates");
            mesh.vertices.push_back({strict_double(tok[1], source_label, line_no),
                                     strict_double(tok[2], source_label, line_no),
                                     strict_double(tok[3], source_label, line_no)});
        } else if (tok[0] == "f") {
            if (tok.size() != 4)
                throw MalformedLine(source_label, line_no, "only triangular faces supported");
            std::array<std::uint32_t, 3> tri{};
            for (int i = 0; i < 3; ++i) {
                const long idx = strict_int(tok[i + 1], source_label, line_no);
                if (idx < 1 || static_cast<std::size_t>(idx) > mesh.vertices.size())
                    throw MalformedLine(source_label, line_no,
                                        "face index " + std::to_string(idx) + " out of range");
                tri[i] = static_cast<std::uint32_t>(idx - 1);
            }
            mesh.triangles.push_back(tri);
        } else {
            throw MalformedLine(source_label, line_no, "unsupported record \"" + tok[0] + "\"");
        }
    }
    return mesh;
}

static_assert(std::endian::native == std::endian::little,
              "binary STL/PFM I/O assumes a little-endian host");

std::string write_mesh_stl(const TriangleMesh& mesh) {
    std::string out;
    char header[80] = "binary stl";
    out.append(header, 80);
    const std::uint32_t n = static_cast<std::uint32_t>(mesh.triangles.size());
    out.append(reinterpret_cast<const char*>(&n), 4);
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Vec3 normal = (b - a).cross(c - a);
        const double len = normal.norm();
        if (len > 0.0) normal = normal / len;
        const float rec[12] = {
            static_cast<float>(normal.x), static_cast<float>(normal.y),
            static_cast<float>(normal.z), static_cast<float>(a.x),
            static_cast<float>(a.y),      static_cast<float>(a.z),
            static_cast<float>(b.x),      static_cast<float>(b.y),
            static_cast<float>(b.z),      static_cast<float>(c.x),
            static_cast<float>(c.y),      static_cast<float>(c.z)};
        out.append(reinterpret_cast<const char*>(rec), sizeof(rec));
        const std::uint16_t attr = 0;
        out.append(reinterpret_cast<const char*>(&attr), 2);
    }
    return out;
}

TriangleMesh parse_mesh_stl(const std::string& bytes, const std::string& source_label) {
    if (bytes.size() < 84) throw ParseError(source_label, 0, "truncated STL header");
    std::uint32_t n = 0;
    std::memcpy(&n, bytes.data() + 80, 4);
    const std::size_t expected = 84 + static_cast<std::size_t>(n) * 50;
    if (bytes.size() != expected)
        throw ParseError(source_label, 0,
                         "payload size " + std::to_string(bytes.size()) + " does not match " +
                             std::to_string(n) + " triangles");
    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(n) * 3);
    mesh.triangles.reserve(n);
    for (std::uint32_t t = 0; t < n; ++t) {
        float rec[12];
        std::memcpy(rec, bytes.data() + 84 + static_cast<std::size_t>(t) * 50, sizeof(rec));
        const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int v = 0; v < 3; ++v)
            mesh.vertices.push_back({rec[3 + 3 * v], rec[4 + 3 * v], rec[5 + 3 * v]});
        mesh.triangles.push_back({base, base + 1, base + 2});
    }
    return mesh;
}

// --- clouds ------------------------------------------------------------------

std::string write_cloud_ply(const PointCloud& cloud) {
    const std::vector<Vec3> pts = cloud.valid_points();
    std::ostringstream os;
    os << "ply\nformat ascii 1.0\nelement vertex " << pts.size()
       << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
    for (const Vec3& p : pts)
        os << fmt_g6(p.x) << ' ' << fmt_g6(p.y) << ' ' << fmt_g6(p.z) << '\n';
    return os.str();
}

PointCloud parse_cloud_ply(const std::string& text, const std::string& source_label,
                           Frame frame) {
    std::istringstream iss(text);
    std::string line;
    std::size_t line_no = 0;
    const auto next_line = [&](const char* what) {
        if (!std::getline(iss, line))
            throw MalformedLine(source_label, line_no, std::string("missing ") + what);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line("magic");
    if (line != "ply") throw MalformedLine(source_label, line_no, "not a PLY file");
    next_line("format");
    if (line != "format ascii 1.0")
        throw MalformedLine(source_label, line_no, "only \"format ascii 1.0\" supported");

    std::size_t count = 0;
    bool have_count = false;
    static const char* kProps[3] = {"property float x", "property float y",
                                    "property float z"};
    int props_seen = 0;
    while (true) {
        next_line("end_header");
        if (line == "end_header") break;
        if (line.rfind("comment", 0) == 0) continue;
        if (line.rfind("element vertex ", 0) == 0) {
            const std::string tok = line.substr(std::strlen("element vertex "));
            count = static_cast<std::size_t>(strict_int(tok, source_label, line_no));
            have_count = true;
            continue;
        }
        if (props_seen < 3 && line == kProps[props_seen]) {
            ++props_seen;
            continue;
        }
        throw MalformedLine(source_label, line_no, "unexpected header line \"" + line + "\"");
    }
    if (!have_count) throw MalformedLine(source_label, line_no, "missing element vertex count");
    if (props_seen != 3)
        throw MalformedLine(source_label, line_no, "expected float x/y/z properties");

    PointCloud cloud;
    cloud.frame = frame;
    cloud.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        next_line("vertex row");
        const std::vector<std::string> tok = split_ws(line);
        if (tok.size() != 3)
            throw MalformedLine(source_label, line_no, "vertex row needs 3 values");
        cloud.points.push_back({strict_double(tok[0], source_label, line_no),
                                strict_double(tok[1], source_label, line_no),
                                strict_double(tok[2], source_label, line_no)});
    }
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty())
            throw MalformedLine(source_label, line_no, "trailing data after vertex list");
    }
    return cloud;
}

std::string write_cloud_xyz(const PointCloud& cloud) {
    std::ostringstream os;
    for (const Vec3& p : cloud.valid_points())
        os << fmt_g6(p.x) << ' ' << fmt_g6(p.y) << ' ' << fmt_g6(p.z) << '\n';
    return os.str();
}

PointCloud parse_cloud_xyz(const std::string& text, const std::string& source_label,
                           Frame frame) {
    PointCloud cloud;
    cloud.frame = frame;
    std::istringstream iss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(iss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::vector<std::string> tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 3)
            throw MalformedLine(source_label, line_no, "expected 3 coordinates per line");
        cloud.points.push_back({strict_double(tok[0], source_label, line_no),
                                strict_double(tok[1], source_label, line_no),
                                strict_double(tok[2], source_label, line_no)});
    }
    return cloud;
}

// --- rasters -----------------------------------------------------------------

std::string write_pgm(const GrayImage& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

GrayImage parse_pgm(const std::string& bytes, const std::string& source_label) {
    std::istringstream iss(bytes);
    std::string magic;
    std::size_t w = 0, h = 0;
    long maxval = 0;
    if (!(iss >> magic) || magic != "P5")
        throw ParseError(source_label, 1, "not a binary PGM (P5) file");
    if (!(iss >> w >> h >> maxval) || w == 0 || h == 0)
        throw ParseError(source_label, 1, "bad PGM dimensions");
    if (maxval != 255) throw ParseError(source_label, 1, "only maxval 255 supported");
    const std::streampos pos = iss.tellg();
    if (pos < 0) throw ParseError(source_label, 0, "truncated PGM header");
    const std::size_t offset = static_cast<std::size_t>(pos) + 1;  // single separator byte
    if (bytes.size() != offset + w * h)
        throw ParseError(source_label, 0, "PGM payload does not match dimensions");
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
    return img;
}

std::string write_pfm(const FloatImage& image) {
    std::string out = "Pf\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n-1.000000\n";
    // PFM scanlines run bottom-up.
    for (std::size_t row = image.height; row-- > 0;)
        out.append(reinterpret_cast<const char*>(&image.pixels[row * image.width]),
                   image.width * sizeof(float));
    return out;
}

FloatImage parse_pfm(const std::string& bytes, const std::string& source_label) {
    std::istringstream iss(bytes);
    std::string magic;
    std::size_t w = 0, h = 0;
    double scale = 0.0;
    if (!(iss >> magic) || magic != "Pf")
        throw ParseError(source_label, 1, "not a grayscale PFM (Pf) file");
    if (!(iss >> w >> h) || w == 0 || h == 0)
        throw ParseError(source_label, 1, "bad PFM dimensions");
    if (!(iss >> scale) || scale >= 0.0)
        throw ParseError(source_label, 1, "only little-endian PFM (negative scale) supported");
    const std::streampos pos = iss.tellg();
    if (pos < 0) throw ParseError(source_label, 0, "truncated PFM header");
    const std::size_t offset = static_cast<std::size_t>(pos) + 1;
    if (bytes.size() != offset + w * h * sizeof(float))
        throw ParseError(source_label, 0, "PFM payload does not match dimensions");
    FloatImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(w * h);
    for (std::size_t row = 0; row < h; ++row) {
        const std::size_t src_row = h - 1 - row;
        std::memcpy(&img.pixels[row * w], bytes.data() + offset + src_row * w * sizeof(float),
                    w * sizeof(float));
    }
    return img;
}

std::pair<GrayImage, FloatImage> mask_to_images(const ForegroundMask& mask) {
    mask.validate();
    GrayImage gray;
    gray.width = mask.width;
    gray.height = mask.height;
    gray.pixels.assign(mask.width * mask.height, 0);
    FloatImage disp;
    disp.width = mask.width;
    disp.height = mask.height;
    disp.pixels.assign(mask.width * mask.height, 0.0f);
    for (const MaskPixel& m : mask.pixels) {
        const std::size_t col = static_cast<std::size_t>(std::lround(m.px.u - mask.origin_u));
        const std::size_t row = static_cast<std::size_t>(std::lround(m.px.v - mask.origin_v));
        gray.pixels[row * mask.width + col] = 255;
        disp.pixels[row * mask.width + col] = static_cast<float>(m.disparity);
    }
    return {gray, disp};
}

ForegroundMask mask_from_images(const GrayImage& mask_image, const FloatImage& disparity,
                                double origin_u, double origin_v,
                                const std::string& source_label) {
    if (mask_image.width != disparity.width || mask_image.height != disparity.height)
        throw ParseError(source_label, 0, "mask and disparity image sizes differ");
    ForegroundMask mask;
    mask.origin_u = origin_u;
    mask.origin_v = origin_v;
    mask.width = mask_image.width;
    mask.height = mask_image.height;
    for (std::size_t row = 0; row < mask_image.height; ++row) {
        for (std::size_t col = 0; col < mask_image.width; ++col) {
            if (mask_image.at(row, col) == 0) continue;
            MaskPixel m;
            m.px = {origin_u + static_cast<double>(col), origin_v + static_cast<double>(row)};
            m.disparity = disparity.at(row, col);
            if (!(m.disparity > 0.0))
                throw ParseError(source_label, 0, "foreground pixel with non-positive disparity");
            mask.pixels.push_back(m);
        }
    }
    return mask;
}

// --- files -------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot create " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoFailure("cannot write " + path);
}

TemplateLibrary load_template_library(const std::string& dir, std::size_t resample_n) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoFailure("template directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".ply" || ext == ".xyz") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyLibrary();

    std::vector<std::string> names;
    std::vector<PointCloud> clouds;
    for (const fs::path& file : files) {
        const std::string text = read_file(file.string());
        names.push_back(file.stem().string());
        clouds.push_back(file.extension() == ".ply"
                             ? parse_cloud_ply(text, file.string(), Frame::OCS)
                             : parse_cloud_xyz(text, file.string(), Frame::OCS));
    }
    return TemplateLibrary::from_clouds(std::move(names), std::move(clouds), resample_n);
}

}  // namespace stereoshape
