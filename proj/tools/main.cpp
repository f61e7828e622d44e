// Command-line front end: detection/shape evaluation, point-cloud completion,
// occupancy-field reconstruction and the synthetic self-test.
//
// Exit codes: 0 success, 2 malformed input (message names file and line),
// 3 configuration errors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stereoshape/evaluation.hpp"
#include "stereoshape/kitti_io.hpp"
#include "stereoshape/occupancy.hpp"
#include "stereoshape/synth.hpp"

namespace fs = std::filesystem;
using namespace stereoshape;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitBadConfig = 3;

std::vector<double> parse_csv_doubles(const std::string& text, std::size_t expected,
                                      const std::string& what) {
    std::vector<double> out;
    std::istringstream iss(text);
    std::string tok;
    while (std::getline(iss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(what + ": bad number \"" + tok + "\"");
        }
    }
    if (expected != 0 && out.size() != expected)
        throw ConfigError(what + ": expected " + std::to_string(expected) + " values");
    return out;
}

std::vector<std::string> frame_stems(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoFailure("directory not found: " + dir);
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    return stems;
}

struct EvaluateArgs {
    std::string gt_dir, pred_dir, calib_dir, cloud_dir, template_dir, config_file, out_dir;
    unsigned jobs = 1;
};

int cmd_evaluate(const EvaluateArgs& args) {
    EvalConfig config;
    if (!args.config_file.empty()) config = load_eval_config(args.config_file);

    const std::vector<std::string> stems = frame_stems(args.gt_dir);
    std::vector<FrameData> frames;
    frames.reserve(stems.size());
    for (const std::string& stem : stems) {
        FrameData frame;
        frame.stem = stem;

        const std::string gt_path = args.gt_dir + "/" + stem + ".txt";
        for (const LabelRecord& r : parse_label_file(read_file(gt_path), gt_path))
            if (!r.dont_care) frame.gts.push_back(ground_truth_from_label(r));

        const std::string pred_path = args.pred_dir + "/" + stem + ".txt";
        if (fs::exists(pred_path)) {
            std::size_t det_index = 0;
            for (const LabelRecord& r : parse_label_file(read_file(pred_path), pred_path)) {
                Detection det = detection_from_label(r);
                if (!args.cloud_dir.empty()) {
                    const std::string cloud_path =
                        args.cloud_dir + "/" + stem + "_" + std::to_string(det_index) + ".ply";
                    if (!fs::exists(cloud_path)) throw MissingCloud("no cloud " + cloud_path);
                    det.cloud = parse_cloud_ply(read_file(cloud_path), cloud_path, Frame::OCS);
                }
                frame.dets.push_back(std::move(det));
                ++det_index;
            }
        }

        if (!args.calib_dir.empty()) {
            const std::string calib_path = args.calib_dir + "/" + stem + ".txt";
            parse_calib_file(read_file(calib_path), calib_path);  // strict validation
        }
        frames.push_back(std::move(frame));
    }

    std::optional<TemplateLibrary> lib;
    if (!args.cloud_dir.empty()) {
        if (args.template_dir.empty())
            throw ConfigError("--cloud-dir requires --templates for shape metrics");
        lib = load_template_library(args.template_dir, config.template_resample);
    }

    EvalReport report =
        evaluate_frames(frames, lib ? &*lib : nullptr, config, args.jobs);

    // Flags echoed for provenance; the job count is scheduling-only and is
    // left out so reports stay byte-identical across parallelism levels.
    report.provenance.push_back("tool = stereoshape evaluate");
    report.provenance.push_back("gt_dir = " + args.gt_dir);
    report.provenance.push_back("pred_dir = " + args.pred_dir);
    report.provenance.push_back("calib_dir = " + (args.calib_dir.empty() ? "(none)" : args.calib_dir));
    report.provenance.push_back("cloud_dir = " + (args.cloud_dir.empty() ? "(none)" : args.cloud_dir));
    report.provenance.push_back("templates = " + (args.template_dir.empty() ? "(none)" : args.template_dir));
    report.provenance.push_back("config = " + (args.config_file.empty() ? "(defaults)" : args.config_file));
    report.provenance.push_back("frames = " + std::to_string(frames.size()));
    {
        std::ostringstream os;
        os << "thresholds: iou2d=" << config.iou2d_threshold
           << " bev=" << config.bev_iou_threshold << " iou3d=" << config.iou3d_threshold
           << " aos=" << config.aos_iou2d_threshold << " mmdtp_beta=" << config.mmdtp_beta;
        report.provenance.push_back(os.str());
    }

    fs::create_directories(args.out_dir);
    write_file(args.out_dir + "/report.txt", render_report_table(report));
    write_file(args.out_dir + "/report.kv", render_report_keyvalues(report));
    std::cout << "evaluated " << frames.size() << " frames -> " << args.out_dir
              << "/report.txt" << std::endl;
    return 0;
}

int cmd_complete(const std::string& in_path, const std::string& box_csv,
                 const std::string& out_path, std::size_t count,
                 const std::string& scale_name) {
    const std::vector<double> b = parse_csv_doubles(box_csv, 7, "--box");
    OcsScale scale = OcsScale::UniformL;
    if (scale_name == "per-axis") scale = OcsScale::PerAxis;
    else if (scale_name != "uniform-l")
        throw ConfigError("--ocs-scale must be uniform-l or per-axis");

    Box3D box({b[0], b[1], b[2]}, b[3], b[4], b[5], b[6]);
    const std::string text = read_file(in_path);
    const PointCloud cloud =
        fs::path(in_path).extension() == ".xyz"
            ? parse_cloud_xyz(text, in_path, Frame::CCS)
            : parse_cloud_ply(text, in_path, Frame::CCS);
    if (cloud.points.empty()) throw EmptyCloud(in_path + ": no points");

    const PointCloud normalized = ocs_transform(cloud, box, scale);
    const PointCloud completed = mirror_hallucinate(normalized, count);
    write_file(out_path, write_cloud_ply(completed));
    std::cout << "completed " << cloud.size() << " -> " << completed.size() << " points -> "
              << out_path << std::endl;
    return 0;
}

struct ReconstructArgs {
    std::string field_file, analytic, extents_csv, out_path;
    std::string domain_csv = "-0.5,-0.5,-0.5,0.5,0.5,0.5";
    double radius = 0.4;
    double exponent = 4.0;
    double width = 0.02;
    double iso = 0.5;
    std::size_t res = 32;
    std::size_t res2 = 0;
    std::string split_axis = "x";
    double split_at = 0.0;
};

int cmd_reconstruct(const ReconstructArgs& args) {
    const std::vector<double> dom = parse_csv_doubles(args.domain_csv, 6, "--domain");
    const Vec3 lo{dom[0], dom[1], dom[2]};
    const Vec3 hi{dom[3], dom[4], dom[5]};

    std::unique_ptr<OccupancyField> field;
    if (!args.field_file.empty()) {
        field = std::make_unique<TabulatedField>(
            TabulatedField::from_tensor(load_tensor(args.field_file), lo, hi));
    } else if (args.analytic == "sphere") {
        field = std::make_unique<AnalyticField>(AnalyticShape::Sphere,
                                                std::vector<double>{args.radius}, args.width);
    } else if (args.analytic == "box") {
        const std::vector<double> e = parse_csv_doubles(args.extents_csv, 3, "--extents");
        field = std::make_unique<AnalyticField>(AnalyticShape::AxisBox, e, args.width);
    } else if (args.analytic == "superellipsoid") {
        std::vector<double> e = parse_csv_doubles(args.extents_csv, 3, "--extents");
        e.push_back(args.exponent);
        field = std::make_unique<AnalyticField>(AnalyticShape::Superellipsoid, e, args.width);
    } else {
        throw ConfigError("need --field or --analytic sphere|box|superellipsoid");
    }

    TriangleMesh mesh;
    if (args.res2 == 0) {
        IsoGridSpec grid{lo, hi, args.res, args.res, args.res};
        mesh = marching_cubes(*field, grid, args.iso);
        std::cout << "region 1: vertices=" << mesh.vertices.size()
                  << " triangles=" << mesh.triangles.size() << std::endl;
    } else {
        const int axis = args.split_axis == "x" ? 0 : args.split_axis == "y" ? 1 : 2;
        if (axis == 2 && args.split_axis != "z")
            throw ConfigError("--split-axis must be x, y or z");
        IsoGridSpec first{lo, hi, args.res, args.res, args.res};
        IsoGridSpec second{lo, hi, args.res2, args.res2, args.res2};
        if (axis == 0) { first.max_corner.x = args.split_at; second.min_corner.x = args.split_at; }
        if (axis == 1) { first.max_corner.y = args.split_at; second.min_corner.y = args.split_at; }
        if (axis == 2) { first.max_corner.z = args.split_at; second.min_corner.z = args.split_at; }
        const TriangleMesh m1 = marching_cubes(*field, first, args.iso);
        const TriangleMesh m2 = marching_cubes(*field, second, args.iso);
        std::cout << "region 1: vertices=" << m1.vertices.size()
                  << " triangles=" << m1.triangles.size() << std::endl;
        std::cout << "region 2: vertices=" << m2.vertices.size()
                  << " triangles=" << m2.triangles.size() << std::endl;
        mesh = mixed_resolution_extract(*field, {first, second}, args.iso);
    }
    if (mesh.empty())
        std::cerr << "warning: no cell straddles the iso level, mesh is empty" << std::endl;

    const std::string ext = fs::path(args.out_path).extension().string();
    if (ext == ".stl")
        write_file(args.out_path, write_mesh_stl(mesh));
    else
        write_file(args.out_path, write_mesh_obj(mesh));
    std::cout << "total: vertices=" << mesh.vertices.size()
              << " triangles=" << mesh.triangles.size() << " -> " << args.out_path << std::endl;
    return 0;
}

int cmd_selftest(std::uint64_t seed, const std::string& scene_file, bool corrupt) {
    SynthScene scene;
    if (!scene_file.empty()) {
        scene = load_scene_config(scene_file);
    } else {
        scene.rig = StereoRig(CameraIntrinsics(500.0, 500.0, 320.0, 240.0), 0.54);
        scene.seed = seed;
        for (SynthShape shape :
             {SynthShape::Sphere, SynthShape::BoxShell, SynthShape::ToyCar})
            scene.items.push_back(
                {Box3D({0.0, 0.0, 8.0}, 1.5, 1.6, 4.0, 0.0), shape});
    }

    int failures = 0;
    const auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << std::endl;
        if (!ok) ++failures;
    };

    for (std::size_t i = 0; i < scene.items.size(); ++i) {
        const std::string shape = to_string(scene.items[i].shape);
        const auto [mask, true_partial] = render_instance(scene, i);

        // Projection consistency: every mask pixel backprojects onto the
        // recorded surface sample within pixel-quantization error.
        const double depth_max = [&] {
            double m = 0.0;
            for (const Vec3& p : true_partial.points) m = std::max(m, p.z);
            return m;
        }();
        const double quant_bound = std::sqrt(2.0) * depth_max / scene.rig.left.fx;
        PointCloud reconstructed =
            extract_visible(mask, scene.rig, scene.rig.left, mask.pixels.size(), scene.seed);
        if (corrupt)
            for (Vec3& p : reconstructed.points) p.z += 0.05;
        const double cd_partial = chamfer(reconstructed, true_partial);
        check(shape + ": mask backprojection lands on surface", cd_partial < 2.0 * quant_bound);

        // Completion improves MMD against the generating template.
        const PointCloud partial_ocs = ocs_transform(reconstructed, scene.items[i].box);
        const PointCloud completed = mirror_hallucinate(partial_ocs, 4096);
        TemplateLibrary lib = TemplateLibrary::from_clouds(
            {shape}, {template_cloud(scene.items[i].shape, 2048, scene.seed + 99)}, 0);
        const double mmd_partial = mmd(partial_ocs, lib);
        const double mmd_completed = mmd(completed, lib);
        check(shape + ": mirror completion lowers template distance",
              mmd_completed < mmd_partial);

        // Determinism: the pipeline repeats bit-identically.
        const auto [mask2, partial2] = render_instance(scene, i);
        bool identical = mask2.pixels.size() == mask.pixels.size();
        for (std::size_t p = 0; identical && p < mask2.pixels.size(); ++p)
            identical = mask2.pixels[p].px.u == mask.pixels[p].px.u &&
                        mask2.pixels[p].px.v == mask.pixels[p].px.v &&
                        mask2.pixels[p].disparity == mask.pixels[p].disparity;
        check(shape + ": render is deterministic", identical);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stereo 3D detection shape pipeline and evaluation toolkit"};
    app.require_subcommand(1);

    EvaluateArgs eval_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against labels");
    evaluate->add_option("--gt-dir", eval_args.gt_dir, "ground-truth label directory")->required();
    evaluate->add_option("--pred-dir", eval_args.pred_dir, "prediction directory")->required();
    evaluate->add_option("--calib-dir", eval_args.calib_dir, "per-frame calibration directory");
    evaluate->add_option("--cloud-dir", eval_args.cloud_dir,
                         "completed clouds, <stem>_<index>.ply per detection");
    evaluate->add_option("--templates", eval_args.template_dir, "template cloud directory");
    evaluate->add_option("--config", eval_args.config_file, "evaluation config file");
    evaluate->add_option("--out", eval_args.out_dir, "report output directory")->required();
    evaluate->add_option("--jobs", eval_args.jobs, "worker threads over frames");

    std::string in_path, box_csv, out_path, scale_name = "uniform-l";
    std::size_t count = 16384;
    CLI::App* complete = app.add_subcommand("complete", "mirror-complete a partial cloud");
    complete->add_option("--in", in_path, "input cloud (.ply or .xyz, CCS)")->required();
    complete->add_option("--box", box_csv, "detection box x,y,z,h,w,l,yaw")->required();
    complete->add_option("--out", out_path, "output cloud (.ply, OCS)")->required();
    complete->add_option("--count", count, "output point count");
    complete->add_option("--ocs-scale", scale_name, "uniform-l or per-axis");

    ReconstructArgs rec_args;
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "mesh an occupancy field");
    reconstruct->add_option("--field", rec_args.field_file, "tabulated field tensor file");
    reconstruct->add_option("--analytic", rec_args.analytic, "sphere, box or superellipsoid");
    reconstruct->add_option("--radius", rec_args.radius, "sphere radius");
    reconstruct->add_option("--extents", rec_args.extents_csv, "half extents a,b,c");
    reconstruct->add_option("--exponent", rec_args.exponent, "superellipsoid exponent");
    reconstruct->add_option("--width", rec_args.width, "occupancy boundary width");
    reconstruct->add_option("--domain", rec_args.domain_csv, "x0,y0,z0,x1,y1,z1");
    reconstruct->add_option("--res", rec_args.res, "grid nodes per axis");
    reconstruct->add_option("--res2", rec_args.res2, "second-region nodes per axis");
    reconstruct->add_option("--split-axis", rec_args.split_axis, "x, y or z");
    reconstruct->add_option("--split-at", rec_args.split_at, "split plane coordinate");
    reconstruct->add_option("--iso", rec_args.iso, "iso level");
    reconstruct->add_option("--out", rec_args.out_path, "output mesh (.obj or .stl)")->required();

    std::uint64_t seed = 7;
    std::string scene_file;
    bool corrupt = false;
    CLI::App* selftest = app.add_subcommand("selftest", "run the synthetic end-to-end checks");
    selftest->add_option("--seed", seed, "scene seed");
    selftest->add_option("--scene", scene_file, "scene config file");
    selftest->add_flag("--corrupt", corrupt, "corrupt the pipeline to demonstrate a failure");

    try {
        app.parse(argc, argv);
        if (*evaluate) return cmd_evaluate(eval_args);
        if (*complete) return cmd_complete(in_path, box_csv, out_path, count, scale_name);
        if (*reconstruct) return cmd_reconstruct(rec_args);
        if (*selftest) return cmd_selftest(seed, scene_file, corrupt);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << std::endl;
        return kExitBadConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitBadConfig;
    } catch (const UnknownShape& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitBadConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
