#include "stereoshape/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stereoshape/parallel.hpp"

namespace stereoshape {

namespace {

struct SweepEntry {
    double score = 0.0;
    std::size_t frame = 0;
    std::size_t det = 0;
    bool tp = false;
    double sim = 0.0;
};

std::vector<bool> ignored_flags(const std::vector<GroundTruthObject>& gts, Difficulty level,
                                const DifficultyTable& table) {
    std::vector<bool> ignored(gts.size(), false);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const GroundTruthObject& gt = gts[g];
        ignored[g] = gt.dont_care || static_cast<int>(assign_difficulty(gt, table)) >
                                         static_cast<int>(level);
    }
    return ignored;
}

}  // namespace

std::vector<RecallPoint> recall_sweep(const std::vector<FrameData>& frames,
                                      MatchCriterion criterion, double threshold,
                                      Difficulty level, const DifficultyTable& table,
                                      SweepValue value_kind,
                                      const std::vector<std::vector<double>>* per_det_sim) {
    std::size_t n_gt = 0;
    std::vector<SweepEntry> entries;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const FrameData& frame = frames[f];
        const std::vector<bool> ignored = ignored_flags(frame.gts, level, table);
        for (std::size_t g = 0; g < ignored.size(); ++g)
            if (!ignored[g]) ++n_gt;

        const MatchResult match =
            match_detections(frame.dets, frame.gts, criterion, threshold, &ignored);
        for (std::size_t d = 0; d < frame.dets.size(); ++d) {
            const MatchResult::PerDetection& pd = match.detections[d];
            if (pd.excluded) continue;
            SweepEntry e;
            e.score = frame.dets[d].box.score.value_or(0.0);
            e.frame = f;
            e.det = d;
            e.tp = pd.tp;
            if (pd.tp) {
                switch (value_kind) {
                    case SweepValue::Precision: e.sim = 1.0; break;
                    case SweepValue::Orientation:
                        e.sim = orientation_similarity(frame.dets[d].box.yaw,
                                                       frame.gts[pd.gt_index].box.yaw);
                        break;
                    case SweepValue::PerDetection:
                        if (!per_det_sim)
                            throw MissingCloud("recall_sweep: per-detection values required");
                        e.sim = (*per_det_sim)[f][d];
                        break;
                }
            }
            entries.push_back(e);
        }
    }
    if (n_gt == 0) return {};

    std::sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.det < b.det;
    });

    std::vector<RecallPoint> points;
    points.reserve(entries.size());
    std::size_t tp = 0, fp = 0;
    double sim_sum = 0.0;
    for (const SweepEntry& e : entries) {
        if (e.tp) {
            ++tp;
            sim_sum += e.sim;
        } else {
            ++fp;
        }
        RecallPoint p;
        p.recall = static_cast<double>(tp) / static_cast<double>(n_gt);
        const double denom = static_cast<double>(tp + fp);
        p.value = value_kind == SweepValue::Precision ? static_cast<double>(tp) / denom
                                                      : sim_sum / denom;
        points.push_back(p);
    }
    return points;
}

double aos(const std::vector<Detection>& dets, const std::vector<GroundTruthObject>& gts,
           double iou2d_threshold, const DifficultyTable& table, Difficulty level) {
    std::vector<FrameData> frames(1);
    frames[0].stem = "0";
    frames[0].gts = gts;
    frames[0].dets = dets;
    return ap_11(recall_sweep(frames, MatchCriterion::Iou2D, iou2d_threshold, level, table,
                              SweepValue::Orientation));
}

namespace {

// Per-frame raw MMD of every detection cloud. Frames fill disjoint slots.
std::vector<std::vector<double>> per_detection_mmd(const std::vector<FrameData>& frames,
                                                   const TemplateLibrary& lib,
                                                   ChamferNorm norm, unsigned jobs) {
    std::vector<std::vector<double>> out(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t f) {
        const FrameData& frame = frames[f];
        out[f].resize(frame.dets.size(), 0.0);
        for (std::size_t d = 0; d < frame.dets.size(); ++d) {
            const Detection& det = frame.dets[d];
            if (!det.cloud)
                throw MissingCloud("frame " + frame.stem + ": detection " + std::to_string(d) +
                                   " has no completed cloud");
            out[f][d] = mmd(*det.cloud, lib, norm);
        }
    });
    return out;
}

std::vector<std::vector<double>> gate_mmd_similarity(
    const std::vector<std::vector<double>>& raw) {
    std::vector<std::vector<double>> sim(raw.size());
    for (std::size_t f = 0; f < raw.size(); ++f) {
        sim[f].resize(raw[f].size());
        for (std::size_t d = 0; d < raw[f].size(); ++d) sim[f][d] = delta_mmd(raw[f][d]);
    }
    return sim;
}

}  // namespace

double ap_mmd(const std::vector<Detection>& dets, const std::vector<GroundTruthObject>& gts,
              double iou2d_threshold, const TemplateLibrary& lib, const DifficultyTable& table,
              Difficulty level, ChamferNorm norm) {
    std::vector<FrameData> frames(1);
    frames[0].stem = "0";
    frames[0].gts = gts;
    frames[0].dets = dets;
    const auto sim = gate_mmd_similarity(per_detection_mmd(frames, lib, norm, 1));
    return ap_11(recall_sweep(frames, MatchCriterion::Iou2D, iou2d_threshold, level, table,
                              SweepValue::PerDetection, &sim));
}

MmdtpResult mmdtp(const std::vector<FrameData>& frames, double beta,
                  const TemplateLibrary& lib, const std::vector<double>& depth_bin_edges,
                  ChamferNorm norm, unsigned jobs) {
    if (depth_bin_edges.size() < 2)
        throw ConfigError("mmdtp: at least two depth bin edges required");

    struct TpMmd {
        double depth = 0.0;
        double mmd_value = 0.0;
    };
    std::vector<std::vector<TpMmd>> per_frame(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t f) {
        const FrameData& frame = frames[f];
        for (std::size_t d = 0; d < frame.dets.size(); ++d) {
            const Detection& det = frame.dets[d];
            bool is_tp = false;
            for (const GroundTruthObject& gt : frame.gts) {
                if (gt.dont_care) continue;
                if (iou_3d(det.box, gt.box) > beta) {
                    is_tp = true;
                    break;
                }
            }
            if (!is_tp) continue;
            if (!det.cloud)
                throw MissingCloud("frame " + frame.stem + ": detection " + std::to_string(d) +
                                   " has no completed cloud");
            per_frame[f].push_back({det.box.center.z, mmd(*det.cloud, lib, norm)});
        }
    });

    const std::size_t bins = depth_bin_edges.size() - 1;
    std::vector<double> bin_sum(bins, 0.0);
    std::vector<std::size_t> bin_count(bins, 0);
    double total_sum = 0.0;
    std::size_t total_count = 0;
    for (const auto& frame_tps : per_frame) {
        for (const TpMmd& tp : frame_tps) {
            total_sum += tp.mmd_value;
            ++total_count;
            for (std::size_t b = 0; b < bins; ++b) {
                if (tp.depth > depth_bin_edges[b] && tp.depth <= depth_bin_edges[b + 1]) {
                    bin_sum[b] += tp.mmd_value;
                    ++bin_count[b];
                    break;
                }
            }
        }
    }

    MmdtpResult result;
    result.per_bin.resize(bins);
    if (total_count > 0) result.overall = total_sum / static_cast<double>(total_count);
    for (std::size_t b = 0; b < bins; ++b)
        if (bin_count[b] > 0) result.per_bin[b] = bin_sum[b] / static_cast<double>(bin_count[b]);
    return result;
}

EvalReport evaluate_frames(const std::vector<FrameData>& frames, const TemplateLibrary* lib,
                           const EvalConfig& config, unsigned jobs) {
    EvalReport report;
    report.depth_bin_edges = config.depth_bin_edges;

    std::vector<std::vector<double>> mmd_sim;
    if (lib) {
        const auto raw = per_detection_mmd(frames, *lib, config.cd_norm, jobs);
        mmd_sim = gate_mmd_similarity(raw);
        report.has_shape_metrics = true;
    }

    for (int level = 0; level < 3; ++level) {
        const Difficulty diff = static_cast<Difficulty>(level);
        DifficultyReport& out = report.per_difficulty[level];
        out.ap_2d = ap_11(recall_sweep(frames, MatchCriterion::Iou2D, config.iou2d_threshold,
                                       diff, config.difficulty, SweepValue::Precision));
        out.ap_bev = ap_11(recall_sweep(frames, MatchCriterion::IouBev, config.bev_iou_threshold,
                                        diff, config.difficulty, SweepValue::Precision));
        out.ap_3d = ap_11(recall_sweep(frames, MatchCriterion::Iou3D, config.iou3d_threshold,
                                       diff, config.difficulty, SweepValue::Precision));
        out.aos = ap_11(recall_sweep(frames, MatchCriterion::Iou2D, config.aos_iou2d_threshold,
                                     diff, config.difficulty, SweepValue::Orientation));
        if (lib) {
            for (double threshold : config.ap_mmd_iou2d) {
                const double value =
                    ap_11(recall_sweep(frames, MatchCriterion::Iou2D, threshold, diff,
                                       config.difficulty, SweepValue::PerDetection, &mmd_sim));
                out.ap_mmd.emplace_back(threshold, value);
            }
        }
    }

    if (lib)
        report.mmdtp =
            mmdtp(frames, config.mmdtp_beta, *lib, config.depth_bin_edges, config.cd_norm, jobs);
    else
        report.mmdtp.per_bin.resize(config.depth_bin_edges.size() - 1);
    return report;
}

// --- config ----------------------------------------------------------------

namespace {

double parse_double_token(const std::string& tok, const std::string& source, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw MalformedLine(source, line, "bad numeric value \"" + tok + "\"");
    }
}

std::vector<double> parse_double_list(const std::string& value, const std::string& source,
                                      std::size_t line) {
    std::vector<double> out;
    std::string tok;
    std::istringstream iss(value);
    while (std::getline(iss, tok, ',')) {
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw MalformedLine(source, line, "empty element in list");
        out.push_back(parse_double_token(tok.substr(b, e - b + 1), source, line));
    }
    if (out.empty()) throw MalformedLine(source, line, "empty list");
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

EvalConfig parse_eval_config(const std::string& text, const std::string& source_label) {
    EvalConfig cfg;
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
        if (key.empty() || value.empty())
            throw MalformedLine(source_label, line_no, "expected key = value");

        const auto one = [&] { return parse_double_token(value, source_label, line_no); };
        const auto triple = [&](const char* what) {
            const std::vector<double> v = parse_double_list(value, source_label, line_no);
            if (v.size() != 3)
                throw MalformedLine(source_label, line_no,
                                    std::string(what) + " needs exactly 3 values");
            return v;
        };

        if (key == "min_height") {
            const auto v = triple("min_height");
            for (int i = 0; i < 3; ++i) cfg.difficulty.min_height[i] = v[i];
        } else if (key == "max_occlusion") {
            const auto v = triple("max_occlusion");
            for (int i = 0; i < 3; ++i) cfg.difficulty.max_occlusion[i] = static_cast<int>(v[i]);
        } else if (key == "max_truncation") {
            const auto v = triple("max_truncation");
            for (int i = 0; i < 3; ++i) cfg.difficulty.max_truncation[i] = v[i];
        } else if (key == "iou2d_threshold") {
            cfg.iou2d_threshold = one();
        } else if (key == "bev_iou_threshold") {
            cfg.bev_iou_threshold = one();
        } else if (key == "iou3d_threshold") {
            cfg.iou3d_threshold = one();
        } else if (key == "aos_iou2d_threshold") {
            cfg.aos_iou2d_threshold = one();
        } else if (key == "ap_mmd_iou2d") {
            cfg.ap_mmd_iou2d = parse_double_list(value, source_label, line_no);
        } else if (key == "mmdtp_beta") {
            cfg.mmdtp_beta = one();
            if (cfg.mmdtp_beta <= 0.0 || cfg.mmdtp_beta >= 1.0)
                throw ConfigError("mmdtp_beta must lie in (0, 1)");
        } else if (key == "depth_bins") {
            cfg.depth_bin_edges = parse_double_list(value, source_label, line_no);
            if (cfg.depth_bin_edges.size() < 2)
                throw ConfigError("depth_bins needs at least two edges");
            if (!std::is_sorted(cfg.depth_bin_edges.begin(), cfg.depth_bin_edges.end()))
                throw ConfigError("depth_bins must be increasing");
        } else if (key == "cd_norm") {
            if (value == "l2")
                cfg.cd_norm = ChamferNorm::L2;
            else if (value == "squared-l2")
                cfg.cd_norm = ChamferNorm::SquaredL2;
            else
                throw ConfigError("cd_norm must be l2 or squared-l2, got \"" + value + "\"");
        } else if (key == "template_resample") {
            const double v = one();
            if (v < 0.0 || v != std::floor(v))
                throw ConfigError("template_resample must be a non-negative integer");
            cfg.template_resample = static_cast<std::size_t>(v);
        } else if (key == "ocs_scale") {
            if (value == "uniform-l")
                cfg.ocs_scale = OcsScale::UniformL;
            else if (value == "per-axis")
                cfg.ocs_scale = OcsScale::PerAxis;
            else
                throw ConfigError("ocs_scale must be uniform-l or per-axis, got \"" + value +
                                  "\"");
        } else {
            throw ConfigError(source_label + ":" + std::to_string(line_no) +
                              ": unknown config key \"" + key + "\"");
        }
    }
    return cfg;
}

EvalConfig load_eval_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_eval_config(buf.str(), path);
}

// --- report rendering -------------------------------------------------------

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string bin_label(double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%g,%g]", lo, hi);
    return buf;
}

std::string bin_key(double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "bin_%g_%g", lo, hi);
    return buf;
}

}  // namespace

std::string render_report_table(const EvalReport& report) {
    std::ostringstream os;
    for (const std::string& line : report.provenance) os << "# " << line << '\n';
    os << "metric                 Easy       Moderate   Hard\n";
    os << "--------------------------------------------------\n";
    const auto row = [&](const std::string& name, auto getter) {
        os << name;
        for (std::size_t pad = name.size(); pad < 23; ++pad) os << ' ';
        for (int d = 0; d < 3; ++d) {
            os << fmt6(getter(report.per_difficulty[d]));
            if (d < 2) os << "   ";
        }
        os << '\n';
    };
    row("AP_2D", [](const DifficultyReport& r) { return r.ap_2d; });
    row("AP_BEV", [](const DifficultyReport& r) { return r.ap_bev; });
    row("AP_3D", [](const DifficultyReport& r) { return r.ap_3d; });
    row("AOS", [](const DifficultyReport& r) { return r.aos; });
    if (report.has_shape_metrics) {
        for (std::size_t t = 0; t < report.per_difficulty[0].ap_mmd.size(); ++t) {
            const double threshold = report.per_difficulty[0].ap_mmd[t].first;
            row("AP_MMD @" + fmt2(threshold),
                [t](const DifficultyReport& r) { return r.ap_mmd[t].second; });
        }
        os << "--------------------------------------------------\n";
        os << "MMDTP by predicted depth\n";
        for (std::size_t b = 0; b + 1 < report.depth_bin_edges.size(); ++b) {
            const std::string label =
                bin_label(report.depth_bin_edges[b], report.depth_bin_edges[b + 1]);
            os << label;
            for (std::size_t pad = label.size(); pad < 23; ++pad) os << ' ';
            os << (report.mmdtp.per_bin[b] ? fmt6(*report.mmdtp.per_bin[b]) : "absent") << '\n';
        }
        os << "overall                ";
        os << (report.mmdtp.overall ? fmt6(*report.mmdtp.overall) : "absent") << '\n';
    }
    return os.str();
}

std::string render_report_keyvalues(const EvalReport& report) {
    std::ostringstream os;
    for (const std::string& line : report.provenance) os << "# " << line << '\n';
    static const char* kDifficulty[3] = {"easy", "moderate", "hard"};
    for (int d = 0; d < 3; ++d) {
        const DifficultyReport& r = report.per_difficulty[d];
        os << "ap_2d." << kDifficulty[d] << " = " << fmt6(r.ap_2d) << '\n';
        os << "ap_bev." << kDifficulty[d] << " = " << fmt6(r.ap_bev) << '\n';
        os << "ap_3d." << kDifficulty[d] << " = " << fmt6(r.ap_3d) << '\n';
        os << "aos." << kDifficulty[d] << " = " << fmt6(r.aos) << '\n';
        for (const auto& [threshold, value] : r.ap_mmd)
            os << "ap_mmd_" << fmt2(threshold) << "." << kDifficulty[d] << " = " << fmt6(value)
               << '\n';
    }
    if (report.has_shape_metrics) {
        os << "mmdtp.overall = "
           << (report.mmdtp.overall ? fmt6(*report.mmdtp.overall) : "absent") << '\n';
        for (std::size_t b = 0; b + 1 < report.depth_bin_edges.size(); ++b) {
            os << "mmdtp." << bin_key(report.depth_bin_edges[b], report.depth_bin_edges[b + 1])
               << " = " << (report.mmdtp.per_bin[b] ? fmt6(*report.mmdtp.per_bin[b]) : "absent")
               << '\n';
        }
    }
    return os.str();
}

}  // namespace stereoshape
