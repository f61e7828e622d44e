#pragma once

// Frame-level detection evaluation: per-difficulty AP_2D / AP_BEV / AP_3D,
// AOS, AP_MMD at configurable 2D-IoU thresholds, and MMDTP with depth
// binning. Frames are processed independently (parallelizable) and partials
// are reduced in frame order, so the report is identical at any job count.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stereoshape/metrics.hpp"

namespace stereoshape {

struct FrameData {
    std::string stem;
    std::vector<GroundTruthObject> gts;
    std::vector<Detection> dets;
};

struct EvalConfig {
    DifficultyTable difficulty;
    double iou2d_threshold = 0.7;       // AP_2D true-positive criterion
    double bev_iou_threshold = 0.7;     // AP_BEV
    double iou3d_threshold = 0.7;       // AP_3D
    double aos_iou2d_threshold = 0.7;   // AOS matching
    std::vector<double> ap_mmd_iou2d{0.5, 0.7};
    double mmdtp_beta = 0.5;
    std::vector<double> depth_bin_edges{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    ChamferNorm cd_norm = ChamferNorm::L2;
    std::size_t template_resample = 2048;
    OcsScale ocs_scale = OcsScale::UniformL;
};

// Parse a key = value config file; unknown keys and malformed values are
// rejected (ConfigError / ParseError). Keys are documented in the README.
EvalConfig parse_eval_config(const std::string& text, const std::string& source_label);
EvalConfig load_eval_config(const std::string& path);

struct MmdtpResult {
    std::optional<double> overall;               // absent when there is no TP
    std::vector<std::optional<double>> per_bin;  // one slot per depth bin
};

struct DifficultyReport {
    double ap_2d = 0.0;
    double ap_bev = 0.0;
    double ap_3d = 0.0;
    double aos = 0.0;
    // (2D-IoU threshold, AP_MMD) pairs in config order; empty without clouds.
    std::vector<std::pair<double, double>> ap_mmd;
};

struct EvalReport {
    std::array<DifficultyReport, 3> per_difficulty;  // Easy, Moderate, Hard
    bool has_shape_metrics = false;
    MmdtpResult mmdtp;
    std::vector<double> depth_bin_edges;
    std::vector<std::string> provenance;  // echoed configuration lines
};

// What the sweep accumulates at each recall level: detection precision,
// orientation similarity of the matched pair, or a per-detection similarity
// supplied by the caller (MMD similarity). False positives contribute 0.
enum class SweepValue : std::uint8_t { Precision, Orientation, PerDetection };

// Precision / similarity sweep for one criterion + threshold + difficulty.
// `per_det_sim` (frame-major) is required for SweepValue::PerDetection.
std::vector<RecallPoint> recall_sweep(const std::vector<FrameData>& frames,
                                      MatchCriterion criterion, double threshold,
                                      Difficulty level, const DifficultyTable& table,
                                      SweepValue value_kind,
                                      const std::vector<std::vector<double>>* per_det_sim = nullptr);

// Single-set convenience wrappers matching the metric definitions.
double aos(const std::vector<Detection>& dets, const std::vector<GroundTruthObject>& gts,
           double iou2d_threshold, const DifficultyTable& table = {},
           Difficulty level = Difficulty::Hard);
double ap_mmd(const std::vector<Detection>& dets, const std::vector<GroundTruthObject>& gts,
              double iou2d_threshold, const TemplateLibrary& lib,
              const DifficultyTable& table = {}, Difficulty level = Difficulty::Hard,
              ChamferNorm norm = ChamferNorm::L2);

// Mean MMD of detections whose 3D IoU with at least one ground truth exceeds
// beta, overall and grouped by predicted depth. Detection order does not
// matter; detections without clouds raise MissingCloud.
MmdtpResult mmdtp(const std::vector<FrameData>& frames, double beta,
                  const TemplateLibrary& lib, const std::vector<double>& depth_bin_edges,
                  ChamferNorm norm = ChamferNorm::L2, unsigned jobs = 1);

// Full evaluation. `lib` may be null when no shape metrics are wanted; if it
// is present every detection must carry a cloud (MissingCloud otherwise).
EvalReport evaluate_frames(const std::vector<FrameData>& frames, const TemplateLibrary* lib,
                           const EvalConfig& config, unsigned jobs = 1);

// Report renderers; both are byte-deterministic for identical reports.
std::string render_report_table(const EvalReport& report);
std::string render_report_keyvalues(const EvalReport& report);

}  // namespace stereoshape
