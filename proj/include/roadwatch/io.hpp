// Plain-text tabular file formats: a format-version comment, a header
// line, then whitespace-separated rows. Pixels carry 4 decimal places,
// angles 9 significant digits. All writers are byte-deterministic for
// identical inputs.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "roadwatch/eval.hpp"
#include "roadwatch/signal.hpp"
#include "roadwatch/synth.hpp"

namespace roadwatch::io {

namespace fs = std::filesystem;

// correspondences: frame point_id x0 y0 x1 y1 is_static
void write_correspondences(const fs::path& path,
                           std::span<const CorrespondenceSet> sets);
std::vector<CorrespondenceSet> read_correspondences(const fs::path& path);

// vehicle track: frame point_id x y valid (fps rides on the version line)
void write_vehicle_track(const fs::path& path, const VehicleTrack& track);
VehicleTrack read_vehicle_track(const fs::path& path);

// labels: sequence apex_frame label (anomaly | background)
void write_labels(const fs::path& path, std::span<const LabeledEvent> events);
std::vector<LabeledEvent> read_labels(const fs::path& path);

// calibration: key value lines (fx fy cx cy width height t_x t_y t_z)
struct Calibration {
  CameraIntrinsics intrinsics;
  TranslationDirection t;
};
void write_calibration(const fs::path& path, const CameraIntrinsics& intr,
                       const TranslationDirection& t);
Calibration read_calibration(const fs::path& path);

// ground truth: frame pitch imu_pitch displacement
void write_ground_truth(const fs::path& path, const GroundTruth& truth);
GroundTruth read_ground_truth(const fs::path& path);

/// Per-frame flag bits in the responses table.
enum FrameFlags : int {
  kFlagInterpolated = 1,  // aggregation had no valid point
  kFlagHeldLast = 2,      // pitch held from the previous frame
  kFlagNotConverged = 4,  // estimator stopped without converging
};

// responses: frame y_hat y_comp phi_rel phi_cum s s_raw flags
void write_responses(const fs::path& path, const PipelineResult& result);
struct ResponseRun {
  ResponseSeries series;
  std::vector<double> phi_rel;
  std::vector<double> phi_cum;
  std::vector<int> flags;
};
ResponseRun read_responses(const fs::path& path, int window);

// detections: frame response window_start window_end
void write_detections(const fs::path& path,
                      std::span<const DetectionEvent> detections);
std::vector<DetectionEvent> read_detections(const fs::path& path);

// run metadata: key value lines describing a detect run
struct RunMeta {
  int window = 30;
  double fps = 30.0;
  double threshold = 1.0;
  int nms_radius = 30;
  bool compensation = true;
};
void write_run_meta(const fs::path& path, const RunMeta& meta);
RunMeta read_run_meta(const fs::path& path);

// metrics report: key value lines
void write_metrics(const fs::path& path, const std::string& run_name,
                   const MetricsReport& report, int positives, int negatives);

// roc table: threshold fpr tpr
void write_roc(const fs::path& path, const RocCurve& curve);

// fpr vs rotation intensity: bin_lo bin_hi count fpr
void write_fpr_intensity(const fs::path& path,
                         std::span<const RotationIntensityBin> bins);

// distance response table: distance response
void write_distance_response(
    const fs::path& path, std::span<const std::pair<double, double>> samples);
std::vector<std::pair<double, double>> read_distance_response(
    const fs::path& path);

}  // namespace roadwatch::io
