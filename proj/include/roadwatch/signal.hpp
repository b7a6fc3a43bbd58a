// Visual-response computation on the tracked preceding vehicle: vertical
// aggregation, ego-pitch compensation, trailing-window standard deviation
// and thresholded detection with non-maximum suppression.

#pragma once

#include <span>
#include <vector>

#include "roadwatch/geometry.hpp"
#include "roadwatch/pitch_estimator.hpp"

namespace roadwatch {

/// Tracker output: per-frame pixel locations of the points kept on the
/// preceding vehicle, with per-point validity.
struct VehicleTrack {
  struct Point {
    double x = 0.0;
    double y = 0.0;
    bool valid = true;
  };
  std::vector<std::vector<Point>> frames;
  double fps = 30.0;
};

/// Hard cap on tracked points per frame.
inline constexpr int kMaxTrackPointsPerFrame = 400;

struct AggregatedTrack {
  std::vector<double> y_hat;
  /// Frames with no valid point, filled by linear interpolation.
  std::vector<uint8_t> interpolated;
};

/// Per-frame mean of the valid points' vertical coordinates. Frames with
/// zero valid points are linearly interpolated from the nearest valid
/// neighbors and flagged. Throws EmptyTrack when no frame has a valid
/// point, ConfigError when a frame exceeds kMaxTrackPointsPerFrame.
AggregatedTrack aggregate_vertical(const VehicleTrack& track);

/// y_comp(t) = y_hat(t) - fy * tan(phi_cum(t)). The series must have equal
/// lengths (LengthMismatch otherwise); |phi_cum| must stay below pi/2.
std::vector<double> compensate(std::span<const double> y_hat,
                               std::span<const PitchEstimate> pitch,
                               const CameraIntrinsics& intr);

/// Trailing-window population standard deviation (divisor = window). The
/// first window-1 entries are undefined and set to NaN. Throws
/// SeriesTooShort when the series is shorter than the window.
std::vector<double> windowed_std(std::span<const double> y, int window);

struct DetectionEvent {
  int frame = 0;          // apex: local maximum of the response
  double response = 0.0;  // response value at the apex
  int window_start = 0;
  int window_end = 0;
};

/// Local maxima of s with s >= threshold; within +-nms_radius frames only
/// the largest survives, ties broken by the earlier frame. NaN entries
/// (undefined warm-up) are skipped. An empty result is valid.
std::vector<DetectionEvent> detect(std::span<const double> s, double threshold,
                                   int nms_radius);

struct ResponseSeries {
  std::vector<double> y_hat;
  std::vector<double> y_comp;
  /// Response the detector ran on (compensated unless disabled).
  std::vector<double> s;
  /// Response of the uncompensated trajectory, for baseline comparison.
  std::vector<double> s_raw;
  int window = 30;

  bool defined(std::size_t frame) const {
    return frame + 1 >= static_cast<std::size_t>(window);
  }
};

struct PipelineConfig {
  EstimatorConfig estimator;
  int window = 30;
  double threshold = 1.0;
  /// 0 selects the window length.
  int nms_radius = 0;
  bool compensation = true;

  void validate() const;
};

struct PipelineResult {
  ResponseSeries response;
  /// Per frame; entry 0 is the identity (no prior motion).
  std::vector<PitchEstimate> pitch;
  std::vector<DetectionEvent> detections;
  std::vector<uint8_t> aggregation_interpolated;
};

/// Full chain: pitch track -> compensation -> windowed std -> detection.
/// frame_pairs.size() must equal track.frames.size() - 1 (LengthMismatch).
PipelineResult run_pipeline(const VehicleTrack& track,
                            std::span<const CorrespondenceSet> frame_pairs,
                            const CameraIntrinsics& intr,
                            const TranslationDirection& t,
                            const PipelineConfig& cfg);

}  // namespace roadwatch
