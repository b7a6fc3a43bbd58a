// Deterministic synthetic scene generator: pinhole projection of static
// scene features and of a preceding vehicle's rear plane under scripted
// ego forward motion, pitch pulses and anomaly displacement pulses, with
// configurable noise and outliers. Stands in for recorded data and
// provides exact ground truth for the estimator and the detector.
//
// The generated correspondences of each frame pair are exactly consistent
// with the epipolar model the estimator fits (translation along the
// calibrated forward direction plus the scripted relative pitch), and the
// vehicle keeps a constant world offset from the camera so its image
// motion is exactly the scripted pitch plus the scripted anomaly
// displacement. Pitch angles follow the body convention of
// pitch_estimator.hpp (nose-up positive).

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "roadwatch/geometry.hpp"
#include "roadwatch/signal.hpp"

namespace roadwatch {

struct SceneConfig {
  std::uint64_t seed = 1;
  int n_static_points = 300;
  double depth_min = 4.0;   // meters
  double depth_max = 60.0;  // meters
  double ego_speed = 5.56;  // m/s, about 20 km/h
  double fps = 30.0;
  double noise_sigma = 0.0;      // pixels, on tracked endpoints
  double outlier_fraction = 0.0;  // of static pairs, in [0, 0.5)
  int duration = 240;             // frames
  /// Outliers keep is_static = true so the robust estimator has to reject
  /// them itself; set false to mark them for oracle-style filtering.
  bool outliers_flagged_static = true;
  /// Simulated rate gyro for the pitch comparison channel.
  double imu_rate_noise_sigma = 0.01;  // rad/s, white
  double imu_bias_walk_sigma = 2e-4;   // rad/s random walk per frame

  void validate() const;
};

struct BumpProfile {
  enum class Kind { ego_pitch, vehicle_displacement };

  Kind kind = Kind::vehicle_displacement;
  int apex_frame = 0;
  int duration = 11;
  /// Radians (ego_pitch) or meters (vehicle_displacement). Half-sine
  /// shape peaking at apex_frame.
  double amplitude = 0.0;

  double value_at(int frame) const;
  void validate() const;
};

struct VehicleConfig {
  double distance = 10.0;  // meters, used when distance_series is empty
  std::vector<double> distance_series;
  double rear_width = 1.8;   // meters
  double rear_height = 1.2;  // meters
  int n_points = 100;        // grid points on the rear plane, <= 400
  /// Vertical offset of the rear-plane center below the camera (m).
  double center_height = 0.0;

  void validate() const;
};

struct GroundTruth {
  /// Cumulative body pitch per frame (radians, nose-up positive).
  std::vector<double> pitch;
  /// Integrated noisy rate gyro, same length; drifts by construction.
  std::vector<double> imu_pitch;
  /// Vehicle vertical displacement per frame (meters, upward positive).
  std::vector<double> displacement;
  /// One labeled apex frame per vehicle_displacement pulse.
  std::vector<int> apex_frames;
};

struct SyntheticSequence {
  std::vector<CorrespondenceSet> correspondences;  // duration - 1 sets
  VehicleTrack track;                              // duration frames
  GroundTruth truth;
};

/// Generates the full sequence. Deterministic for a fixed configuration.
SyntheticSequence generate_sequence(const SceneConfig& scene,
                                    std::span<const BumpProfile> bumps,
                                    const VehicleConfig& vehicle,
                                    const CameraIntrinsics& intr,
                                    const TranslationDirection& t);

/// Single frame-pair instance: n static correspondences for a forward
/// step of step_m meters and a relative body pitch of phi_rel radians,
/// with optional noise and gross outliers. The estimator's recovery of
/// phi_rel from the clean version is exact up to solver tolerances.
std::vector<PointPair> generate_pair_instance(
    int n_points, double depth_min, double depth_max, double step_m,
    double phi_rel, double noise_sigma, double outlier_fraction,
    std::uint64_t seed, const CameraIntrinsics& intr,
    const TranslationDirection& t);

/// Response model s_hat(d) = alpha * f * delta / d + beta.
double predict_response(double distance, double delta, double focal,
                        double alpha, double beta);

struct SignalModelFit {
  double alpha = 0.0;
  double beta = 0.0;
  double residual_rms = 0.0;
};

/// Closed-form linear least squares of (alpha, beta) on the basis
/// [f * delta / d, 1]. Throws DegenerateFit when the distances carry no
/// spread (all equal) or fewer than two samples are given.
SignalModelFit fit_signal_model(
    std::span<const std::pair<double, double>> samples, double focal,
    double delta);

struct DistanceResponseSample {
  double distance = 0.0;
  double apex_response = 0.0;
  double background_response = 0.0;
};

/// For each distance, generates a bump-traversal sequence, runs the full
/// pipeline and records the response at the event apex and the median
/// response away from it.
std::vector<DistanceResponseSample> response_vs_distance_experiment(
    std::span<const double> distances, const SceneConfig& scene,
    const VehicleConfig& vehicle, const BumpProfile& bump,
    const CameraIntrinsics& intr, const TranslationDirection& t,
    const PipelineConfig& pipeline);

}  // namespace roadwatch
