// Robust estimation of the relative camera pitch between consecutive
// frames by minimizing sum_i rho(S(p0_i, p1_i, F)) over the single pitch
// parameter with a damped Newton (Levenberg-Marquardt) iteration and the
// Cauchy loss rho(z) = log(1 + z).
//
// Sign convention, stated once and used everywhere downstream:
//
//   Reported pitch angles are CAMERA BODY angles, nose-up positive: a
//   positive phi_rel means the camera rotated upward between frame t and
//   frame t+1, which moves image content DOWN (pixel y grows, y points
//   down). Compensation therefore subtracts fy * tan(phi_cum) from the
//   tracked vertical trajectory (see signal.hpp).
//
//   The coordinate-transform rotation that enters F (geometry.hpp) is the
//   inverse of the body rotation, so the objective evaluated at body
//   angle phi uses F(-phi). robust_objective() and estimate_pitch() agree
//   on this convention; grid searches over robust_objective() are directly
//   comparable with the estimator output.

#pragma once

#include <span>
#include <vector>

#include "roadwatch/geometry.hpp"

namespace roadwatch {

struct EstimatorConfig {
  int max_iterations = 50;
  /// Stop when |dJ/dphi| falls below this.
  double gradient_tolerance = 1e-10;
  /// Stop when an accepted step is shorter than this (radians).
  double step_tolerance = 1e-9;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  /// Search domain is [-phi_clamp, phi_clamp] (radians).
  double phi_clamp = 0.3;
  /// Minimum usable static pairs; below it estimation is refused.
  int min_pairs = 8;
  /// Sampson errors are divided by this before the Cauchy loss. 1.0
  /// applies the loss to raw squared-pixel errors.
  double loss_scale = 1.0;
  /// phi_cum(k) = integration_decay * phi_cum(k-1) + phi_rel(k).
  /// 1.0 integrates exactly; slightly below 1 bounds drift on long runs.
  double integration_decay = 1.0;

  void validate() const;
};

struct PitchEstimate {
  /// Relative body pitch frame t -> t+1, radians, nose-up positive.
  double phi_rel = 0.0;
  /// Cumulative body pitch w.r.t. the sequence start.
  double phi_cum = 0.0;
  /// Final robust cost.
  double objective = 0.0;
  int iterations = 0;
  int n_pairs_used = 0;
  int n_pairs_dropped = 0;
  bool converged = false;
  /// True when the frame had too few correspondences and phi_rel was
  /// copied from the previous frame (hold-last policy).
  bool held_last = false;
  /// Objective after each accepted step, starting with the warm-start
  /// value. Monotonically non-increasing.
  std::vector<double> accepted_objectives;
};

/// Cauchy loss rho(z) = log(1 + z). Throws DomainError for z < 0.
double cauchy_loss(double z);

/// d rho / d z = 1 / (1 + z).
double cauchy_loss_derivative(double z);

/// Robust objective at body pitch phi: sum of cauchy_loss over the
/// Sampson errors of every usable pair (is_static, non-degenerate).
/// Summation order is the input order. Throws InsufficientCorrespondences
/// when fewer than cfg.min_pairs pairs are usable.
double robust_objective(std::span<const PointPair> pairs,
                        const CameraIntrinsics& intr,
                        const TranslationDirection& t, double phi,
                        const EstimatorConfig& cfg = {});

/// Analytic derivative of the robust objective with respect to phi; the
/// solver uses the same expression internally.
double robust_objective_gradient(std::span<const PointPair> pairs,
                                 const CameraIntrinsics& intr,
                                 const TranslationDirection& t, double phi,
                                 const EstimatorConfig& cfg = {});

/// Minimizes the robust objective over phi in [-phi_clamp, phi_clamp],
/// warm-started at warm_start. Accepted steps never increase the
/// objective. Non-convergence within max_iterations is reported through
/// converged = false, not an error.
PitchEstimate estimate_pitch(std::span<const PointPair> pairs,
                             const CameraIntrinsics& intr,
                             const TranslationDirection& t,
                             PitchAngle warm_start,
                             const EstimatorConfig& cfg = {});

/// Per-frame-pair estimation over a temporally ordered sequence. Frame k
/// is warm-started at phi_rel(k-1), frame 0 at zero. Frames with too few
/// correspondences hold the previous phi_rel and are flagged. phi_cum is
/// the (optionally leaky) running sum of phi_rel.
std::vector<PitchEstimate> estimate_pitch_track(
    std::span<const CorrespondenceSet> frame_pairs,
    const CameraIntrinsics& intr, const TranslationDirection& t,
    const EstimatorConfig& cfg = {});

}  // namespace roadwatch
