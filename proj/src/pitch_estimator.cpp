#include "roadwatch/pitch_estimator.hpp"

#include <algorithm>
#include <cmath>

namespace roadwatch {

namespace {

struct ObjectiveEval {
  double value = 0.0;
  double gradient = 0.0;
  double gauss_newton = 0.0;  // positive-semidefinite curvature estimate
  int n_used = 0;
  int n_dropped = 0;
};

// Derivative of the pitch rotation with respect to its angle.
Matrix3 pitch_rotation_derivative(double psi) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  Matrix3 d;
  d << 0.0, 0.0, 0.0,  //
      0.0, -s, -c,     //
      0.0, c, -s;
  return d;
}

// Objective (and optionally its derivatives) at body pitch phi. The
// coordinate-transform angle entering F is psi = -phi; the chain rule
// sign is folded into the per-pair terms below.
ObjectiveEval evaluate_objective(std::span<const PointPair> pairs,
                                 const CameraIntrinsics& intr,
                                 const TranslationDirection& t, double phi,
                                 const EstimatorConfig& cfg,
                                 bool with_derivatives) {
  const double psi = -phi;
  const Matrix3 k_inv = intr.inverse_matrix();
  const Matrix3 left = -k_inv.transpose() * skew(t.vec());
  const Matrix3 f = left * pitch_rotation(PitchAngle(psi)) * k_inv;
  Matrix3 f_dphi = Matrix3::Zero();
  if (with_derivatives) {
    // dF/dphi = dF/dpsi * dpsi/dphi = -dF/dpsi.
    f_dphi = -(left * pitch_rotation_derivative(psi) * k_inv);
  }

  const double scale = cfg.loss_scale;
  ObjectiveEval out;
  for (const PointPair& pair : pairs) {
    if (!pair.is_static) {
      continue;
    }
    const Vector3 p0(pair.p0.x(), pair.p0.y(), 1.0);
    const Vector3 p1(pair.p1.x(), pair.p1.y(), 1.0);
    const Vector3 u = f * p0;
    const Vector3 v = f.transpose() * p1;
    const double denom = u.x() * u.x() + u.y() * u.y() + v.x() * v.x() +
                         v.y() * v.y();
    if (denom < kSampsonDenominatorFloor) {
      ++out.n_dropped;
      continue;
    }
    const double r = p1.dot(u);
    const double sampson = r * r / denom;
    out.value += std::log1p(sampson / scale);
    ++out.n_used;

    if (with_derivatives) {
      const Vector3 du = f_dphi * p0;
      const Vector3 dv = f_dphi.transpose() * p1;
      const double dr = p1.dot(du);
      const double ddenom = 2.0 * (u.x() * du.x() + u.y() * du.y() +
                                   v.x() * dv.x() + v.y() * dv.y());
      const double sqrt_denom = std::sqrt(denom);
      const double e = r / sqrt_denom;
      const double de = (dr - r * ddenom / (2.0 * denom)) / sqrt_denom;
      const double weight = 1.0 / (scale + sampson);
      out.gradient += weight * 2.0 * e * de;
      out.gauss_newton += weight * 2.0 * de * de;
    }
  }
  if (out.n_used < cfg.min_pairs) {
    throw InsufficientCorrespondences(
        "usable correspondences (" + std::to_string(out.n_used) +
        ") below min_pairs (" + std::to_string(cfg.min_pairs) + ")");
  }
  return out;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (max_iterations <= 0 || gradient_tolerance <= 0.0 ||
      step_tolerance <= 0.0 || initial_damping <= 0.0 || damping_up <= 1.0 ||
      damping_down <= 0.0 || damping_down >= 1.0 || min_pairs <= 0 ||
      loss_scale <= 0.0 || integration_decay <= 0.0 ||
      integration_decay > 1.0) {
    throw ConfigError("estimator config: parameters out of range");
  }
  if (phi_clamp <= 0.0 || phi_clamp >= M_PI / 2.0) {
    throw ConfigError("estimator config: phi_clamp must be in (0, pi/2)");
  }
}

double cauchy_loss(double z) {
  if (z < 0.0 || !std::isfinite(z)) {
    throw DomainError("cauchy loss requires z >= 0");
  }
  return std::log1p(z);
}

double cauchy_loss_derivative(double z) {
  if (z < 0.0 || !std::isfinite(z)) {
    throw DomainError("cauchy loss requires z >= 0");
  }
  return 1.0 / (1.0 + z);
}

double robust_objective(std::span<const PointPair> pairs,
                        const CameraIntrinsics& intr,
                        const TranslationDirection& t, double phi,
                        const EstimatorConfig& cfg) {
  cfg.validate();
  return evaluate_objective(pairs, intr, t, phi, cfg, false).value;
}

double robust_objective_gradient(std::span<const PointPair> pairs,
                                 const CameraIntrinsics& intr,
                                 const TranslationDirection& t, double phi,
                                 const EstimatorConfig& cfg) {
  cfg.validate();
  return evaluate_objective(pairs, intr, t, phi, cfg, true).gradient;
}

PitchEstimate estimate_pitch(std::span<const PointPair> pairs,
                             const CameraIntrinsics& intr,
                             const TranslationDirection& t,
                             PitchAngle warm_start,
                             const EstimatorConfig& cfg) {
  cfg.validate();
  double phi =
      std::clamp(warm_start.radians(), -cfg.phi_clamp, cfg.phi_clamp);

  PitchEstimate est;
  double objective =
      evaluate_objective(pairs, intr, t, phi, cfg, false).value;
  est.accepted_objectives.push_back(objective);

  double damping = cfg.initial_damping;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    est.iterations = iter;
    const ObjectiveEval d = evaluate_objective(pairs, intr, t, phi, cfg, true);
    if (std::abs(d.gradient) < cfg.gradient_tolerance) {
      est.converged = true;
      break;
    }

    bool accepted = false;
    bool at_boundary = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const double step = -d.gradient / (d.gauss_newton + damping);
      const double candidate =
          std::clamp(phi + step, -cfg.phi_clamp, cfg.phi_clamp);
      if (candidate == phi) {
        // Clamped with no movement: the minimizer lies outside the
        // search domain in this direction.
        at_boundary = true;
        break;
      }
      const double candidate_objective =
          evaluate_objective(pairs, intr, t, candidate, cfg, false).value;
      if (candidate_objective <= objective) {
        const double step_taken = std::abs(candidate - phi);
        phi = candidate;
        objective = candidate_objective;
        est.accepted_objectives.push_back(objective);
        damping = std::max(damping * cfg.damping_down, 1e-12);
        if (step_taken < cfg.step_tolerance) {
          est.converged = true;
        }
        accepted = true;
        break;
      }
      damping *= cfg.damping_up;
      if (damping > 1e14) {
        break;
      }
    }
    if (at_boundary) {
      est.converged = true;
      break;
    }
    if (!accepted || est.converged) {
      break;
    }
  }

  const ObjectiveEval final_eval =
      evaluate_objective(pairs, intr, t, phi, cfg, false);
  est.phi_rel = phi;
  est.phi_cum = phi;
  est.objective = final_eval.value;
  est.n_pairs_used = final_eval.n_used;
  est.n_pairs_dropped = final_eval.n_dropped;
  return est;
}

std::vector<PitchEstimate> estimate_pitch_track(
    std::span<const CorrespondenceSet> frame_pairs,
    const CameraIntrinsics& intr, const TranslationDirection& t,
    const EstimatorConfig& cfg) {
  cfg.validate();
  std::vector<PitchEstimate> track;
  track.reserve(frame_pairs.size());

  double previous_rel = 0.0;
  double previous_cum = 0.0;
  for (const CorrespondenceSet& set : frame_pairs) {
    PitchEstimate est;
    try {
      est = estimate_pitch(set.pairs, intr, t, PitchAngle(previous_rel), cfg);
    } catch (const InsufficientCorrespondences&) {
      est = PitchEstimate{};
      est.phi_rel = previous_rel;
      est.held_last = true;
      est.n_pairs_used = static_cast<int>(
          std::count_if(set.pairs.begin(), set.pairs.end(),
                        [](const PointPair& p) { return p.is_static; }));
    }
    est.phi_cum = cfg.integration_decay * previous_cum + est.phi_rel;
    previous_rel = est.phi_rel;
    previous_cum = est.phi_cum;
    track.push_back(std::move(est));
  }
  return track;
}

}  // namespace roadwatch
