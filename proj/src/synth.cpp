#include "roadwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace roadwatch {

namespace {

struct Projection {
  double x = 0.0;
  double y = 0.0;
  bool valid = false;
};

Projection project(const CameraIntrinsics& intr, const Vector3& point) {
  Projection p;
  if (point.z() < 0.5) {
    return p;
  }
  p.x = intr.fx * point.x() / point.z() + intr.cx;
  p.y = intr.fy * point.y() / point.z() + intr.cy;
  p.valid = p.x >= 0.0 && p.x < intr.width && p.y >= 0.0 && p.y < intr.height;
  return p;
}

// Static correspondences of one frame pair. Points are sampled in the
// first camera, mapped by the exact relative motion (relative body pitch
// delta_phi, forward step along the calibrated direction) and kept when
// they stay inside both images.
void append_static_pairs(std::mt19937_64& rng, const CameraIntrinsics& intr,
                         const TranslationDirection& t, int n_points,
                         double depth_min, double depth_max, double step_m,
                         double delta_phi, double noise_sigma,
                         double outlier_fraction, bool outliers_flagged_static,
                         std::vector<PointPair>& out) {
  const Matrix3 k_inv = intr.inverse_matrix();
  const Matrix3 rotation = pitch_rotation(PitchAngle(-delta_phi));
  const Vector3 translation = -step_m * t.vec();

  std::uniform_real_distribution<double> px(2.0, intr.width - 2.0);
  std::uniform_real_distribution<double> py(2.0, intr.height - 2.0);
  std::uniform_real_distribution<double> pz(depth_min, depth_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> displacement(-20.0, 20.0);

  const std::size_t first = out.size();
  int produced = 0;
  int attempts = 0;
  const int max_attempts = 200 * n_points + 1000;
  while (produced < n_points && attempts < max_attempts) {
    ++attempts;
    const double u = px(rng);
    const double v = py(rng);
    const double depth = pz(rng);
    const Vector3 x0 = depth * (k_inv * Vector3(u, v, 1.0));
    const Vector3 x1 = rotation * x0 + translation;
    const Projection p1 = project(intr, x1);
    if (!p1.valid) {
      continue;
    }
    out.push_back(PointPair{{u, v}, {p1.x, p1.y}, true});
    ++produced;
  }
  if (produced < n_points) {
    throw ConfigError("static point sampling failed; scene too constrained");
  }

  if (noise_sigma > 0.0) {
    for (std::size_t i = first; i < out.size(); ++i) {
      out[i].p1.x() += noise_sigma * gauss(rng);
      out[i].p1.y() += noise_sigma * gauss(rng);
    }
  }

  const int n_outliers =
      static_cast<int>(std::lround(outlier_fraction * produced));
  if (n_outliers > 0) {
    std::vector<std::size_t> indices(produced);
    std::iota(indices.begin(), indices.end(), first);
    std::shuffle(indices.begin(), indices.end(), rng);
    for (int i = 0; i < n_outliers; ++i) {
      PointPair& pair = out[indices[i]];
      pair.p1.x() += displacement(rng);
      pair.p1.y() += displacement(rng);
      pair.is_static = outliers_flagged_static;
    }
  }
}

double median(std::vector<double> values) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

}  // namespace

void SceneConfig::validate() const {
  if (n_static_points < 1 || duration < 2 || fps <= 0.0 || ego_speed < 0.0 ||
      noise_sigma < 0.0 || imu_rate_noise_sigma < 0.0 ||
      imu_bias_walk_sigma < 0.0) {
    throw ConfigError("scene config: parameters out of range");
  }
  if (!(depth_min > 0.0) || !(depth_max > depth_min)) {
    throw ConfigError("scene config: depth range must be positive");
  }
  if (!(outlier_fraction >= 0.0) || outlier_fraction >= 0.5) {
    throw ConfigError("scene config: outlier fraction must be in [0, 0.5)");
  }
}

double BumpProfile::value_at(int frame) const {
  const double start = apex_frame - 0.5 * duration;
  const double u = (frame - start) / duration;
  if (u <= 0.0 || u >= 1.0) {
    return 0.0;
  }
  return amplitude * std::sin(M_PI * u);
}

void BumpProfile::validate() const {
  if (amplitude < 0.0) {
    throw ConfigError("bump profile: amplitude must be non-negative");
  }
  if (duration < 2) {
    throw ConfigError("bump profile: duration must be at least 2 frames");
  }
}

void VehicleConfig::validate() const {
  if (!(distance > 1.0)) {
    throw ConfigError("vehicle config: distance must exceed 1 m");
  }
  for (double d : distance_series) {
    if (!(d > 1.0)) {
      throw ConfigError("vehicle config: distance must exceed 1 m");
    }
  }
  if (n_points < 4 || n_points > kMaxTrackPointsPerFrame) {
    throw ConfigError("vehicle config: n_points out of range");
  }
  if (!(rear_width > 0.0) || !(rear_height > 0.0)) {
    throw ConfigError("vehicle config: rear plane size must be positive");
  }
}

SyntheticSequence generate_sequence(const SceneConfig& scene,
                                    std::span<const BumpProfile> bumps,
                                    const VehicleConfig& vehicle,
                                    const CameraIntrinsics& intr,
                                    const TranslationDirection& t) {
  scene.validate();
  vehicle.validate();
  const int n = scene.duration;
  for (const BumpProfile& bump : bumps) {
    bump.validate();
    if (bump.apex_frame < 0 || bump.apex_frame >= n) {
      throw ConfigError("bump profile: apex frame outside the sequence");
    }
  }
  if (!vehicle.distance_series.empty() &&
      vehicle.distance_series.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("vehicle config: distance series length mismatch");
  }

  SyntheticSequence seq;
  GroundTruth& truth = seq.truth;
  truth.pitch.assign(n, 0.0);
  truth.displacement.assign(n, 0.0);
  for (const BumpProfile& bump : bumps) {
    if (bump.kind == BumpProfile::Kind::ego_pitch) {
      for (int k = 0; k < n; ++k) {
        truth.pitch[k] += bump.value_at(k);
      }
    } else {
      for (int k = 0; k < n; ++k) {
        truth.displacement[k] += bump.value_at(k);
      }
      truth.apex_frames.push_back(bump.apex_frame);
    }
  }
  std::sort(truth.apex_frames.begin(), truth.apex_frames.end());

  std::mt19937_64 rng(scene.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Simulated rate gyro: true angular rate plus a random-walk bias and
  // white noise, integrated back to an angle.
  truth.imu_pitch.assign(n, 0.0);
  double bias = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    const double rate_true = (truth.pitch[k + 1] - truth.pitch[k]) * scene.fps;
    bias += scene.imu_bias_walk_sigma * gauss(rng);
    const double rate_measured =
        rate_true + bias + scene.imu_rate_noise_sigma * gauss(rng);
    truth.imu_pitch[k + 1] = truth.imu_pitch[k] + rate_measured / scene.fps;
  }

  // Rear-plane grid, roughly matching the plane's aspect ratio.
  const double aspect = vehicle.rear_width / vehicle.rear_height;
  const int ny = std::max(
      2, static_cast<int>(std::lround(std::sqrt(vehicle.n_points / aspect))));
  const int nx = std::max(2, vehicle.n_points / ny);
  std::vector<Vector2> grid;
  grid.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double gx =
          -0.5 * vehicle.rear_width + vehicle.rear_width * ix / (nx - 1);
      const double gy =
          -0.5 * vehicle.rear_height + vehicle.rear_height * iy / (ny - 1);
      grid.emplace_back(gx, gy);
    }
  }

  const auto distance_at = [&](int k) {
    return vehicle.distance_series.empty() ? vehicle.distance
                                           : vehicle.distance_series[k];
  };

  // Noise-free projections of the vehicle grid per frame. The vehicle
  // keeps a constant world offset from the camera, so its image motion is
  // exactly the scripted pitch rotation plus the anomaly displacement.
  std::vector<std::vector<Projection>> clean(n);
  for (int k = 0; k < n; ++k) {
    const Matrix3 world_to_camera = pitch_rotation(PitchAngle(-truth.pitch[k]));
    clean[k].reserve(grid.size());
    for (const Vector2& g : grid) {
      const Vector3 offset(g.x(),
                           vehicle.center_height + g.y() -
                               truth.displacement[k],
                           distance_at(k));
      clean[k].push_back(project(intr, world_to_camera * offset));
    }
  }

  seq.track.fps = scene.fps;
  seq.track.frames.resize(n);
  for (int k = 0; k < n; ++k) {
    auto& frame = seq.track.frames[k];
    frame.reserve(grid.size());
    for (const Projection& p : clean[k]) {
      VehicleTrack::Point point{p.x, p.y, p.valid};
      if (scene.noise_sigma > 0.0) {
        point.x += scene.noise_sigma * gauss(rng);
        point.y += scene.noise_sigma * gauss(rng);
      }
      frame.push_back(point);
    }
  }

  const double step = scene.ego_speed / scene.fps;
  seq.correspondences.resize(n - 1);
  for (int k = 0; k + 1 < n; ++k) {
    auto& pairs = seq.correspondences[k].pairs;
    append_static_pairs(rng, intr, t, scene.n_static_points, scene.depth_min,
                        scene.depth_max, step,
                        truth.pitch[k + 1] - truth.pitch[k], scene.noise_sigma,
                        scene.outlier_fraction, scene.outliers_flagged_static,
                        pairs);
    // Points on the vehicle, marked non-static: the estimator must skip
    // them the same way masked-out car points are skipped on real data.
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (!clean[k][j].valid || !clean[k + 1][j].valid) {
        continue;
      }
      PointPair pair{{clean[k][j].x, clean[k][j].y},
                     {clean[k + 1][j].x, clean[k + 1][j].y},
                     false};
      if (scene.noise_sigma > 0.0) {
        pair.p0.x() += scene.noise_sigma * gauss(rng);
        pair.p0.y() += scene.noise_sigma * gauss(rng);
        pair.p1.x() += scene.noise_sigma * gauss(rng);
        pair.p1.y() += scene.noise_sigma * gauss(rng);
      }
      pairs.push_back(pair);
    }
  }
  return seq;
}

std::vector<PointPair> generate_pair_instance(
    int n_points, double depth_min, double depth_max, double step_m,
    double phi_rel, double noise_sigma, double outlier_fraction,
    std::uint64_t seed, const CameraIntrinsics& intr,
    const TranslationDirection& t) {
  if (n_points < 1 || !(depth_min > 0.0) || !(depth_max > depth_min)) {
    throw ConfigError("pair instance: invalid sampling parameters");
  }
  std::mt19937_64 rng(seed);
  std::vector<PointPair> pairs;
  pairs.reserve(n_points);
  append_static_pairs(rng, intr, t, n_points, depth_min, depth_max, step_m,
                      phi_rel, noise_sigma, outlier_fraction, true, pairs);
  return pairs;
}

double predict_response(double distance, double delta, double focal,
                        double alpha, double beta) {
  if (!(distance > 0.0)) {
    throw DomainError("distance must be positive");
  }
  return alpha * focal * delta / distance + beta;
}

SignalModelFit fit_signal_model(
    std::span<const std::pair<double, double>> samples, double focal,
    double delta) {
  if (samples.size() < 2) {
    throw DegenerateFit("model fit needs at least two samples");
  }
  double sum_b = 0.0;
  double sum_bb = 0.0;
  double sum_s = 0.0;
  double sum_bs = 0.0;
  const double n = static_cast<double>(samples.size());
  for (const auto& [distance, response] : samples) {
    if (!(distance > 0.0)) {
      throw DomainError("distance must be positive");
    }
    const double basis = focal * delta / distance;
    sum_b += basis;
    sum_bb += basis * basis;
    sum_s += response;
    sum_bs += basis * response;
  }
  const double det = n * sum_bb - sum_b * sum_b;
  if (std::abs(det) <= 1e-12 * std::max(1.0, n * sum_bb)) {
    throw DegenerateFit("distances carry no spread; cannot separate alpha and beta");
  }
  SignalModelFit fit;
  fit.alpha = (n * sum_bs - sum_b * sum_s) / det;
  fit.beta = (sum_bb * sum_s - sum_b * sum_bs) / det;
  double acc = 0.0;
  for (const auto& [distance, response] : samples) {
    const double r = response - (fit.alpha * focal * delta / distance + fit.beta);
    acc += r * r;
  }
  fit.residual_rms = std::sqrt(acc / n);
  return fit;
}

std::vector<DistanceResponseSample> response_vs_distance_experiment(
    std::span<const double> distances, const SceneConfig& scene,
    const VehicleConfig& vehicle, const BumpProfile& bump,
    const CameraIntrinsics& intr, const TranslationDirection& t,
    const PipelineConfig& pipeline) {
  if (bump.kind != BumpProfile::Kind::vehicle_displacement) {
    throw ConfigError("distance experiment needs a vehicle displacement bump");
  }
  std::vector<DistanceResponseSample> results;
  results.reserve(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 1.0)) {
      throw ConfigError("distance experiment: distances must exceed 1 m");
    }
    SceneConfig scene_i = scene;
    scene_i.seed = scene.seed + i;
    VehicleConfig vehicle_i = vehicle;
    vehicle_i.distance = distances[i];
    vehicle_i.distance_series.clear();

    const SyntheticSequence seq =
        generate_sequence(scene_i, std::span(&bump, 1), vehicle_i, intr, t);
    const PipelineResult run = run_pipeline(seq.track, seq.correspondences,
                                            intr, t, pipeline);
    const auto& s = run.response.s;
    const int window = run.response.window;
    const int half = window / 2;

    DistanceResponseSample sample;
    sample.distance = distances[i];
    sample.apex_response = 0.0;
    for (int k = std::max(0, bump.apex_frame - half);
         k <= std::min<int>(s.size() - 1, bump.apex_frame + half); ++k) {
      if (run.response.defined(k)) {
        sample.apex_response = std::max(sample.apex_response, s[k]);
      }
    }
    std::vector<double> background;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (run.response.defined(k) &&
          std::abs(static_cast<int>(k) - bump.apex_frame) > 2 * window) {
        background.push_back(s[k]);
      }
    }
    sample.background_response = median(std::move(background));
    results.push_back(sample);
  }
  return results;
}

}  // namespace roadwatch
