#include <doctest.h>

#include <cmath>
#include <vector>

#include "roadwatch/synth.hpp"

using namespace roadwatch;

namespace {

const CameraIntrinsics kIntrinsics(1066.0, 1066.0, 960.0, 540.0, 1920, 1080);

double aggregate_mean(const VehicleTrack& track, int frame) {
  double sum = 0.0;
  int count = 0;
  for (const auto& p : track.frames[frame]) {
    if (p.valid) {
      sum += p.y;
      ++count;
    }
  }
  REQUIRE(count > 0);
  return sum / count;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  SceneConfig scene;
  scene.seed = 12;
  scene.duration = 30;
  scene.noise_sigma = 0.4;
  scene.outlier_fraction = 0.1;
  BumpProfile bump{BumpProfile::Kind::vehicle_displacement, 15, 11, 0.06};
  const auto a = generate_sequence(scene, std::span(&bump, 1), VehicleConfig{},
                                   kIntrinsics, TranslationDirection::forward());
  const auto b = generate_sequence(scene, std::span(&bump, 1), VehicleConfig{},
                                   kIntrinsics, TranslationDirection::forward());
  REQUIRE(a.correspondences.size() == b.correspondences.size());
  for (std::size_t k = 0; k < a.correspondences.size(); ++k) {
    const auto& pa = a.correspondences[k].pairs;
    const auto& pb = b.correspondences[k].pairs;
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].p0 == pb[i].p0);
      CHECK(pa[i].p1 == pb[i].p1);
      CHECK(pa[i].is_static == pb[i].is_static);
    }
  }
  for (std::size_t k = 0; k < a.track.frames.size(); ++k) {
    for (std::size_t i = 0; i < a.track.frames[k].size(); ++i) {
      CHECK(a.track.frames[k][i].x == b.track.frames[k][i].x);
      CHECK(a.track.frames[k][i].y == b.track.frames[k][i].y);
    }
  }
  CHECK(a.truth.imu_pitch == b.truth.imu_pitch);
}

TEST_CASE("static correspondences are exactly epipolar") {
  SceneConfig scene;
  scene.seed = 3;
  scene.duration = 40;
  scene.n_static_points = 150;
  BumpProfile pulse{BumpProfile::Kind::ego_pitch, 20, 14, 0.03};
  const auto seq = generate_sequence(scene, std::span(&pulse, 1),
                                     VehicleConfig{}, kIntrinsics,
                                     TranslationDirection::forward());
  for (std::size_t k = 0; k + 1 < seq.truth.pitch.size(); ++k) {
    const double delta_phi = seq.truth.pitch[k + 1] - seq.truth.pitch[k];
    // The coordinate-transform angle entering F is the negated body angle.
    const Matrix3 f = fundamental_from_pitch(
        kIntrinsics, TranslationDirection::forward(), PitchAngle(-delta_phi));
    for (const PointPair& pair : seq.correspondences[k].pairs) {
      if (!pair.is_static) {
        continue;
      }
      CHECK(sampson_error(pair, f) < 1e-12);
    }
  }
}

TEST_CASE("no excitation leaves the vehicle image still") {
  SceneConfig scene;
  scene.seed = 9;
  scene.duration = 25;
  const auto seq =
      generate_sequence(scene, {}, VehicleConfig{}, kIntrinsics,
                        TranslationDirection::forward());
  const double y0 = aggregate_mean(seq.track, 0);
  for (int k = 1; k < scene.duration; ++k) {
    CHECK(aggregate_mean(seq.track, k) == doctest::Approx(y0).epsilon(1e-15));
  }
  const Matrix3 f = fundamental_from_pitch(
      kIntrinsics, TranslationDirection::forward(), PitchAngle(0.0));
  for (const PointPair& pair : seq.correspondences[0].pairs) {
    if (pair.is_static) {
      CHECK(sampson_error(pair, f) < 1e-12);
    }
  }
  CHECK(seq.truth.apex_frames.empty());
}

TEST_CASE("displacement pulse deflects the trajectory by f*delta/d") {
  SceneConfig scene;
  scene.seed = 17;
  scene.duration = 60;
  VehicleConfig vehicle;
  vehicle.distance = 10.0;
  BumpProfile bump{BumpProfile::Kind::vehicle_displacement, 30, 11, 0.06};
  const auto seq = generate_sequence(scene, std::span(&bump, 1), vehicle,
                                     kIntrinsics,
                                     TranslationDirection::forward());
  const double baseline = aggregate_mean(seq.track, 0);
  double peak = 0.0;
  for (int k = 0; k < scene.duration; ++k) {
    peak = std::max(peak, std::abs(aggregate_mean(seq.track, k) - baseline));
  }
  const double expected = 1066.0 * 0.06 / 10.0;  // 6.396 px
  CHECK(peak == doctest::Approx(expected).epsilon(0.02));
  REQUIRE(seq.truth.apex_frames.size() == 1);
  CHECK(seq.truth.apex_frames[0] == 30);
  // The labeled apex is the pulse maximum.
  CHECK(seq.truth.displacement[30] ==
        doctest::Approx(0.06).epsilon(1e-12));
  for (int k = 0; k < scene.duration; ++k) {
    CHECK(seq.truth.displacement[k] <= seq.truth.displacement[30] + 1e-15);
  }
}

TEST_CASE("ground-truth pitch is the scripted half-sine") {
  SceneConfig scene;
  scene.seed = 23;
  scene.duration = 50;
  scene.n_static_points = 30;
  BumpProfile pulse{BumpProfile::Kind::ego_pitch, 25, 16, 0.02};
  const auto seq = generate_sequence(scene, std::span(&pulse, 1),
                                     VehicleConfig{}, kIntrinsics,
                                     TranslationDirection::forward());
  for (int k = 0; k < scene.duration; ++k) {
    const double start = 25.0 - 8.0;
    const double u = (k - start) / 16.0;
    const double expected =
        (u > 0.0 && u < 1.0) ? 0.02 * std::sin(M_PI * u) : 0.0;
    CHECK(seq.truth.pitch[k] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("response model prediction") {
  CHECK(predict_response(10.0, 0.06, 1066.0, 1.0, 0.0) ==
        doctest::Approx(6.396).epsilon(1e-12));
  CHECK(predict_response(25.0, 0.0, 1066.0, 1.0, 2.5) == 2.5);
  CHECK(predict_response(5.0, 0.06, 1066.0, 1.0, 0.0) ==
        doctest::Approx(2.0 * predict_response(10.0, 0.06, 1066.0, 1.0, 0.0)));
  CHECK_THROWS_AS(predict_response(0.0, 0.06, 1066.0, 1.0, 0.0), DomainError);
}

TEST_CASE("signal model fit") {
  SUBCASE("exact samples are reproduced") {
    std::vector<std::pair<double, double>> samples;
    for (double d : {5.0, 8.0, 12.0, 20.0, 33.0}) {
      samples.emplace_back(d, predict_response(d, 0.06, 1066.0, 1.0, 2.0));
    }
    const auto fit = fit_signal_model(samples, 1066.0, 0.06);
    CHECK(fit.alpha == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.residual_rms < 1e-9);
  }
  SUBCASE("two-point exact solve") {
    const std::vector<std::pair<double, double>> samples{
        {10.0, 6.396 + 2.0}, {20.0, 3.198 + 2.0}};
    const auto fit = fit_signal_model(samples, 1066.0, 0.06);
    CHECK(fit.alpha == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("identical distances are degenerate") {
    const std::vector<std::pair<double, double>> samples{
        {10.0, 6.0}, {10.0, 6.1}, {10.0, 5.9}};
    CHECK_THROWS_AS(fit_signal_model(samples, 1066.0, 0.06), DegenerateFit);
  }
  SUBCASE("one sample is not enough") {
    const std::vector<std::pair<double, double>> samples{{10.0, 6.0}};
    CHECK_THROWS_AS(fit_signal_model(samples, 1066.0, 0.06), DegenerateFit);
  }
}

TEST_CASE("response vs distance experiment") {
  SceneConfig scene;
  scene.seed = 40;
  scene.duration = 150;
  scene.n_static_points = 120;
  VehicleConfig vehicle;
  BumpProfile bump{BumpProfile::Kind::vehicle_displacement, 90, 11, 0.06};
  PipelineConfig pipeline;
  pipeline.threshold = 0.5;
  const std::vector<double> distances{5.0, 10.0, 20.0, 40.0};

  SUBCASE("apex response decreases with distance and fits the 1/d law") {
    const auto samples = response_vs_distance_experiment(
        distances, scene, vehicle, bump, kIntrinsics,
        TranslationDirection::forward(), pipeline);
    REQUIRE(samples.size() == distances.size());
    for (std::size_t i = 1; i < samples.size(); ++i) {
      CHECK(samples[i].apex_response < samples[i - 1].apex_response);
    }
    std::vector<std::pair<double, double>> points;
    for (const auto& s : samples) {
      points.emplace_back(s.distance, s.apex_response);
    }
    const auto fit = fit_signal_model(points, 1066.0, 0.06);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    double mean = 0.0;
    for (const auto& [d, s] : points) {
      mean += s;
    }
    mean /= points.size();
    for (const auto& [d, s] : points) {
      const double prediction =
          predict_response(d, 0.06, 1066.0, fit.alpha, fit.beta);
      ss_res += (s - prediction) * (s - prediction);
      ss_tot += (s - mean) * (s - mean);
    }
    CHECK(1.0 - ss_res / ss_tot > 0.95);
  }

  SUBCASE("no displacement means apex equals background") {
    BumpProfile flat = bump;
    flat.amplitude = 0.0;
    const auto samples = response_vs_distance_experiment(
        std::vector<double>{10.0, 20.0}, scene, vehicle, flat, kIntrinsics,
        TranslationDirection::forward(), pipeline);
    for (const auto& s : samples) {
      CHECK(s.apex_response == doctest::Approx(s.background_response)
                                   .epsilon(1e-9));
    }
  }
}

TEST_CASE("configuration validation") {
  SceneConfig bad_depth;
  bad_depth.depth_min = -1.0;
  CHECK_THROWS_AS(bad_depth.validate(), ConfigError);

  SceneConfig bad_outliers;
  bad_outliers.outlier_fraction = 0.5;
  CHECK_THROWS_AS(bad_outliers.validate(), ConfigError);

  VehicleConfig close_vehicle;
  close_vehicle.distance = 0.5;
  CHECK_THROWS_AS(close_vehicle.validate(), ConfigError);

  BumpProfile bad_bump{BumpProfile::Kind::ego_pitch, 5, 1, 0.01};
  CHECK_THROWS_AS(bad_bump.validate(), ConfigError);

  SceneConfig scene;
  scene.duration = 10;
  BumpProfile outside{BumpProfile::Kind::ego_pitch, 50, 4, 0.01};
  CHECK_THROWS_AS(
      generate_sequence(scene, std::span(&outside, 1), VehicleConfig{},
                        kIntrinsics, TranslationDirection::forward()),
      ConfigError);
}
