#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "roadwatch/signal.hpp"
#include "roadwatch/synth.hpp"

using namespace roadwatch;

namespace {

const CameraIntrinsics kIntrinsics(1066.0, 1066.0, 960.0, 540.0, 1920, 1080);

VehicleTrack constant_track(int frames, std::vector<double> ys) {
  VehicleTrack track;
  track.frames.resize(frames);
  for (auto& frame : track.frames) {
    for (double y : ys) {
      frame.push_back({100.0, y, true});
    }
  }
  return track;
}

// Second, independent evaluation of the trailing-window population std.
std::vector<double> windowed_std_reference(const std::vector<double>& y,
                                           int window) {
  std::vector<double> s(y.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = window - 1; t < y.size(); ++t) {
    double mean = 0.0;
    for (int i = 0; i < window; ++i) {
      mean += y[t - i];
    }
    mean /= window;
    double var = 0.0;
    for (int i = 0; i < window; ++i) {
      var += (y[t - i] - mean) * (y[t - i] - mean);
    }
    s[t] = std::sqrt(var / window);
  }
  return s;
}

}  // namespace

TEST_CASE("vertical aggregation") {
  SUBCASE("constant points aggregate to their value") {
    const auto agg = aggregate_vertical(constant_track(5, {100.0, 100.0}));
    for (double y : agg.y_hat) {
      CHECK(y == 100.0);
    }
  }
  SUBCASE("arithmetic mean of valid points") {
    const auto agg = aggregate_vertical(constant_track(1, {10.0, 20.0, 30.0}));
    CHECK(agg.y_hat[0] == doctest::Approx(20.0));
  }
  SUBCASE("all-invalid frame is interpolated and flagged") {
    VehicleTrack track = constant_track(3, {10.0});
    track.frames[0][0].y = 10.0;
    track.frames[1][0].valid = false;
    track.frames[2][0].y = 20.0;
    const auto agg = aggregate_vertical(track);
    CHECK(agg.y_hat[1] == doctest::Approx(15.0));
    CHECK(agg.interpolated[1] == 1);
    CHECK(agg.interpolated[0] == 0);
  }
  SUBCASE("leading gap extends the first valid value") {
    VehicleTrack track = constant_track(3, {42.0});
    track.frames[0][0].valid = false;
    const auto agg = aggregate_vertical(track);
    CHECK(agg.y_hat[0] == doctest::Approx(42.0));
    CHECK(agg.interpolated[0] == 1);
  }
  SUBCASE("empty track is rejected") {
    VehicleTrack track = constant_track(2, {1.0});
    track.frames[0][0].valid = false;
    track.frames[1][0].valid = false;
    CHECK_THROWS_AS(aggregate_vertical(track), EmptyTrack);
  }
  SUBCASE("point cap is enforced") {
    VehicleTrack track;
    track.frames.resize(1);
    track.frames[0].assign(401, {0.0, 0.0, true});
    CHECK_THROWS_AS(aggregate_vertical(track), ConfigError);
  }
}

TEST_CASE("pitch compensation") {
  const CameraIntrinsics intr(1000.0, 1000.0, 500.0, 500.0, 1000, 1000);

  SUBCASE("zero pitch leaves the trajectory untouched") {
    const std::vector<double> y{10.0, 11.0, 12.0};
    const std::vector<PitchEstimate> pitch(3);
    CHECK(compensate(y, pitch, intr) == y);
  }
  SUBCASE("subtracts fy * tan(phi_cum)") {
    const std::vector<double> y{105.0};
    std::vector<PitchEstimate> pitch(1);
    pitch[0].phi_cum = 0.01;
    const auto y_comp = compensate(y, pitch, intr);
    CHECK(y_comp[0] ==
          doctest::Approx(94.999666653332794).epsilon(1e-12));
  }
  SUBCASE("length mismatch is rejected") {
    const std::vector<double> y{1.0, 2.0};
    const std::vector<PitchEstimate> pitch(3);
    CHECK_THROWS_AS(compensate(y, pitch, intr), LengthMismatch);
  }
}

TEST_CASE("windowed standard deviation") {
  SUBCASE("constant series has zero response") {
    const std::vector<double> y(50, 7.5);
    const auto s = windowed_std(y, 30);
    for (std::size_t t = 29; t < s.size(); ++t) {
      CHECK(s[t] == 0.0);
    }
    for (std::size_t t = 0; t < 29; ++t) {
      CHECK(std::isnan(s[t]));
    }
  }
  SUBCASE("hand-evaluated three-frame window") {
    const std::vector<double> y{1.0, 2.0, 3.0};
    const auto s = windowed_std(y, 3);
    CHECK(std::isnan(s[0]));
    CHECK(std::isnan(s[1]));
    CHECK(s[2] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  }
  SUBCASE("homogeneous of degree one") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> y(80);
    for (auto& v : y) {
      v = u(rng);
    }
    std::vector<double> y2(y);
    for (auto& v : y2) {
      v *= 2.0;
    }
    const auto s = windowed_std(y, 10);
    const auto s2 = windowed_std(y2, 10);
    for (std::size_t t = 9; t < y.size(); ++t) {
      CHECK(s2[t] == doctest::Approx(2.0 * s[t]).epsilon(1e-12));
    }
  }
  SUBCASE("invariant under constant shifts") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> y(60);
    for (auto& v : y) {
      v = u(rng);
    }
    std::vector<double> shifted(y);
    for (auto& v : shifted) {
      v += 540.0;
    }
    const auto s = windowed_std(y, 15);
    const auto s_shifted = windowed_std(shifted, 15);
    for (std::size_t t = 14; t < y.size(); ++t) {
      CHECK(std::abs(s[t] - s_shifted[t]) < 1e-9);
    }
  }
  SUBCASE("matches an independent per-window recomputation") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(540.0, 4.0);
    std::vector<double> y(200);
    for (auto& v : y) {
      v = g(rng);
    }
    const auto s = windowed_std(y, 30);
    const auto ref = windowed_std_reference(y, 30);
    for (std::size_t t = 29; t < y.size(); ++t) {
      CHECK(std::abs(s[t] - ref[t]) < 1e-9);
    }
  }
  SUBCASE("series shorter than the window") {
    const std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(windowed_std(y, 3), SeriesTooShort);
    CHECK_THROWS_AS(windowed_std(y, 1), DomainError);
  }
}

TEST_CASE("detection with non-maximum suppression") {
  SUBCASE("single peak") {
    const std::vector<double> s{0.0, 0.0, 5.0, 0.0, 0.0};
    const auto events = detect(s, 1.0, 2);
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame == 2);
    CHECK(events[0].response == 5.0);
    CHECK(events[0].window_start == 0);
    CHECK(events[0].window_end == 4);
  }
  SUBCASE("radius suppresses the weaker neighbor") {
    const std::vector<double> s{0.0, 3.0, 0.0, 4.0, 0.0};
    const auto events = detect(s, 1.0, 2);
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame == 3);
  }
  SUBCASE("sub-threshold series yields nothing") {
    const std::vector<double> s(40, 0.1);
    CHECK(detect(s, 1.0, 5).empty());
  }
  SUBCASE("plateau tie goes to the earlier frame") {
    const std::vector<double> s{0.0, 3.0, 3.0, 0.0};
    const auto events = detect(s, 1.0, 1);
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame == 1);
  }
  SUBCASE("suppression is idempotent") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> s(300);
    for (auto& v : s) {
      v = u(rng);
    }
    const auto events = detect(s, 2.0, 12);
    std::vector<double> survivors(s.size(), 0.0);
    for (const auto& event : events) {
      survivors[event.frame] = event.response;
    }
    const auto again = detect(survivors, 2.0, 12);
    REQUIRE(again.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      CHECK(again[i].frame == events[i].frame);
      CHECK(again[i].response == events[i].response);
    }
  }
}

TEST_CASE("pipeline composition") {
  const TranslationDirection forward = TranslationDirection::forward();

  SUBCASE("flat road, still camera: no detections at any threshold") {
    SceneConfig scene;
    scene.seed = 77;
    scene.duration = 90;
    scene.n_static_points = 100;
    const auto seq = generate_sequence(scene, {}, VehicleConfig{},
                                       kIntrinsics, forward);
    PipelineConfig cfg;
    cfg.threshold = 1e-9;
    const auto result = run_pipeline(seq.track, seq.correspondences,
                                     kIntrinsics, forward, cfg);
    CHECK(result.detections.empty());
    for (std::size_t t = 29; t < result.response.s.size(); ++t) {
      CHECK(result.response.s[t] < 1e-12);
    }
  }

  SUBCASE("speed bump at 10 m produces exactly one detection at the apex") {
    SceneConfig scene;
    scene.seed = 78;
    scene.duration = 180;
    scene.n_static_points = 100;
    BumpProfile bump{BumpProfile::Kind::vehicle_displacement, 100, 11, 0.06};
    const auto seq = generate_sequence(scene, std::span(&bump, 1),
                                       VehicleConfig{}, kIntrinsics, forward);
    PipelineConfig cfg;
    cfg.threshold = 1.0;
    const auto result = run_pipeline(seq.track, seq.correspondences,
                                     kIntrinsics, forward, cfg);
    REQUIRE(result.detections.size() == 1);
    CHECK(std::abs(result.detections[0].frame - 100) <= 15);
  }

  SUBCASE("compensation removes an ego pitch pulse from the trajectory") {
    SceneConfig scene;
    scene.seed = 79;
    scene.duration = 150;
    scene.n_static_points = 200;
    BumpProfile pulse{BumpProfile::Kind::ego_pitch, 75, 20, 0.03};
    const auto seq = generate_sequence(scene, std::span(&pulse, 1),
                                       VehicleConfig{}, kIntrinsics, forward);
    PipelineConfig cfg;
    cfg.threshold = 0.5;
    const auto result = run_pipeline(seq.track, seq.correspondences,
                                     kIntrinsics, forward, cfg);

    double raw_deflection = 0.0;
    double comp_deflection = 0.0;
    for (std::size_t t = 0; t < result.response.y_hat.size(); ++t) {
      raw_deflection =
          std::max(raw_deflection,
                   std::abs(result.response.y_hat[t] - result.response.y_hat[0]));
      comp_deflection =
          std::max(comp_deflection, std::abs(result.response.y_comp[t] -
                                             result.response.y_comp[0]));
    }
    CHECK(raw_deflection > 20.0);  // fy * tan(0.03) is about 32 px
    CHECK(comp_deflection < 0.05);

    // The uncompensated response sees the pulse, the compensated one does
    // not: the ordering the compensation exists for.
    double max_raw = 0.0;
    double max_comp = 0.0;
    for (std::size_t t = 29; t < result.response.s.size(); ++t) {
      max_raw = std::max(max_raw, result.response.s_raw[t]);
      max_comp = std::max(max_comp, result.response.s[t]);
    }
    CHECK(max_raw > 10.0 * max_comp);
  }

  SUBCASE("disabled compensation reuses the raw trajectory") {
    SceneConfig scene;
    scene.seed = 80;
    scene.duration = 60;
    scene.n_static_points = 60;
    BumpProfile pulse{BumpProfile::Kind::ego_pitch, 30, 14, 0.02};
    const auto seq = generate_sequence(scene, std::span(&pulse, 1),
                                       VehicleConfig{}, kIntrinsics, forward);
    PipelineConfig cfg;
    cfg.compensation = false;
    const auto result = run_pipeline(seq.track, seq.correspondences,
                                     kIntrinsics, forward, cfg);
    CHECK(result.response.y_comp == result.response.y_hat);
    for (std::size_t t = 0; t < result.response.s.size(); ++t) {
      if (result.response.defined(t)) {
        CHECK(result.response.s[t] == result.response.s_raw[t]);
      } else {
        CHECK(std::isnan(result.response.s[t]));
      }
    }
    // Pitch is still estimated and reported.
    CHECK(std::abs(result.pitch[31].phi_cum) > 0.01);
  }

  SUBCASE("misaligned inputs are rejected") {
    SceneConfig scene;
    scene.seed = 81;
    scene.duration = 40;
    scene.n_static_points = 30;
    auto seq = generate_sequence(scene, {}, VehicleConfig{}, kIntrinsics,
                                 forward);
    seq.correspondences.pop_back();
    CHECK_THROWS_AS(run_pipeline(seq.track, seq.correspondences, kIntrinsics,
                                 forward, PipelineConfig{}),
                    LengthMismatch);
  }
}
