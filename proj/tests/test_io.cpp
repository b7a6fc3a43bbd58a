#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "roadwatch/io.hpp"

using namespace roadwatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "roadwatch_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("correspondence file round trip") {
  const fs::path path = temp_dir() / "corr.txt";
  std::vector<CorrespondenceSet> sets(2);
  sets[0].pairs.push_back(PointPair{{1.5, 2.25}, {3.125, 4.0625}, true});
  sets[0].pairs.push_back(PointPair{{10.0, 20.0}, {30.0, 40.0}, false});
  sets[1].pairs.push_back(PointPair{{0.0, 0.5}, {1.0, 1.5}, true});
  io::write_correspondences(path, sets);

  const auto loaded = io::read_correspondences(path);
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded[0].pairs.size() == 2);
  CHECK(loaded[0].pairs[0].p0.x() == 1.5);
  CHECK(loaded[0].pairs[0].p1.y() == 4.0625);
  CHECK(loaded[0].pairs[1].is_static == false);
  CHECK(loaded[1].pairs[0].p1.x() == 1.0);
}

TEST_CASE("vehicle track round trip keeps fps") {
  const fs::path path = temp_dir() / "track.txt";
  VehicleTrack track;
  track.fps = 25.0;
  track.frames.resize(2);
  track.frames[0].push_back({100.25, 200.5, true});
  track.frames[1].push_back({101.0, 201.0, false});
  io::write_vehicle_track(path, track);

  const auto loaded = io::read_vehicle_track(path);
  CHECK(loaded.fps == 25.0);
  REQUIRE(loaded.frames.size() == 2);
  CHECK(loaded.frames[0][0].x == 100.25);
  CHECK(loaded.frames[1][0].valid == false);
}

TEST_CASE("labels round trip") {
  const fs::path path = temp_dir() / "labels.txt";
  const std::vector<LabeledEvent> events{{"a", 120, true}, {"b", 45, false}};
  io::write_labels(path, events);
  const auto loaded = io::read_labels(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].sequence == "a");
  CHECK(loaded[0].anomaly);
  CHECK(loaded[1].apex_frame == 45);
  CHECK_FALSE(loaded[1].anomaly);
}

TEST_CASE("calibration round trip") {
  const fs::path path = temp_dir() / "calibration.txt";
  const CameraIntrinsics intr(1066.0, 1060.5, 960.0, 540.0, 1920, 1080);
  io::write_calibration(path, intr, TranslationDirection::forward());
  const auto calibration = io::read_calibration(path);
  CHECK(calibration.intrinsics.fx == 1066.0);
  CHECK(calibration.intrinsics.fy == 1060.5);
  CHECK(calibration.intrinsics.width == 1920);
  CHECK(calibration.t.vec().z() == 1.0);
}

TEST_CASE("ground truth round trip") {
  const fs::path path = temp_dir() / "truth.txt";
  GroundTruth truth;
  truth.pitch = {0.0, 0.001234567891};
  truth.imu_pitch = {0.0, 0.0015};
  truth.displacement = {0.0, 0.06};
  io::write_ground_truth(path, truth);
  const auto loaded = io::read_ground_truth(path);
  REQUIRE(loaded.pitch.size() == 2);
  CHECK(loaded.pitch[1] == doctest::Approx(0.001234567891).epsilon(1e-9));
  CHECK(loaded.displacement[1] == doctest::Approx(0.06));
}

TEST_CASE("responses and detections round trip") {
  const fs::path dir = temp_dir();
  PipelineResult result;
  result.response.window = 3;
  result.response.y_hat = {540.0, 541.0, 542.0};
  result.response.y_comp = {540.0, 540.5, 541.0};
  result.response.s = {std::nan(""), std::nan(""), 0.5};
  result.response.s_raw = {std::nan(""), std::nan(""), 0.75};
  result.pitch.resize(3);
  result.pitch[1].phi_rel = 0.001;
  result.pitch[1].phi_cum = 0.001;
  result.pitch[1].converged = true;
  result.pitch[2].phi_rel = 0.002;
  result.pitch[2].phi_cum = 0.003;
  result.pitch[2].held_last = true;
  result.aggregation_interpolated = {0, 1, 0};
  io::write_responses(dir / "responses.txt", result);

  const auto run = io::read_responses(dir / "responses.txt", 3);
  REQUIRE(run.series.y_hat.size() == 3);
  CHECK(run.series.y_hat[2] == 542.0);
  CHECK(std::isnan(run.series.s[0]));
  CHECK(run.series.s[2] == 0.5);
  CHECK(run.phi_cum[2] == doctest::Approx(0.003));
  CHECK(run.flags[1] == io::kFlagInterpolated);
  CHECK((run.flags[2] & io::kFlagHeldLast) != 0);

  const std::vector<DetectionEvent> detections{{2, 0.5, 0, 2}};
  io::write_detections(dir / "detections.txt", detections);
  const auto loaded = io::read_detections(dir / "detections.txt");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].frame == 2);
  CHECK(loaded[0].response == 0.5);
}

TEST_CASE("run metadata round trip") {
  const fs::path path = temp_dir() / "runmeta.txt";
  io::RunMeta meta;
  meta.window = 20;
  meta.fps = 30.0;
  meta.threshold = 0.75;
  meta.nms_radius = 25;
  meta.compensation = false;
  io::write_run_meta(path, meta);
  const auto loaded = io::read_run_meta(path);
  CHECK(loaded.window == 20);
  CHECK(loaded.threshold == 0.75);
  CHECK(loaded.nms_radius == 25);
  CHECK_FALSE(loaded.compensation);
}

TEST_CASE("distance response round trip") {
  const fs::path path = temp_dir() / "distance.txt";
  const std::vector<std::pair<double, double>> samples{{5.0, 10.5},
                                                       {10.0, 5.25}};
  io::write_distance_response(path, samples);
  const auto loaded = io::read_distance_response(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == 5.0);
  CHECK(loaded[1].second == 5.25);
}

TEST_CASE("parse failures carry the path") {
  const fs::path dir = temp_dir();
  {
    std::ofstream out(dir / "bad_version.txt");
    out << "# something-else-v1\nframe point_id x y valid\n";
  }
  CHECK_THROWS_AS(io::read_vehicle_track(dir / "bad_version.txt"), ParseError);
  {
    std::ofstream out(dir / "bad_row.txt");
    out << "# roadwatch-labels-v1\nsequence apex_frame label\nseq notanint "
           "anomaly\n";
  }
  CHECK_THROWS_AS(io::read_labels(dir / "bad_row.txt"), ParseError);
  {
    std::ofstream out(dir / "bad_label.txt");
    out << "# roadwatch-labels-v1\nsequence apex_frame label\nseq 5 maybe\n";
  }
  CHECK_THROWS_AS(io::read_labels(dir / "bad_label.txt"), ParseError);
  CHECK_THROWS_AS(io::read_labels(dir / "does_not_exist.txt"), IoError);
}
