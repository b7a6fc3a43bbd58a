// roadwatch command line: synthesize datasets, run the detection pipeline,
// evaluate labeled runs and fit the response-distance model.
//
// Exit codes: 0 success, 2 configuration/parse error, 3 I/O error,
// 4 aligned-input mismatch, 5 label/class error, 6 degenerate fit,
// 1 anything else. stdout carries data only; messages go to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "roadwatch/eval.hpp"
#include "roadwatch/io.hpp"
#include "roadwatch/signal.hpp"
#include "roadwatch/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roadwatch;

namespace {

struct SynthSequenceSpec {
  std::string id;
  std::uint64_t seed = 0;
  SceneConfig scene;
  VehicleConfig vehicle;
  std::vector<BumpProfile> bumps;
  int background_events = 0;
};

struct SynthJob {
  CameraIntrinsics camera{1066.0, 1066.0, 960.0, 540.0, 1920, 1080};
  TranslationDirection translation = TranslationDirection::forward();
  std::vector<SynthSequenceSpec> sequences;
};

void apply_scene_overrides(SceneConfig& scene, const json& node) {
  scene.n_static_points = node.value("n_static_points", scene.n_static_points);
  scene.depth_min = node.value("depth_min", scene.depth_min);
  scene.depth_max = node.value("depth_max", scene.depth_max);
  scene.ego_speed = node.value("ego_speed", scene.ego_speed);
  scene.fps = node.value("fps", scene.fps);
  scene.noise_sigma = node.value("noise_sigma", scene.noise_sigma);
  scene.outlier_fraction =
      node.value("outlier_fraction", scene.outlier_fraction);
  scene.duration = node.value("duration", scene.duration);
  scene.outliers_flagged_static =
      node.value("outliers_flagged_static", scene.outliers_flagged_static);
  scene.imu_rate_noise_sigma =
      node.value("imu_rate_noise_sigma", scene.imu_rate_noise_sigma);
  scene.imu_bias_walk_sigma =
      node.value("imu_bias_walk_sigma", scene.imu_bias_walk_sigma);
}

void apply_vehicle_overrides(VehicleConfig& vehicle, const json& node) {
  vehicle.distance = node.value("distance", vehicle.distance);
  vehicle.rear_width = node.value("rear_width", vehicle.rear_width);
  vehicle.rear_height = node.value("rear_height", vehicle.rear_height);
  vehicle.n_points = node.value("n_points", vehicle.n_points);
  vehicle.center_height = node.value("center_height", vehicle.center_height);
  if (node.contains("distance_series")) {
    vehicle.distance_series =
        node.at("distance_series").get<std::vector<double>>();
  }
}

SynthJob parse_synth_config(const fs::path& path,
                            std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read '" + path.string() + "'");
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }

  try {
    SceneConfig scene_defaults;
    std::uint64_t base_seed = root.value("seed", std::uint64_t{1});
    if (seed_override) {
      base_seed = *seed_override;
    }
    if (root.contains("scene")) {
      apply_scene_overrides(scene_defaults, root.at("scene"));
    }
    VehicleConfig vehicle_defaults;
    if (root.contains("vehicle")) {
      apply_vehicle_overrides(vehicle_defaults, root.at("vehicle"));
    }

    SynthJob job;
    if (root.contains("camera")) {
      const json& camera = root.at("camera");
      job.camera = CameraIntrinsics(
          camera.value("fx", 1066.0), camera.value("fy", 1066.0),
          camera.value("cx", 960.0), camera.value("cy", 540.0),
          camera.value("width", 1920), camera.value("height", 1080));
    }
    if (root.contains("translation")) {
      const auto t = root.at("translation").get<std::vector<double>>();
      if (t.size() != 3) {
        throw ParseError("translation must have three components");
      }
      job.translation = TranslationDirection(Vector3(t[0], t[1], t[2]));
    }

    if (!root.contains("sequences") || root.at("sequences").empty()) {
      throw ParseError("config declares no sequences");
    }
    std::uint64_t index = 0;
    for (const json& node : root.at("sequences")) {
      SynthSequenceSpec spec;
      spec.id = node.value("id", "seq" + std::to_string(index));
      spec.scene = scene_defaults;
      spec.vehicle = vehicle_defaults;
      if (node.contains("scene")) {
        apply_scene_overrides(spec.scene, node.at("scene"));
      }
      if (node.contains("vehicle")) {
        apply_vehicle_overrides(spec.vehicle, node.at("vehicle"));
      }
      spec.scene.seed = node.value("seed", base_seed + index);
      spec.seed = spec.scene.seed;
      spec.background_events = node.value("background_events", 0);

      if (node.contains("bumps")) {
        for (const json& bump_node : node.at("bumps")) {
          BumpProfile bump;
          const std::string kind = bump_node.value("kind", "");
          if (kind == "ego_pitch") {
            bump.kind = BumpProfile::Kind::ego_pitch;
          } else if (kind == "vehicle_displacement") {
            bump.kind = BumpProfile::Kind::vehicle_displacement;
          } else {
            throw ParseError("unknown bump kind '" + kind + "'");
          }
          bump.apex_frame = bump_node.value("apex_frame", 0);
          bump.amplitude = bump_node.value("amplitude", 0.0);
          // Default duration: a 2 m long obstacle crossed at ego speed.
          const int derived = std::max(
              2, static_cast<int>(std::lround(2.0 / spec.scene.ego_speed *
                                              spec.scene.fps)));
          bump.duration = bump_node.value("duration", derived);
          spec.bumps.push_back(bump);
        }
      }
      job.sequences.push_back(std::move(spec));
      ++index;
    }
    return job;
  } catch (const json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

int cmd_synth(const fs::path& config_path, const fs::path& output,
              std::optional<std::uint64_t> seed_override) {
  const SynthJob job = parse_synth_config(config_path, seed_override);
  fs::create_directories(output);
  io::write_calibration(output / "calibration.txt", job.camera,
                        job.translation);

  std::vector<LabeledEvent> labels;
  for (const SynthSequenceSpec& spec : job.sequences) {
    const SyntheticSequence seq = generate_sequence(
        spec.scene, spec.bumps, spec.vehicle, job.camera, job.translation);
    const fs::path seq_dir = output / spec.id;
    fs::create_directories(seq_dir);
    io::write_correspondences(seq_dir / "correspondences.txt",
                              seq.correspondences);
    io::write_vehicle_track(seq_dir / "vehicle_track.txt", seq.track);
    io::write_ground_truth(seq_dir / "ground_truth.txt", seq.truth);

    for (int apex : seq.truth.apex_frames) {
      labels.push_back(LabeledEvent{spec.id, apex, true});
    }
    if (spec.background_events > 0) {
      // Background apexes sampled away from anomalies and warm-up.
      std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
      const int lo = 60;
      const int hi = spec.scene.duration - 31;
      if (hi <= lo) {
        throw ConfigError("sequence '" + spec.id +
                          "' too short for background events");
      }
      std::uniform_int_distribution<int> frame_dist(lo, hi);
      int placed = 0;
      int attempts = 0;
      while (placed < spec.background_events && attempts < 10000) {
        ++attempts;
        const int frame = frame_dist(rng);
        bool clear = true;
        for (int apex : seq.truth.apex_frames) {
          if (std::abs(frame - apex) < 60) {
            clear = false;
            break;
          }
        }
        if (clear) {
          labels.push_back(LabeledEvent{spec.id, frame, false});
          ++placed;
        }
      }
      if (placed < spec.background_events) {
        throw ConfigError("sequence '" + spec.id +
                          "' has no room for background events");
      }
    }
  }
  std::stable_sort(labels.begin(), labels.end(),
                   [](const LabeledEvent& a, const LabeledEvent& b) {
                     if (a.sequence != b.sequence) {
                       return a.sequence < b.sequence;
                     }
                     return a.apex_frame < b.apex_frame;
                   });
  io::write_labels(output / "labels.txt", labels);
  std::cerr << "wrote " << job.sequences.size() << " sequences to " << output
            << "\n";
  return 0;
}

std::vector<fs::path> sequence_dirs(const fs::path& dataset) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(dataset)) {
    throw IoError("dataset directory '" + dataset.string() + "' not found");
  }
  for (const auto& entry : fs::directory_iterator(dataset)) {
    if (entry.is_directory() &&
        fs::exists(entry.path() / "correspondences.txt")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

struct DetectOptions {
  fs::path dataset;
  fs::path output;
  fs::path calibration;  // empty: dataset/calibration.txt
  PipelineConfig pipeline;
};

int cmd_detect(const DetectOptions& options) {
  const fs::path calibration_path = options.calibration.empty()
                                        ? options.dataset / "calibration.txt"
                                        : options.calibration;
  if (!fs::exists(calibration_path)) {
    throw IoError("calibration file '" + calibration_path.string() +
                  "' not found");
  }
  const io::Calibration calibration = io::read_calibration(calibration_path);

  const auto dirs = sequence_dirs(options.dataset);
  if (dirs.empty()) {
    throw IoError("no sequences found under '" + options.dataset.string() +
                  "'");
  }
  fs::create_directories(options.output);

  double fps = 30.0;
  for (const fs::path& dir : dirs) {
    const auto sets = io::read_correspondences(dir / "correspondences.txt");
    const auto track = io::read_vehicle_track(dir / "vehicle_track.txt");
    fps = track.fps;
    if (sets.size() + 1 != track.frames.size()) {
      throw LengthMismatch("sequence '" + dir.filename().string() + "': " +
                           std::to_string(sets.size()) +
                           " correspondence sets for " +
                           std::to_string(track.frames.size()) + " frames");
    }
    const PipelineResult result = run_pipeline(
        track, sets, calibration.intrinsics, calibration.t, options.pipeline);
    const fs::path out_dir = options.output / dir.filename();
    fs::create_directories(out_dir);
    io::write_responses(out_dir / "responses.txt", result);
    io::write_detections(out_dir / "detections.txt", result.detections);
    std::cerr << dir.filename().string() << ": " << result.detections.size()
              << " detection(s)\n";
  }

  io::RunMeta meta;
  meta.window = options.pipeline.window;
  meta.fps = fps;
  meta.threshold = options.pipeline.threshold;
  meta.nms_radius = options.pipeline.nms_radius > 0
                        ? options.pipeline.nms_radius
                        : options.pipeline.window;
  meta.compensation = options.pipeline.compensation;
  io::write_run_meta(options.output / "runmeta.txt", meta);
  return 0;
}

struct EvalOptions {
  fs::path labels;
  std::vector<fs::path> runs;
  fs::path output;
  int folds = 5;
  std::uint64_t seed = 17;
};

int cmd_eval(const EvalOptions& options) {
  const auto labels = io::read_labels(options.labels);
  fs::create_directories(options.output);

  for (const fs::path& run_dir : options.runs) {
    const io::RunMeta meta = io::read_run_meta(run_dir / "runmeta.txt");

    std::vector<std::string> sequence_ids;
    for (const auto& entry : fs::directory_iterator(run_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "responses.txt")) {
        sequence_ids.push_back(entry.path().filename().string());
      }
    }
    std::sort(sequence_ids.begin(), sequence_ids.end());
    std::vector<io::ResponseRun> runs;
    runs.reserve(sequence_ids.size());
    for (const std::string& id : sequence_ids) {
      runs.push_back(
          io::read_responses(run_dir / id / "responses.txt", meta.window));
    }

    std::map<std::string, const ResponseSeries*> responses;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      responses[sequence_ids[i]] = &runs[i].series;
    }
    for (const LabeledEvent& event : labels) {
      if (responses.find(event.sequence) == responses.end()) {
        throw MissingSequence("label references unknown sequence '" +
                              event.sequence + "'");
      }
    }

    const auto scored = score_events(labels, responses);
    const MetricsReport report =
        cv_threshold_metrics(scored, options.folds, options.seed);

    // FPR vs rotation intensity over anomaly-free sequences, at the mean
    // cross-validated threshold.
    double threshold = 0.0;
    for (double t : report.fold_thresholds) {
      threshold += t;
    }
    threshold /= report.fold_thresholds.size();
    const int intensity_window =
        std::max(1, static_cast<int>(std::lround(meta.fps)));
    std::vector<IntensitySeries> negatives;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const bool has_anomaly = std::any_of(
          labels.begin(), labels.end(), [&](const LabeledEvent& e) {
            return e.anomaly && e.sequence == sequence_ids[i];
          });
      if (has_anomaly) {
        continue;
      }
      IntensitySeries series;
      series.s = runs[i].series.s;
      series.intensity = rotation_intensity(runs[i].phi_cum, intensity_window);
      negatives.push_back(std::move(series));
    }
    const std::vector<double> edges{0.0,    1e-3,   2e-3, 4e-3,
                                    8e-3,   1.6e-2, 3.2e-2, 1.0};
    std::vector<RotationIntensityBin> bins;
    if (!negatives.empty()) {
      bins = fpr_vs_rotation_intensity(negatives, threshold, edges);
    }

    const std::string run_name = run_dir.filename().string();
    const fs::path out_dir = options.output / run_name;
    fs::create_directories(out_dir);
    int positives = 0;
    for (const auto& e : scored) {
      positives += e.positive ? 1 : 0;
    }
    io::write_metrics(out_dir / "metrics.txt", run_name, report, positives,
                      static_cast<int>(scored.size()) - positives);
    io::write_roc(out_dir / "roc.txt", report.roc);
    io::write_fpr_intensity(out_dir / "fpr_intensity.txt", bins);

    char line[256];
    std::snprintf(line, sizeof(line),
                  "%s auc %.9g balanced_accuracy %.9g +- %.9g f_score %.9g "
                  "+- %.9g\n",
                  run_name.c_str(), report.roc.auc,
                  report.balanced_accuracy_mean, report.balanced_accuracy_std,
                  report.f_score_mean, report.f_score_std);
    std::cout << line;
  }
  return 0;
}

int cmd_fit_model(const fs::path& input, double focal, double delta,
                  const fs::path& output) {
  const auto samples = io::read_distance_response(input);
  const SignalModelFit fit = fit_signal_model(samples, focal, delta);
  char line[160];
  std::snprintf(line, sizeof(line), "alpha %.9g beta %.9g residual_rms %.9g\n",
                fit.alpha, fit.beta, fit.residual_rms);
  std::cout << line;
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) {
      throw IoError("cannot write '" + output.string() + "'");
    }
    out << "# roadwatch-model-fit-v1\n";
    out << line;
  }
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{
      "road surface anomaly detection from preceding-vehicle tracking"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic dataset from a JSON config");
  std::string synth_config;
  std::string synth_output;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", synth_config, "JSON scene configuration")
      ->required();
  synth->add_option("--output", synth_output, "dataset directory")->required();
  synth->add_option("--seed", synth_seed, "override the config seed");

  auto* detect_cmd = app.add_subcommand(
      "detect", "run the detection pipeline over a dataset");
  DetectOptions detect_options;
  std::string detect_dataset;
  std::string detect_output;
  std::string detect_calibration;
  bool no_compensation = false;
  detect_cmd->add_option("--dataset", detect_dataset, "dataset directory")
      ->required();
  detect_cmd->add_option("--output", detect_output, "run output directory")
      ->required();
  detect_cmd->add_option(
      "--calibration", detect_calibration,
      "calibration file (default: dataset/calibration.txt)");
  detect_cmd->add_option("--threshold", detect_options.pipeline.threshold,
                         "detection threshold in pixels");
  detect_cmd->add_option("--window", detect_options.pipeline.window,
                         "response window in frames");
  detect_cmd->add_option("--nms-radius", detect_options.pipeline.nms_radius,
                         "suppression radius in frames (default: window)");
  detect_cmd->add_flag("--no-compensation", no_compensation,
                       "skip the pitch compensation");
  detect_cmd->add_option("--max-iterations",
                         detect_options.pipeline.estimator.max_iterations,
                         "estimator iteration cap");
  detect_cmd->add_option("--phi-clamp",
                         detect_options.pipeline.estimator.phi_clamp,
                         "pitch search bound in radians");
  detect_cmd->add_option("--min-pairs",
                         detect_options.pipeline.estimator.min_pairs,
                         "minimum usable correspondences per frame");
  detect_cmd->add_option("--loss-scale",
                         detect_options.pipeline.estimator.loss_scale,
                         "robust loss scale");
  detect_cmd->add_option("--decay",
                         detect_options.pipeline.estimator.integration_decay,
                         "leaky integration decay for cumulative pitch");

  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate labeled events against runs");
  EvalOptions eval_options;
  std::string eval_labels;
  std::vector<std::string> eval_runs;
  std::string eval_output;
  eval_cmd->add_option("--labels", eval_labels, "labels file")->required();
  eval_cmd->add_option("--run", eval_runs, "run directory (repeatable)")
      ->required();
  eval_cmd->add_option("--output", eval_output, "report output directory")
      ->required();
  eval_cmd->add_option("--folds", eval_options.folds,
                       "cross-validation folds");
  eval_cmd->add_option("--seed", eval_options.seed, "fold assignment seed");

  auto* fit_cmd = app.add_subcommand(
      "fit-model", "fit the response-distance model to a table");
  std::string fit_input;
  std::string fit_output;
  double fit_focal = 1066.0;
  double fit_delta = 0.06;
  fit_cmd->add_option("--input", fit_input, "distance/response table")
      ->required();
  fit_cmd->add_option("--focal", fit_focal, "focal length in pixels")
      ->required();
  fit_cmd->add_option("--delta", fit_delta, "displacement in meters")
      ->required();
  fit_cmd->add_option("--output", fit_output, "also write the fit to a file");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return cmd_synth(synth_config, synth_output, synth_seed);
  }
  if (detect_cmd->parsed()) {
    detect_options.dataset = detect_dataset;
    detect_options.output = detect_output;
    detect_options.calibration = detect_calibration;
    detect_options.pipeline.compensation = !no_compensation;
    return cmd_detect(detect_options);
  }
  if (eval_cmd->parsed()) {
    eval_options.labels = eval_labels;
    eval_options.output = eval_output;
    for (const std::string& run : eval_runs) {
      eval_options.runs.emplace_back(run);
    }
    return cmd_eval(eval_options);
  }
  if (fit_cmd->parsed()) {
    return cmd_fit_model(fit_input, fit_focal, fit_delta, fit_output);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const LengthMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const MissingSequence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const SingleClassError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const TooFewEvents& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const UndefinedResponse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const DegenerateFit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
