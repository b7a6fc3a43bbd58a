#include "roadwatch/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace roadwatch::io {

namespace {

std::string fmt_px(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", v);
  return buffer;
}

std::string fmt_rad(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", v);
  return buffer;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  return out;
}

// Returns the version line (without "# ") and the data lines.
std::vector<std::string> read_lines(const fs::path& path,
                                    const std::string& expected_version,
                                    std::string* version_line = nullptr) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read '" + path.string() + "'");
  }
  std::vector<std::string> lines;
  std::string line;
  bool version_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line[0] == '#') {
      if (!version_seen) {
        if (line.find(expected_version) == std::string::npos) {
          throw ParseError("'" + path.string() + "': expected format " +
                           expected_version);
        }
        version_seen = true;
        if (version_line != nullptr) {
          *version_line = line;
        }
      }
      continue;
    }
    lines.push_back(line);
  }
  if (!version_seen) {
    throw ParseError("'" + path.string() + "': missing format comment " +
                     expected_version);
  }
  if (lines.empty()) {
    throw ParseError("'" + path.string() + "': no header line");
  }
  return lines;
}

void expect_header(const fs::path& path, const std::string& header,
                   const std::string& expected) {
  if (header != expected) {
    throw ParseError("'" + path.string() + "': unexpected header '" + header +
                     "'");
  }
}

// Stream extraction of doubles rejects "nan"; tokenize and convert with
// the C library instead.
class RowParser {
 public:
  RowParser(const fs::path& path, const std::string& line)
      : path_(path), line_(line), stream_(line) {}

  void extract(double& value) {
    const std::string token = next_token();
    char* end = nullptr;
    value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      fail();
    }
  }
  void extract(int& value) {
    long v = 0;
    extract(v);
    value = static_cast<int>(v);
  }
  void extract(long& value) {
    const std::string token = next_token();
    char* end = nullptr;
    value = std::strtol(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0') {
      fail();
    }
  }
  void extract(std::string& value) { value = next_token(); }

 private:
  std::string next_token() {
    std::string token;
    if (!(stream_ >> token)) {
      fail();
    }
    return token;
  }
  [[noreturn]] void fail() const {
    throw ParseError("'" + path_.string() + "': malformed row '" + line_ +
                     "'");
  }

  const fs::path& path_;
  const std::string& line_;
  std::istringstream stream_;
};

template <typename... Fields>
void parse_row(const fs::path& path, const std::string& line,
               Fields&... fields) {
  RowParser parser(path, line);
  (parser.extract(fields), ...);
}

}  // namespace

void write_correspondences(const fs::path& path,
                           std::span<const CorrespondenceSet> sets) {
  auto out = open_out(path);
  out << "# roadwatch-correspondences-v1\n";
  out << "frame point_id x0 y0 x1 y1 is_static\n";
  for (std::size_t frame = 0; frame < sets.size(); ++frame) {
    const auto& pairs = sets[frame].pairs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const PointPair& p = pairs[i];
      out << frame << ' ' << i << ' ' << fmt_px(p.p0.x()) << ' '
          << fmt_px(p.p0.y()) << ' ' << fmt_px(p.p1.x()) << ' '
          << fmt_px(p.p1.y()) << ' ' << (p.is_static ? 1 : 0) << '\n';
    }
  }
}

std::vector<CorrespondenceSet> read_correspondences(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-correspondences-v1");
  expect_header(path, lines[0], "frame point_id x0 y0 x1 y1 is_static");
  std::vector<CorrespondenceSet> sets;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    long frame = 0;
    long point_id = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    int is_static = 0;
    parse_row(path, lines[i], frame, point_id, x0, y0, x1, y1, is_static);
    if (frame < 0) {
      throw ParseError("'" + path.string() + "': negative frame index");
    }
    if (sets.size() <= static_cast<std::size_t>(frame)) {
      sets.resize(frame + 1);
    }
    sets[frame].pairs.push_back(
        PointPair{{x0, y0}, {x1, y1}, is_static != 0});
  }
  return sets;
}

void write_vehicle_track(const fs::path& path, const VehicleTrack& track) {
  auto out = open_out(path);
  out << "# roadwatch-vehicle-track-v1 fps=" << fmt_rad(track.fps) << "\n";
  out << "frame point_id x y valid\n";
  for (std::size_t frame = 0; frame < track.frames.size(); ++frame) {
    const auto& points = track.frames[frame];
    for (std::size_t i = 0; i < points.size(); ++i) {
      out << frame << ' ' << i << ' ' << fmt_px(points[i].x) << ' '
          << fmt_px(points[i].y) << ' ' << (points[i].valid ? 1 : 0) << '\n';
    }
  }
}

VehicleTrack read_vehicle_track(const fs::path& path) {
  std::string version;
  const auto lines = read_lines(path, "roadwatch-vehicle-track-v1", &version);
  expect_header(path, lines[0], "frame point_id x y valid");
  VehicleTrack track;
  const auto fps_pos = version.find("fps=");
  if (fps_pos != std::string::npos) {
    track.fps = std::stod(version.substr(fps_pos + 4));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    long frame = 0;
    long point_id = 0;
    double x = 0.0;
    double y = 0.0;
    int valid = 0;
    parse_row(path, lines[i], frame, point_id, x, y, valid);
    if (frame < 0) {
      throw ParseError("'" + path.string() + "': negative frame index");
    }
    if (track.frames.size() <= static_cast<std::size_t>(frame)) {
      track.frames.resize(frame + 1);
    }
    track.frames[frame].push_back({x, y, valid != 0});
  }
  return track;
}

void write_labels(const fs::path& path, std::span<const LabeledEvent> events) {
  auto out = open_out(path);
  out << "# roadwatch-labels-v1\n";
  out << "sequence apex_frame label\n";
  for (const LabeledEvent& e : events) {
    out << e.sequence << ' ' << e.apex_frame << ' '
        << (e.anomaly ? "anomaly" : "background") << '\n';
  }
}

std::vector<LabeledEvent> read_labels(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-labels-v1");
  expect_header(path, lines[0], "sequence apex_frame label");
  std::vector<LabeledEvent> events;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    LabeledEvent e;
    std::string label;
    parse_row(path, lines[i], e.sequence, e.apex_frame, label);
    if (label == "anomaly") {
      e.anomaly = true;
    } else if (label == "background") {
      e.anomaly = false;
    } else {
      throw ParseError("'" + path.string() + "': unknown label '" + label +
                       "'");
    }
    events.push_back(std::move(e));
  }
  return events;
}

void write_calibration(const fs::path& path, const CameraIntrinsics& intr,
                       const TranslationDirection& t) {
  auto out = open_out(path);
  out << "# roadwatch-calibration-v1\n";
  out << "fx " << fmt_rad(intr.fx) << "\n";
  out << "fy " << fmt_rad(intr.fy) << "\n";
  out << "cx " << fmt_rad(intr.cx) << "\n";
  out << "cy " << fmt_rad(intr.cy) << "\n";
  out << "width " << intr.width << "\n";
  out << "height " << intr.height << "\n";
  out << "t_x " << fmt_rad(t.vec().x()) << "\n";
  out << "t_y " << fmt_rad(t.vec().y()) << "\n";
  out << "t_z " << fmt_rad(t.vec().z()) << "\n";
}

Calibration read_calibration(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-calibration-v1");
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Vector3 t(0.0, 0.0, 1.0);
  for (const std::string& line : lines) {
    std::istringstream stream(line);
    std::string key;
    stream >> key;
    if (key == "fx") {
      stream >> fx;
    } else if (key == "fy") {
      stream >> fy;
    } else if (key == "cx") {
      stream >> cx;
    } else if (key == "cy") {
      stream >> cy;
    } else if (key == "width") {
      stream >> width;
    } else if (key == "height") {
      stream >> height;
    } else if (key == "t_x") {
      stream >> t.x();
    } else if (key == "t_y") {
      stream >> t.y();
    } else if (key == "t_z") {
      stream >> t.z();
    } else {
      throw ParseError("'" + path.string() + "': unknown calibration key '" +
                       key + "'");
    }
    if (stream.fail()) {
      throw ParseError("'" + path.string() + "': malformed line '" + line +
                       "'");
    }
  }
  try {
    return Calibration{CameraIntrinsics(fx, fy, cx, cy, width, height),
                       TranslationDirection(t)};
  } catch (const Error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void write_ground_truth(const fs::path& path, const GroundTruth& truth) {
  auto out = open_out(path);
  out << "# roadwatch-ground-truth-v1\n";
  out << "frame pitch imu_pitch displacement\n";
  for (std::size_t k = 0; k < truth.pitch.size(); ++k) {
    out << k << ' ' << fmt_rad(truth.pitch[k]) << ' '
        << fmt_rad(truth.imu_pitch[k]) << ' ' << fmt_rad(truth.displacement[k])
        << '\n';
  }
}

GroundTruth read_ground_truth(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-ground-truth-v1");
  expect_header(path, lines[0], "frame pitch imu_pitch displacement");
  GroundTruth truth;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    long frame = 0;
    double pitch = 0.0;
    double imu = 0.0;
    double displacement = 0.0;
    parse_row(path, lines[i], frame, pitch, imu, displacement);
    truth.pitch.push_back(pitch);
    truth.imu_pitch.push_back(imu);
    truth.displacement.push_back(displacement);
  }
  return truth;
}

void write_responses(const fs::path& path, const PipelineResult& result) {
  auto out = open_out(path);
  out << "# roadwatch-responses-v1\n";
  out << "frame y_hat y_comp phi_rel phi_cum s s_raw flags\n";
  const ResponseSeries& series = result.response;
  for (std::size_t k = 0; k < series.y_hat.size(); ++k) {
    int flags = 0;
    if (k < result.aggregation_interpolated.size() &&
        result.aggregation_interpolated[k]) {
      flags |= kFlagInterpolated;
    }
    if (k > 0) {  // frame 0 carries no estimate
      if (result.pitch[k].held_last) {
        flags |= kFlagHeldLast;
      } else if (!result.pitch[k].converged) {
        flags |= kFlagNotConverged;
      }
    }
    out << k << ' ' << fmt_px(series.y_hat[k]) << ' '
        << fmt_px(series.y_comp[k]) << ' ' << fmt_rad(result.pitch[k].phi_rel)
        << ' ' << fmt_rad(result.pitch[k].phi_cum) << ' '
        << fmt_px(series.s[k]) << ' ' << fmt_px(series.s_raw[k]) << ' '
        << flags << '\n';
  }
}

ResponseRun read_responses(const fs::path& path, int window) {
  const auto lines = read_lines(path, "roadwatch-responses-v1");
  expect_header(path, lines[0],
                "frame y_hat y_comp phi_rel phi_cum s s_raw flags");
  ResponseRun run;
  run.series.window = window;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    long frame = 0;
    double y_hat = 0.0;
    double y_comp = 0.0;
    double phi_rel = 0.0;
    double phi_cum = 0.0;
    double s = 0.0;
    double s_raw = 0.0;
    int flags = 0;
    parse_row(path, lines[i], frame, y_hat, y_comp, phi_rel, phi_cum, s, s_raw,
              flags);
    run.series.y_hat.push_back(y_hat);
    run.series.y_comp.push_back(y_comp);
    run.series.s.push_back(s);
    run.series.s_raw.push_back(s_raw);
    run.phi_rel.push_back(phi_rel);
    run.phi_cum.push_back(phi_cum);
    run.flags.push_back(flags);
  }
  return run;
}

void write_detections(const fs::path& path,
                      std::span<const DetectionEvent> detections) {
  auto out = open_out(path);
  out << "# roadwatch-detections-v1\n";
  out << "frame response window_start window_end\n";
  for (const DetectionEvent& d : detections) {
    out << d.frame << ' ' << fmt_px(d.response) << ' ' << d.window_start << ' '
        << d.window_end << '\n';
  }
}

std::vector<DetectionEvent> read_detections(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-detections-v1");
  expect_header(path, lines[0], "frame response window_start window_end");
  std::vector<DetectionEvent> detections;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    DetectionEvent d;
    parse_row(path, lines[i], d.frame, d.response, d.window_start,
              d.window_end);
    detections.push_back(d);
  }
  return detections;
}

void write_run_meta(const fs::path& path, const RunMeta& meta) {
  auto out = open_out(path);
  out << "# roadwatch-runmeta-v1\n";
  out << "window " << meta.window << "\n";
  out << "fps " << fmt_rad(meta.fps) << "\n";
  out << "threshold " << fmt_rad(meta.threshold) << "\n";
  out << "nms_radius " << meta.nms_radius << "\n";
  out << "compensation " << (meta.compensation ? "on" : "off") << "\n";
}

RunMeta read_run_meta(const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-runmeta-v1");
  RunMeta meta;
  for (const std::string& line : lines) {
    std::istringstream stream(line);
    std::string key;
    stream >> key;
    if (key == "window") {
      stream >> meta.window;
    } else if (key == "fps") {
      stream >> meta.fps;
    } else if (key == "threshold") {
      stream >> meta.threshold;
    } else if (key == "nms_radius") {
      stream >> meta.nms_radius;
    } else if (key == "compensation") {
      std::string value;
      stream >> value;
      meta.compensation = value == "on";
    } else {
      throw ParseError("'" + path.string() + "': unknown runmeta key '" + key +
                       "'");
    }
    if (stream.fail()) {
      throw ParseError("'" + path.string() + "': malformed line '" + line +
                       "'");
    }
  }
  return meta;
}

void write_metrics(const fs::path& path, const std::string& run_name,
                   const MetricsReport& report, int positives, int negatives) {
  auto out = open_out(path);
  out << "# roadwatch-metrics-v1\n";
  out << "run " << run_name << "\n";
  out << "positives " << positives << "\n";
  out << "negatives " << negatives << "\n";
  out << "auc " << fmt_rad(report.roc.auc) << "\n";
  out << "balanced_accuracy_mean " << fmt_rad(report.balanced_accuracy_mean)
      << "\n";
  out << "balanced_accuracy_std " << fmt_rad(report.balanced_accuracy_std)
      << "\n";
  out << "f_score_mean " << fmt_rad(report.f_score_mean) << "\n";
  out << "f_score_std " << fmt_rad(report.f_score_std) << "\n";
  out << "folds " << report.folds << "\n";
  out << "seed " << report.seed << "\n";
  out << "stratified " << (report.stratified ? "true" : "false") << "\n";
  out << "fold_thresholds";
  for (double t : report.fold_thresholds) {
    out << ' ' << fmt_rad(t);
  }
  out << "\n";
}

void write_roc(const fs::path& path, const RocCurve& curve) {
  auto out = open_out(path);
  out << "# roadwatch-roc-v1\n";
  out << "threshold fpr tpr\n";
  for (const RocPoint& p : curve.points) {
    out << fmt_rad(p.threshold) << ' ' << fmt_rad(p.fpr) << ' '
        << fmt_rad(p.tpr) << '\n';
  }
}

void write_fpr_intensity(const fs::path& path,
                         std::span<const RotationIntensityBin> bins) {
  auto out = open_out(path);
  out << "# roadwatch-fpr-intensity-v1\n";
  out << "bin_lo bin_hi count fpr\n";
  for (const RotationIntensityBin& b : bins) {
    out << fmt_rad(b.lo) << ' ' << fmt_rad(b.hi) << ' ' << b.count << ' '
        << fmt_rad(b.fpr) << '\n';
  }
}

void write_distance_response(
    const fs::path& path, std::span<const std::pair<double, double>> samples) {
  auto out = open_out(path);
  out << "# roadwatch-distance-response-v1\n";
  out << "distance response\n";
  for (const auto& [d, s] : samples) {
    out << fmt_rad(d) << ' ' << fmt_px(s) << '\n';
  }
}

std::vector<std::pair<double, double>> read_distance_response(
    const fs::path& path) {
  const auto lines = read_lines(path, "roadwatch-distance-response-v1");
  expect_header(path, lines[0], "distance response");
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    double d = 0.0;
    double s = 0.0;
    parse_row(path, lines[i], d, s);
    samples.emplace_back(d, s);
  }
  return samples;
}

}  // namespace roadwatch::io
