#include "roadwatch/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roadwatch {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

AggregatedTrack aggregate_vertical(const VehicleTrack& track) {
  const std::size_t n = track.frames.size();
  AggregatedTrack out;
  out.y_hat.assign(n, kNan);
  out.interpolated.assign(n, 0);

  bool any_valid = false;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& points = track.frames[k];
    if (points.size() > static_cast<std::size_t>(kMaxTrackPointsPerFrame)) {
      throw ConfigError("vehicle track frame exceeds the point cap");
    }
    double sum = 0.0;
    int count = 0;
    for (const auto& p : points) {
      if (p.valid) {
        sum += p.y;
        ++count;
      }
    }
    if (count > 0) {
      out.y_hat[k] = sum / count;
      any_valid = true;
    } else {
      out.interpolated[k] = 1;
    }
  }
  if (!any_valid) {
    throw EmptyTrack("vehicle track has no valid point in any frame");
  }

  // Fill gaps: linear interpolation between the surrounding valid frames,
  // nearest-value extension at the ends.
  std::size_t prev_valid = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (!out.interpolated[k]) {
      prev_valid = k;
      continue;
    }
    std::size_t next_valid = k + 1;
    while (next_valid < n && out.interpolated[next_valid]) {
      ++next_valid;
    }
    if (prev_valid == n) {
      out.y_hat[k] = out.y_hat[next_valid];
    } else if (next_valid == n) {
      out.y_hat[k] = out.y_hat[prev_valid];
    } else {
      const double span = static_cast<double>(next_valid - prev_valid);
      const double alpha = static_cast<double>(k - prev_valid) / span;
      out.y_hat[k] =
          (1.0 - alpha) * out.y_hat[prev_valid] + alpha * out.y_hat[next_valid];
    }
  }
  return out;
}

std::vector<double> compensate(std::span<const double> y_hat,
                               std::span<const PitchEstimate> pitch,
                               const CameraIntrinsics& intr) {
  if (y_hat.size() != pitch.size()) {
    throw LengthMismatch("trajectory and pitch series differ in length");
  }
  std::vector<double> y_comp(y_hat.size());
  for (std::size_t k = 0; k < y_hat.size(); ++k) {
    const double phi = pitch[k].phi_cum;
    if (!(std::abs(phi) < M_PI / 2.0)) {
      throw DomainError("cumulative pitch out of range for tan");
    }
    y_comp[k] = y_hat[k] - intr.fy * std::tan(phi);
  }
  return y_comp;
}

std::vector<double> windowed_std(std::span<const double> y, int window) {
  if (window < 2) {
    throw DomainError("window must be at least 2 frames");
  }
  if (y.size() < static_cast<std::size_t>(window)) {
    throw SeriesTooShort("series shorter than the window");
  }
  std::vector<double> s(y.size(), kNan);
  // Direct per-window evaluation; cheap at these scales and exactly the
  // written formula.
  for (std::size_t t = window - 1; t < y.size(); ++t) {
    const std::size_t begin = t + 1 - window;
    double mean = 0.0;
    for (std::size_t i = begin; i <= t; ++i) {
      mean += y[i];
    }
    mean /= window;
    double acc = 0.0;
    for (std::size_t i = begin; i <= t; ++i) {
      const double d = y[i] - mean;
      acc += d * d;
    }
    s[t] = std::sqrt(acc / window);
  }
  return s;
}

std::vector<DetectionEvent> detect(std::span<const double> s, double threshold,
                                   int nms_radius) {
  if (!(threshold > 0.0)) {
    throw DomainError("detection threshold must be positive");
  }
  if (nms_radius < 1) {
    throw DomainError("nms radius must be at least 1 frame");
  }

  const auto value = [&s](std::size_t i) { return s[i]; };
  const auto defined = [&s](std::size_t i) { return !std::isnan(s[i]); };

  std::vector<DetectionEvent> candidates;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!defined(i) || value(i) < threshold) {
      continue;
    }
    const bool rises = i == 0 || !defined(i - 1) || value(i) > value(i - 1);
    const bool falls =
        i + 1 == s.size() || !defined(i + 1) || value(i) >= value(i + 1);
    if (rises && falls) {
      candidates.push_back(DetectionEvent{static_cast<int>(i), value(i), 0, 0});
    }
  }

  // Greedy suppression: strongest first, earlier frame wins ties.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const DetectionEvent& a, const DetectionEvent& b) {
                     if (a.response != b.response) {
                       return a.response > b.response;
                     }
                     return a.frame < b.frame;
                   });
  std::vector<DetectionEvent> kept;
  for (const DetectionEvent& c : candidates) {
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const DetectionEvent& k) {
          return std::abs(k.frame - c.frame) <= nms_radius;
        });
    if (!suppressed) {
      kept.push_back(c);
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const DetectionEvent& a, const DetectionEvent& b) {
              return a.frame < b.frame;
            });
  const int last = static_cast<int>(s.size()) - 1;
  for (DetectionEvent& event : kept) {
    event.window_start = std::max(0, event.frame - nms_radius);
    event.window_end = std::min(last, event.frame + nms_radius);
  }
  return kept;
}

void PipelineConfig::validate() const {
  estimator.validate();
  if (window < 2) {
    throw ConfigError("pipeline window must be at least 2 frames");
  }
  if (!(threshold > 0.0)) {
    throw ConfigError("pipeline threshold must be positive");
  }
  if (nms_radius < 0) {
    throw ConfigError("nms radius must be non-negative");
  }
}

PipelineResult run_pipeline(const VehicleTrack& track,
                            std::span<const CorrespondenceSet> frame_pairs,
                            const CameraIntrinsics& intr,
                            const TranslationDirection& t,
                            const PipelineConfig& cfg) {
  cfg.validate();
  if (track.frames.empty() || frame_pairs.size() + 1 != track.frames.size()) {
    throw LengthMismatch("correspondence sets must pair consecutive track frames");
  }

  PipelineResult result;
  AggregatedTrack aggregated = aggregate_vertical(track);
  result.aggregation_interpolated = std::move(aggregated.interpolated);

  const std::vector<PitchEstimate> relative =
      estimate_pitch_track(frame_pairs, intr, t, cfg.estimator);
  // Frame-t compensation uses the pitch accumulated up to frame t; frame 0
  // carries no prior motion.
  result.pitch.resize(track.frames.size());
  for (std::size_t k = 0; k < relative.size(); ++k) {
    result.pitch[k + 1] = relative[k];
  }

  ResponseSeries& series = result.response;
  series.window = cfg.window;
  series.y_hat = std::move(aggregated.y_hat);
  series.y_comp = cfg.compensation
                      ? compensate(series.y_hat, result.pitch, intr)
                      : series.y_hat;
  series.s_raw = windowed_std(series.y_hat, cfg.window);
  series.s = cfg.compensation ? windowed_std(series.y_comp, cfg.window)
                              : series.s_raw;

  const int radius = cfg.nms_radius > 0 ? cfg.nms_radius : cfg.window;
  result.detections = detect(series.s, cfg.threshold, radius);
  return result;
}

}  // namespace roadwatch
