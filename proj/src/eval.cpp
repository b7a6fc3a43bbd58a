#include "roadwatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace roadwatch {

namespace {

double population_std(std::span<const double> values, double mean) {
  double acc = 0.0;
  for (double v : values) {
    acc += (v - mean) * (v - mean);
  }
  return values.empty() ? 0.0 : std::sqrt(acc / values.size());
}

}  // namespace

std::vector<ScoredEvent> score_events(
    std::span<const LabeledEvent> events,
    const std::map<std::string, const ResponseSeries*>& responses,
    bool use_raw) {
  std::vector<ScoredEvent> scored;
  scored.reserve(events.size());
  for (const LabeledEvent& event : events) {
    const auto it = responses.find(event.sequence);
    if (it == responses.end() || it->second == nullptr) {
      throw MissingSequence("no response series for sequence '" +
                            event.sequence + "'");
    }
    const ResponseSeries& series = *it->second;
    const auto& s = use_raw ? series.s_raw : series.s;
    const int half = series.window / 2;
    const int lo = std::max(0, event.apex_frame - half);
    const int hi =
        std::min(static_cast<int>(s.size()) - 1, event.apex_frame + half);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int k = lo; k <= hi; ++k) {
      if (k >= 0 && series.defined(k) && !std::isnan(s[k])) {
        best = std::max(best, s[k]);
        any = true;
      }
    }
    if (!any) {
      throw UndefinedResponse("scoring window of sequence '" + event.sequence +
                              "' lies entirely in the warm-up region");
    }
    scored.push_back(ScoredEvent{best, event.anomaly});
  }
  return scored;
}

RocCurve roc_auc(std::span<const ScoredEvent> scored) {
  int positives = 0;
  int negatives = 0;
  for (const ScoredEvent& e : scored) {
    (e.positive ? positives : negatives) += 1;
  }
  if (positives == 0 || negatives == 0) {
    throw SingleClassError("ROC needs both classes");
  }

  std::vector<ScoredEvent> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredEvent& a, const ScoredEvent& b) {
              return a.score > b.score;
            });

  RocCurve curve;
  curve.points.push_back(
      RocPoint{std::numeric_limits<double>::infinity(), 0.0, 0.0});
  int tp = 0;
  int fp = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double score = sorted[i].score;
    // Group ties: one vertex per distinct score.
    while (i < sorted.size() && sorted[i].score == score) {
      (sorted[i].positive ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back(RocPoint{score, static_cast<double>(fp) / negatives,
                                    static_cast<double>(tp) / positives});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

BinaryMetrics binary_metrics(int tp, int fp, int tn, int fn) {
  BinaryMetrics m;
  const double tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double tnr = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
  m.balanced_accuracy = 0.5 * (tpr + tnr);
  const int denom = 2 * tp + fp + fn;
  m.f_score = denom > 0 ? 2.0 * tp / denom : 0.0;
  return m;
}

MetricsReport cv_threshold_metrics(std::span<const ScoredEvent> scored,
                                   int k_folds, std::uint64_t seed) {
  if (k_folds < 2) {
    throw ConfigError("cross validation needs at least 2 folds");
  }
  std::vector<std::size_t> pos_idx;
  std::vector<std::size_t> neg_idx;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    (scored[i].positive ? pos_idx : neg_idx).push_back(i);
  }
  if (pos_idx.size() < static_cast<std::size_t>(k_folds) ||
      neg_idx.size() < static_cast<std::size_t>(k_folds)) {
    throw TooFewEvents("need at least k events per class");
  }

  std::mt19937_64 rng(seed);
  std::shuffle(pos_idx.begin(), pos_idx.end(), rng);
  std::shuffle(neg_idx.begin(), neg_idx.end(), rng);
  std::vector<int> fold_of(scored.size(), 0);
  for (std::size_t i = 0; i < pos_idx.size(); ++i) {
    fold_of[pos_idx[i]] = static_cast<int>(i % k_folds);
  }
  for (std::size_t i = 0; i < neg_idx.size(); ++i) {
    fold_of[neg_idx[i]] = static_cast<int>(i % k_folds);
  }

  const auto f_score_at = [&](double threshold, int exclude_fold,
                              bool on_excluded) {
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const bool in_test = fold_of[i] == exclude_fold;
      if (in_test != on_excluded) {
        continue;
      }
      const bool predicted = scored[i].score >= threshold;
      if (scored[i].positive) {
        (predicted ? tp : fn) += 1;
      } else {
        (predicted ? fp : tn) += 1;
      }
    }
    return std::tuple(tp, fp, tn, fn);
  };

  MetricsReport report;
  report.folds = k_folds;
  report.seed = seed;
  std::vector<double> fold_ba;
  std::vector<double> fold_f1;
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<double> train_scores;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (fold_of[i] != fold) {
        train_scores.push_back(scored[i].score);
      }
    }
    std::sort(train_scores.begin(), train_scores.end());
    train_scores.erase(
        std::unique(train_scores.begin(), train_scores.end()),
        train_scores.end());
    // Candidate cuts: everything-positive plus the midpoints between
    // consecutive distinct scores, so a chosen cut generalizes to test
    // scores falling between the train classes.
    std::vector<double> candidates{train_scores.front()};
    for (std::size_t i = 1; i < train_scores.size(); ++i) {
      candidates.push_back(0.5 * (train_scores[i - 1] + train_scores[i]));
    }

    double best_threshold = candidates.front();
    double best_f1 = -1.0;
    for (double candidate : candidates) {
      const auto [tp, fp, tn, fn] = f_score_at(candidate, fold, false);
      const double f1 = binary_metrics(tp, fp, tn, fn).f_score;
      if (f1 > best_f1) {  // ties keep the smallest threshold
        best_f1 = f1;
        best_threshold = candidate;
      }
    }
    report.fold_thresholds.push_back(best_threshold);

    const auto [tp, fp, tn, fn] = f_score_at(best_threshold, fold, true);
    const BinaryMetrics m = binary_metrics(tp, fp, tn, fn);
    fold_ba.push_back(m.balanced_accuracy);
    fold_f1.push_back(m.f_score);
  }

  report.balanced_accuracy_mean =
      std::accumulate(fold_ba.begin(), fold_ba.end(), 0.0) / k_folds;
  report.f_score_mean =
      std::accumulate(fold_f1.begin(), fold_f1.end(), 0.0) / k_folds;
  report.balanced_accuracy_std =
      population_std(fold_ba, report.balanced_accuracy_mean);
  report.f_score_std = population_std(fold_f1, report.f_score_mean);
  report.roc = roc_auc(scored);
  return report;
}

std::vector<double> rotation_intensity(std::span<const double> phi_cum,
                                       int window_frames) {
  if (window_frames < 1) {
    throw DomainError("intensity window must be at least 1 frame");
  }
  std::vector<double> intensity(phi_cum.size(),
                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = window_frames - 1; t < phi_cum.size(); ++t) {
    double acc = 0.0;
    for (int i = 0; i < window_frames; ++i) {
      acc += std::abs(phi_cum[t - i]);
    }
    intensity[t] = acc / window_frames;
  }
  return intensity;
}

std::vector<RotationIntensityBin> fpr_vs_rotation_intensity(
    std::span<const IntensitySeries> sequences, double threshold,
    std::span<const double> bin_edges) {
  if (bin_edges.size() < 2 ||
      !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
    throw ConfigError("intensity bin edges must be sorted with >= 2 entries");
  }
  const std::size_t n_bins = bin_edges.size() - 1;
  std::vector<int> counts(n_bins, 0);
  std::vector<int> exceeded(n_bins, 0);
  for (const IntensitySeries& seq : sequences) {
    if (seq.s.size() != seq.intensity.size()) {
      throw LengthMismatch("response and intensity series differ in length");
    }
    for (std::size_t t = 0; t < seq.s.size(); ++t) {
      if (std::isnan(seq.s[t]) || std::isnan(seq.intensity[t])) {
        continue;
      }
      const double x = seq.intensity[t];
      if (x < bin_edges.front() || x >= bin_edges.back()) {
        continue;
      }
      const std::size_t bin =
          std::upper_bound(bin_edges.begin(), bin_edges.end(), x) -
          bin_edges.begin() - 1;
      counts[bin] += 1;
      if (seq.s[t] >= threshold) {
        exceeded[bin] += 1;
      }
    }
  }
  std::vector<RotationIntensityBin> bins;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (counts[b] == 0) {
      continue;  // absent, not zero
    }
    bins.push_back(RotationIntensityBin{
        bin_edges[b], bin_edges[b + 1],
        static_cast<double>(exceeded[b]) / counts[b], counts[b]});
  }
  return bins;
}

TrackComparison compare_pitch_tracks(std::span<const double> estimated,
                                     std::span<const double> reference) {
  if (estimated.size() != reference.size() || estimated.empty()) {
    throw LengthMismatch("pitch tracks must be aligned and non-empty");
  }
  TrackComparison cmp;
  double acc = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double d = estimated[i] - reference[i];
    acc += d * d;
    cmp.max_abs = std::max(cmp.max_abs, std::abs(d));
  }
  cmp.rms = std::sqrt(acc / estimated.size());
  return cmp;
}

}  // namespace roadwatch
