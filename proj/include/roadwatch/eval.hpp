// Evaluation suite: event scoring, ROC/AUC, cross-validated threshold
// metrics, false-positive rate conditioned on ego rotation intensity, and
// pitch-track comparison.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "roadwatch/signal.hpp"

namespace roadwatch {

struct LabeledEvent {
  std::string sequence;
  int apex_frame = 0;
  bool anomaly = false;  // false: background event
};

struct ScoredEvent {
  double score = 0.0;
  bool positive = false;
};

/// Score = max response in [apex - T/2, apex + T/2], T the series window.
/// use_raw selects the uncompensated response. Throws MissingSequence for
/// unknown sequence ids and UndefinedResponse when the whole scoring
/// window falls into the warm-up region.
std::vector<ScoredEvent> score_events(
    std::span<const LabeledEvent> events,
    const std::map<std::string, const ResponseSeries*>& responses,
    bool use_raw = false);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  /// One vertex per distinct score (ties grouped), preceded by the
  /// all-negative origin; FPR/TPR grow as the threshold drops.
  std::vector<RocPoint> points;
  /// Trapezoidal area; equals the pairwise win rate with ties at 1/2.
  double auc = 0.0;
};

/// Throws SingleClassError unless both classes are present.
RocCurve roc_auc(std::span<const ScoredEvent> scored);

struct BinaryMetrics {
  double balanced_accuracy = 0.0;  // (TPR + TNR) / 2
  double f_score = 0.0;            // F1
};

BinaryMetrics binary_metrics(int tp, int fp, int tn, int fn);

struct MetricsReport {
  RocCurve roc;
  double balanced_accuracy_mean = 0.0;
  double balanced_accuracy_std = 0.0;
  double f_score_mean = 0.0;
  double f_score_std = 0.0;
  std::vector<double> fold_thresholds;
  int folds = 0;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Stratified k-fold cross validation: the threshold maximizing the
/// F-score on the training folds (smallest such threshold on ties) is
/// applied to the held-out fold. Reports mean and population standard
/// deviation over folds, plus the ROC/AUC of the full set. Throws
/// TooFewEvents when either class has fewer than k events.
MetricsReport cv_threshold_metrics(std::span<const ScoredEvent> scored,
                                   int k_folds = 5, std::uint64_t seed = 17);

/// Mean absolute cumulative pitch over a trailing window of
/// window_frames (one second worth of frames); NaN during warm-up.
std::vector<double> rotation_intensity(std::span<const double> phi_cum,
                                       int window_frames);

struct RotationIntensityBin {
  double lo = 0.0;
  double hi = 0.0;
  double fpr = 0.0;
  int count = 0;
};

/// One response/intensity pair per sequence, aligned per frame; NaN
/// entries are skipped.
struct IntensitySeries {
  std::vector<double> s;
  std::vector<double> intensity;
};

/// Assigns every defined frame to an intensity bin and reports the
/// fraction of frames whose response exceeds the threshold. Empty bins
/// are omitted rather than reported as zero.
std::vector<RotationIntensityBin> fpr_vs_rotation_intensity(
    std::span<const IntensitySeries> sequences, double threshold,
    std::span<const double> bin_edges);

struct TrackComparison {
  double rms = 0.0;
  double max_abs = 0.0;
};

/// RMS and maximum absolute difference between two aligned pitch tracks.
TrackComparison compare_pitch_tracks(std::span<const double> estimated,
                                     std::span<const double> reference);

}  // namespace roadwatch
