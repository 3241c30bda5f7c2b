#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "viris/dataset.hpp"
#include "viris/raster.hpp"

namespace viris {

enum class Polarity { Distance, Similarity };

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
  Polarity polarity = Polarity::Distance;
};

/// Index pairs (i < j) into the sample list.
struct PairSets {
  std::vector<std::pair<std::size_t, std::size_t>> genuine;
  std::vector<std::pair<std::size_t, std::size_t>> impostor;
};

/// Genuine: same subject and eye. Impostor: different subjects. Pairs of
/// one subject's two eyes are excluded unless `cross_eye_impostors`.
PairSets build_pairs(const std::vector<SampleId>& samples, bool cross_eye_impostors = false);

struct Rates {
  double fmr = 0.0;
  double fnmr = 0.0;
};

Rates error_rates(const ScoreSet& scores, double threshold);

struct OperatingPoint {
  double threshold = 0.0;
  double fmr = 0.0;
  double fnmr = 0.0;
};

/// Every distinct threshold, ordered from strictest (reject all) to loosest.
std::vector<OperatingPoint> sweep(const ScoreSet& scores);

/// Equal error rate with linear interpolation at the FMR/FNMR crossing.
OperatingPoint eer(const ScoreSet& scores);

struct TarAtFar {
  double far_target = 0.0;
  double tar = 0.0;
  double threshold = 0.0;
  double achieved_fmr = 0.0;
  /// Target below the impostor resolution or met only by rejecting everything.
  bool flagged = false;
};

TarAtFar tar_at_far(const ScoreSet& scores, double far_target);

/// Probability that a genuine score beats an impostor score; ties count 1/2.
double auc(const ScoreSet& scores);

struct DistStats {
  double gmean = 0.0, gstd = 0.0;
  double imean = 0.0, istd = 0.0;
  double dprime = 0.0;
};

/// |mu_g - mu_i| / sqrt((sd_g^2 + sd_i^2) / 2).
double decidability(double gmean, double gstd, double imean, double istd);
DistStats dist_stats(const ScoreSet& scores);

/// FNMR at the loosest threshold whose FMR is zero.
double zero_fmr(const ScoreSet& scores);
/// FMR at the strictest threshold whose FNMR is zero.
double zero_fnmr(const ScoreSet& scores);

/// DET points from (fmr 1, fnmr 0) to (0, 1), downsampled to at most
/// n_points while keeping both endpoints and the EER point.
std::vector<OperatingPoint> det_curve(const ScoreSet& scores, std::size_t n_points = 200);

/// Standard normal quantile.
double probit(double p);

struct VerificationReport {
  std::size_t n_genuine = 0, n_impostor = 0;
  double eer = 0.0, eer_threshold = 0.0;
  std::vector<TarAtFar> tar_at_far;
  double auc = 0.0;
  DistStats stats;
  double zero_fmr = 0.0, zero_fnmr = 0.0;
  /// Smallest non-zero FMR and FNMR the sample counts can resolve.
  double fmr_resolution = 0.0, fnmr_resolution = 0.0;
  std::vector<OperatingPoint> det_points;
};

VerificationReport verify(const ScoreSet& scores, const std::vector<double>& far_targets = {0.01, 0.0001},
                          std::size_t n_det_points = 200);

struct OverlapScores {
  double iou = 1.0;
  double dice = 1.0;
};

OverlapScores iou_dice(const BinaryMask& a, const BinaryMask& b);

/// Mean absolute difference between a probability map and a binary mask.
double e1(const Plane<double>& prob, const BinaryMask& gt);

struct ClassScores {
  double iou = 0.0, dice = 0.0, e1 = 0.0;
};

struct SegEvalRow {
  std::string name;
  std::optional<ClassScores> iris, pupil;
  std::string error;
};

struct SegEvalReport {
  std::vector<SegEvalRow> rows;
  /// Means over rows without errors.
  ClassScores iris, pupil;
  std::size_t evaluated = 0;
};

ClassScores class_scores(const BinaryMask& pred, const BinaryMask& gt);
void summarize(SegEvalReport& report);

}  // namespace viris
