#pragma once

// Brute-force verification statistics: every candidate threshold is scored
// by direct counting, with no sorting or merging tricks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "viris/evaluation.hpp"

namespace viris::testing {

struct OraclePoint {
  double threshold, fmr, fnmr;
};

inline bool oracle_accepts(const ScoreSet& s, double v, double t) {
  return s.polarity == Polarity::Distance ? v <= t : v >= t;
}

/// Reject-all first, then every distinct score from strictest to loosest.
inline std::vector<OraclePoint> oracle_sweep(const ScoreSet& s) {
  std::vector<double> th(s.genuine);
  th.insert(th.end(), s.impostor.begin(), s.impostor.end());
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end()), th.end());
  if (s.polarity == Polarity::Similarity) std::reverse(th.begin(), th.end());
  std::vector<OraclePoint> pts{{th.front(), 0.0, 1.0}};
  for (double t : th) {
    double fa = 0, fr = 0;
    for (double v : s.impostor) fa += oracle_accepts(s, v, t);
    for (double v : s.genuine) fr += !oracle_accepts(s, v, t);
    pts.push_back({t, fa / s.impostor.size(), fr / s.genuine.size()});
  }
  return pts;
}

struct OracleEer {
  double value, threshold;
};

inline OracleEer oracle_eer(const ScoreSet& s) {
  const auto pts = oracle_sweep(s);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double d0 = pts[k - 1].fmr - pts[k - 1].fnmr, d1 = pts[k].fmr - pts[k].fnmr;
    if (d0 < 0 && d1 >= 0) {
      const double u = d0 / (d0 - d1);
      return {pts[k - 1].fmr + u * (pts[k].fmr - pts[k - 1].fmr),
              pts[k - 1].threshold + u * (pts[k].threshold - pts[k - 1].threshold)};
    }
  }
  return {0.0, pts.back().threshold};
}

inline double oracle_auc(const ScoreSet& s) {
  double wins = 0;
  for (double g : s.genuine)
    for (double i : s.impostor) {
      const bool better = s.polarity == Polarity::Distance ? g < i : g > i;
      wins += better ? 1.0 : (g == i ? 0.5 : 0.0);
    }
  return wins / (static_cast<double>(s.genuine.size()) * s.impostor.size());
}

inline double oracle_tar(const ScoreSet& s, double far) {
  double tar = 0.0;
  for (const auto& p : oracle_sweep(s))
    if (p.fmr <= far) tar = 1.0 - p.fnmr;
  return tar;
}

inline double oracle_zero_fmr(const ScoreSet& s) {
  double best = 1.0;
  for (const auto& p : oracle_sweep(s))
    if (p.fmr == 0.0) best = p.fnmr;
  return best;
}

inline double oracle_zero_fnmr(const ScoreSet& s) {
  const auto pts = oracle_sweep(s);
  for (const auto& p : pts)
    if (p.fnmr == 0.0) return p.fmr;
  return 1.0;
}

/// Overlapping normal score sets of up to 1000 scores in total; some are
/// quantised so that ties occur.
inline ScoreSet random_score_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 500);
  std::uniform_real_distribution<double> sep(0.0, 3.0);
  ScoreSet s;
  s.polarity = rng() % 2 ? Polarity::Distance : Polarity::Similarity;
  const bool quantise = rng() % 3 == 0;
  const double gap = s.polarity == Polarity::Distance ? -sep(rng) : sep(rng);
  std::normal_distribution<double> g(gap, 1.0), i(0.0, 1.0);
  auto q = [&](double v) { return quantise ? std::round(v * 4.0) / 4.0 : v; };
  for (int k = count(rng); k > 0; --k) s.genuine.push_back(q(g(rng)));
  for (int k = count(rng); k > 0; --k) s.impostor.push_back(q(i(rng)));
  return s;
}

}  // namespace viris::testing
