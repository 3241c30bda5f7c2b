#include <doctest.h>

#include <cmath>
#include <random>

#include "support/eval_oracle.hpp"
#include "viris/evaluation.hpp"

using namespace viris;
using namespace viris::testing;

namespace {

SampleId sid(const char* subject, Eye eye, int trial) { return {subject, eye, 1, trial}; }

ScoreSet negated(const ScoreSet& s) {
  ScoreSet out{s.genuine, s.impostor, s.polarity == Polarity::Distance ? Polarity::Similarity : Polarity::Distance};
  for (double& v : out.genuine) v = -v;
  for (double& v : out.impostor) v = -v;
  return out;
}

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution b(p);
  BinaryMask m(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = b(rng);
  return m;
}

}  // namespace

TEST_CASE("pair construction") {
  std::vector<SampleId> s;
  for (const char* subj : {"1", "2"})
    for (Eye e : {Eye::Left, Eye::Right})
      for (int t = 1; t <= 2; ++t) s.push_back(sid(subj, e, t));
  const PairSets p = build_pairs(s);
  CHECK(p.genuine.size() == 4);
  CHECK(p.impostor.size() == 16);
  CHECK(28 - p.genuine.size() - p.impostor.size() == 8);
  for (auto [i, j] : p.genuine) {
    CHECK(i < j);
    CHECK(s[i].subject == s[j].subject);
    CHECK(s[i].eye == s[j].eye);
  }
  for (auto [i, j] : p.impostor) CHECK(s[i].subject != s[j].subject);
  CHECK(build_pairs(s, true).impostor.size() == 24);

  std::vector<SampleId> one;
  for (int t = 1; t <= 8; ++t) one.push_back(sid("9", Eye::Left, t));
  CHECK(build_pairs(one).genuine.size() == 28);
  CHECK(build_pairs(one).impostor.empty());

  const PairSets two = build_pairs({sid("1", Eye::Left, 1), sid("2", Eye::Left, 1)});
  CHECK(two.genuine.empty());
  CHECK(two.impostor.size() == 1);
}

TEST_CASE("error rates, AUC and decidability examples") {
  const ScoreSet sim{{0.9, 0.8, 0.7}, {0.75, 0.2, 0.1}, Polarity::Similarity};
  const Rates r = error_rates(sim, 0.75);
  CHECK(r.fmr == doctest::Approx(1.0 / 3));
  CHECK(r.fnmr == doctest::Approx(1.0 / 3));
  CHECK(auc(sim) == doctest::Approx(8.0 / 9));

  const ScoreSet dist{{0.1, 0.2, 0.3}, {0.6, 0.7, 0.8}, Polarity::Distance};
  CHECK(error_rates(dist, 0.05).fmr == 0.0);
  CHECK(error_rates(dist, 0.05).fnmr == 1.0);
  CHECK(error_rates(dist, 0.45).fmr == 0.0);
  CHECK(error_rates(dist, 0.45).fnmr == 0.0);
  CHECK(auc(dist) == 1.0);
  CHECK(auc({{0.5, 0.6}, {0.6, 0.5}, Polarity::Distance}) == 0.5);
  CHECK_THROWS_AS(error_rates({{}, {0.1}, Polarity::Distance}, 0.5), ParameterError);
  CHECK_THROWS_AS(auc({{NAN}, {0.1}, Polarity::Distance}), ParameterError);

  // Published dataset rows: means and deviations in, decidability out.
  struct Row {
    double gm, gs, im, is, dprime;
  };
  for (Row row : {Row{0.7671, 0.0575, 0.6382, 0.0503, 2.386}, Row{0.8772, 0.0628, 0.6692, 0.0673, 3.195},
                  Row{0.7497, 0.0381, 0.5928, 0.0634, 3.002}, Row{0.9312, 0.0255, 0.6479, 0.0794, 4.808}})
    CHECK(std::abs(decidability(row.gm, row.gs, row.im, row.is) - row.dprime) <= 0.02);
  CHECK(decidability(0.5, 0.1, 0.5, 0.2) == 0.0);

  const DistStats st = dist_stats({{1.0, 3.0}, {0.0, 0.0, 6.0}, Polarity::Similarity});
  CHECK(st.gmean == 2.0);
  CHECK(st.gstd == 1.0);
  CHECK(st.imean == 2.0);
  CHECK(st.istd == doctest::Approx(std::sqrt(8.0)));
  CHECK(st.dprime == 0.0);
  CHECK_THROWS_AS(dist_stats({{1.0}, {0.0, 1.0}, Polarity::Distance}), ParameterError);
}

TEST_CASE("EER, TAR@FAR and zero-error rates") {
  const ScoreSet sep{{0.1, 0.2, 0.3}, {0.6, 0.7, 0.8}, Polarity::Distance};
  CHECK(eer(sep).fmr == 0.0);
  CHECK(eer(sep).threshold >= 0.3);
  CHECK(eer(sep).threshold <= 0.6);
  CHECK(tar_at_far(sep, 0.01).tar == 1.0);
  CHECK(zero_fmr(sep) == 0.0);
  CHECK(zero_fnmr(sep) == 0.0);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  ScoreSet same;
  for (int k = 0; k < 200; ++k) same.genuine.push_back(nd(rng));
  same.impostor = same.genuine;
  CHECK(std::abs(eer(same).fmr - 0.5) <= 1.0 / 200);
  CHECK(auc(same) == 0.5);
  CHECK(zero_fmr(same) == 1.0);

  // Uniform genuine on [0, 1] and impostor on [0.5, 1.5], as quantile grids.
  const int n = 1000;
  ScoreSet uni;
  for (int k = 0; k < n; ++k) {
    uni.genuine.push_back((k + 0.5) / n);
    uni.impostor.push_back(0.5 + (k + 0.5) / n);
  }
  for (double far : {0.01, 0.05, 0.2}) {
    const TarAtFar t = tar_at_far(uni, far);
    CHECK(std::abs(t.tar - std::min(1.0, 0.5 + far)) <= 2.0 / n);
    CHECK(t.achieved_fmr <= far);
    CHECK_FALSE(t.flagged);
  }
  CHECK(eer(uni).fmr == doctest::Approx(0.25).epsilon(0.01));
  CHECK(tar_at_far(uni, 0.0001).flagged);
  CHECK_THROWS_AS(tar_at_far(uni, 0.0), ParameterError);
  CHECK_THROWS_AS(tar_at_far(uni, 1.5), ParameterError);

  // One impostor beats every genuine score.
  const ScoreSet outlier{{0.7, 0.8, 0.9}, {0.1, 0.2, 0.95}, Polarity::Similarity};
  CHECK(zero_fmr(outlier) == 1.0);
  CHECK(zero_fmr(outlier) == oracle_zero_fmr(outlier));
  CHECK(zero_fnmr(outlier) == doctest::Approx(1.0 / 3));
  const TarAtFar flagged = tar_at_far({{0.5}, {0.1}, Polarity::Distance}, 0.5);
  CHECK(flagged.flagged);
  CHECK(flagged.tar == 0.0);
}

TEST_CASE("statistics agree with the brute-force sweep") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const ScoreSet s = random_score_set(rng);
    const OracleEer oe = oracle_eer(s);
    const OperatingPoint e = eer(s);
    CHECK(std::abs(e.fmr - oe.value) <= 1e-9);
    CHECK(std::abs(e.threshold - oe.threshold) <= 1e-9);
    CHECK(std::abs(auc(s) - oracle_auc(s)) <= 1e-9);
    CHECK(std::abs(zero_fmr(s) - oracle_zero_fmr(s)) <= 1e-9);
    CHECK(std::abs(zero_fnmr(s) - oracle_zero_fnmr(s)) <= 1e-9);
    for (double far : {0.0001, 0.01, 0.1}) CHECK(std::abs(tar_at_far(s, far).tar - oracle_tar(s, far)) <= 1e-9);

    const auto pts = sweep(s);
    const auto ref = oracle_sweep(s);
    REQUIRE(pts.size() == ref.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CHECK(pts[k].fmr == doctest::Approx(ref[k].fmr));
      CHECK(pts[k].fnmr == doctest::Approx(ref[k].fnmr));
      const Rates r = error_rates(s, pts[k].threshold);
      CHECK(r.fmr == doctest::Approx(pts[k].fmr));
      CHECK(r.fnmr == doctest::Approx(pts[k].fnmr));
    }
  }
}

TEST_CASE("DET curve and probit") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreSet s = random_score_set(rng);
    const auto full = sweep(s);
    for (std::size_t n : {std::size_t{5}, std::size_t{50}, std::size_t{2000}}) {
      const auto det = det_curve(s, n);
      CHECK(det.size() <= std::max(n, full.size() + 1));
      CHECK(det.front().fmr == 1.0);
      CHECK(det.front().fnmr == 0.0);
      CHECK(det.back().fmr == 0.0);
      CHECK(det.back().fnmr == 1.0);
      for (std::size_t k = 1; k < det.size(); ++k) {
        CHECK(det[k].fmr <= det[k - 1].fmr);
        CHECK(det[k].fnmr >= det[k - 1].fnmr);
      }
      const OperatingPoint e = eer(s);
      const bool has_eer = std::any_of(det.begin(), det.end(), [&](const OperatingPoint& p) {
        return std::abs(p.fmr - e.fmr) < 1e-12 && std::abs(p.fnmr - e.fnmr) < 1e-12;
      });
      CHECK(has_eer);
      // Every other sampled point is a point of the full sweep.
      for (const auto& p : det) {
        const bool on_sweep = std::any_of(full.begin(), full.end(), [&](const OperatingPoint& q) {
          return q.threshold == p.threshold && q.fmr == p.fmr && q.fnmr == p.fnmr;
        });
        CHECK((on_sweep || (std::abs(p.fmr - e.fmr) < 1e-12 && std::abs(p.fnmr - e.fnmr) < 1e-12)));
      }
    }
  }
  CHECK_THROWS_AS(det_curve({{0.1}, {0.2}, Polarity::Distance}, 2), ParameterError);

  CHECK(probit(0.5) == doctest::Approx(0.0).scale(1));
  CHECK(probit(0.975) == doctest::Approx(1.959963984540054));
  CHECK(probit(0.001) == doctest::Approx(-3.090232306167814));
  CHECK(probit(1e-9) == doctest::Approx(-5.997807015007686));
  for (double p = 1e-6; p < 1.0; p += 0.0137) CHECK(0.5 * std::erfc(-probit(p) / std::sqrt(2.0)) == doctest::Approx(p));
  CHECK_THROWS_AS(probit(0.0), ParameterError);
  CHECK_THROWS_AS(probit(1.0), ParameterError);
}

TEST_CASE("verification report") {
  std::mt19937_64 rng(8);
  const ScoreSet s = random_score_set(rng);
  const VerificationReport r = verify(s);
  CHECK(r.n_genuine == s.genuine.size());
  CHECK(r.n_impostor == s.impostor.size());
  CHECK(r.eer == doctest::Approx(eer(s).fmr));
  REQUIRE(r.tar_at_far.size() == 2);
  CHECK(r.tar_at_far[0].far_target == 0.01);
  CHECK(r.tar_at_far[1].far_target == 0.0001);
  CHECK(r.auc == auc(s));
  CHECK(r.fmr_resolution == doctest::Approx(1.0 / s.impostor.size()));
  CHECK(r.det_points.size() <= 200);
  CHECK(r.eer >= 0.0);
  CHECK(r.eer <= 0.5 + 1e-9);
}

TEST_CASE("statistic invariances") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoreSet s = random_score_set(rng);
    const ScoreSet n = negated(s);
    CHECK(eer(n).fmr == doctest::Approx(eer(s).fmr));
    CHECK(eer(n).threshold == doctest::Approx(-eer(s).threshold));
    CHECK(auc(n) == doctest::Approx(auc(s)));
    CHECK(zero_fmr(n) == zero_fmr(s));
    CHECK(zero_fnmr(n) == zero_fnmr(s));
    CHECK(tar_at_far(n, 0.01).tar == tar_at_far(s, 0.01).tar);
    CHECK(dist_stats(n).dprime == doctest::Approx(dist_stats(s).dprime));

    ScoreSet mono = s;
    for (double& v : mono.genuine) v = std::exp(v) + v * v * v;
    for (double& v : mono.impostor) v = std::exp(v) + v * v * v;
    CHECK(auc(mono) == doctest::Approx(auc(s)));
    CHECK(eer(mono).fmr == doctest::Approx(eer(s).fmr));

    ScoreSet aff = s;
    for (double& v : aff.genuine) v = 3.5 * v - 2.0;
    for (double& v : aff.impostor) v = 3.5 * v - 2.0;
    CHECK(dist_stats(aff).dprime == doctest::Approx(dist_stats(s).dprime));

    for (double t : {-1.0, 0.0, 0.7}) {
      const Rates r = error_rates(s, t);
      CHECK(r.fmr >= 0.0);
      CHECK(r.fmr <= 1.0);
      CHECK(r.fnmr >= 0.0);
      CHECK(r.fnmr <= 1.0);
    }
    CHECK(auc(s) >= 0.0);
    CHECK(auc(s) <= 1.0);
  }
}

TEST_CASE("segmentation overlap metrics") {
  BinaryMask a = BinaryMask::Constant(4, 8, false), b = a;
  a.block(0, 0, 2, 4).setConstant(true);
  b.block(0, 2, 2, 4).setConstant(true);
  const OverlapScores o = iou_dice(a, b);
  CHECK(o.iou == doctest::Approx(1.0 / 3));
  CHECK(o.dice == doctest::Approx(0.5));
  CHECK(iou_dice(a, a).iou == 1.0);
  CHECK(iou_dice(a, a).dice == 1.0);
  BinaryMask c = BinaryMask::Constant(4, 8, false);
  c.block(2, 0, 2, 4).setConstant(true);
  CHECK(iou_dice(a, c).iou == 0.0);
  CHECK(iou_dice(a, c).dice == 0.0);
  const BinaryMask empty = BinaryMask::Constant(4, 8, false);
  CHECK(iou_dice(empty, empty).iou == 1.0);
  CHECK(iou_dice(empty, empty).dice == 1.0);
  CHECK_THROWS_AS(iou_dice(a, BinaryMask::Constant(3, 8, false)), ParameterError);

  CHECK(e1(a.cast<double>(), a) == 0.0);
  CHECK(e1(Plane<double>::Constant(4, 8, 0.5), a) == 0.5);
  CHECK(e1(1.0 - a.cast<double>(), a) == 1.0);
  CHECK_THROWS_AS(e1(Plane<double>::Zero(4, 7), a), ParameterError);

  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 32), h = 1 + static_cast<int>(rng() % 32);
    const BinaryMask p = random_mask(rng, w, h, 0.4), g = random_mask(rng, w, h, 0.5);
    long inter = 0, uni = 0, np = 0, ng = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        inter += p(y, x) && g(y, x);
        uni += p(y, x) || g(y, x);
        np += p(y, x);
        ng += g(y, x);
      }
    const OverlapScores s = iou_dice(p, g);
    if (uni > 0) {
      CHECK(s.iou == static_cast<double>(inter) / uni);
      CHECK(s.dice == 2.0 * inter / (np + ng));
    }
    CHECK(s.dice >= s.iou);
    const ClassScores cs = class_scores(p, g);
    CHECK(cs.e1 == doctest::Approx(static_cast<double>(uni - inter) / (w * h)));
  }

  SegEvalReport rep;
  rep.rows.push_back({"a", ClassScores{1.0, 1.0, 0.0}, ClassScores{0.5, 0.6, 0.2}, ""});
  rep.rows.push_back({"b", ClassScores{0.5, 0.6, 0.2}, ClassScores{0.5, 0.6, 0.4}, ""});
  rep.rows.push_back({"c", std::nullopt, std::nullopt, "missing mask"});
  summarize(rep);
  CHECK(rep.evaluated == 2);
  CHECK(rep.iris.iou == doctest::Approx(0.75));
  CHECK(rep.pupil.e1 == doctest::Approx(0.3));
}
