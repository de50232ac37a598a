#include "twoview/robust.hpp"

#include <algorithm>
#include <cmath>
#include <doctest.h>

#include "twoview/bench.hpp"
#include "twoview/metrics.hpp"
#include "twoview/rng.hpp"
#include "twoview/synth.hpp"

using namespace twoview;

namespace {

SyntheticPair scene(double outlier_rate, double sigma, std::uint64_t seed,
                    int n = 100) {
  SceneConfig cfg;
  cfg.rig = RigKind::ShortBaselineForward;
  cfg.n_points = n;
  cfg.noise_sigma = sigma;
  cfg.outlier_rate = outlier_rate;
  cfg.seed = seed;
  return generate_pair(cfg);
}

double nsgd_to_truth(const SyntheticPair& pair, const FundamentalMatrix& f,
                     std::uint64_t seed = 0) {
  SgdConfig cfg;
  cfg.dims1 = pair.dims1;
  cfg.dims2 = pair.dims2;
  cfg.seed = seed;
  return compute_nsgd(pair.f_gt, f, cfg);
}

bool same_result(const EstimationResult& a, const EstimationResult& b) {
  return a.f == b.f && a.inlier_mask == b.inlier_mask &&
         a.iterations_used == b.iterations_used && a.score == b.score &&
         a.inlier_cutoff == b.inlier_cutoff;
}

EstimationResult run_kind(EstimatorKind kind, const SyntheticPair& pair,
                          std::uint64_t seed, int iterations = 2000) {
  EstimatorConfig cfg;
  cfg.kind = kind;
  cfg.max_iterations = iterations;
  cfg.seed = seed;
  return estimate(pair.corrs.correspondences, cfg);
}

constexpr EstimatorKind kAllKinds[] = {
    EstimatorKind::Ransac, EstimatorKind::Msac, EstimatorKind::LMedS,
    EstimatorKind::CoarseToFine};

}  // namespace

TEST_CASE("scoring helpers") {
  // MSAC truncated loss on residuals {0.5, 1, 3} with T = 2.
  const std::vector<double> residuals{0.5, 1.0, 3.0};
  CHECK(truncated_quadratic_loss(residuals, 2.0) == doctest::Approx(5.25));

  // LMedS median squared residual of {1, 2, 3, 4, 100}.
  const std::vector<double> more{1, 2, 3, 4, 100};
  CHECK(median_squared_residual(more) == doctest::Approx(9.0));

  // Adaptive termination: confidence 0.99, w = 0.5, sample size 8.
  CHECK(ransac_required_iterations(0.99, 0.5, 8, 2000) == 1177);
  CHECK(ransac_required_iterations(0.99, 1.0, 8, 2000) == 1);
  CHECK(ransac_required_iterations(0.99, 0.0, 8, 2000) == 2000);
  CHECK(ransac_required_iterations(0.99, 0.1, 8, 2000) == 2000);  // capped
}

TEST_CASE("msac prefers lower residuals when inlier counts tie") {
  // Two candidate models over the same data: equal support counts,
  // different residual quality.
  const std::vector<double> model_a{0.1, 0.2, 0.1, 0.3, 5.0, 7.0};
  const std::vector<double> model_b{0.8, 0.9, 0.7, 0.9, 5.0, 7.0};
  const double t = 1.0;
  int count_a = 0, count_b = 0;
  for (double r : model_a)
    if (r <= t) ++count_a;
  for (double r : model_b)
    if (r <= t) ++count_b;
  CHECK(count_a == count_b);  // RANSAC ties
  CHECK(truncated_quadratic_loss(model_a, t) <
        truncated_quadratic_loss(model_b, t));
}

TEST_CASE("estimators recover the exact model on clean data") {
  for (EstimatorKind kind : kAllKinds) {
    CAPTURE(estimator_name(kind));
    const SyntheticPair pair = scene(0.0, 0.0, 1234);
    const EstimationResult result = run_kind(kind, pair, 99);
    CHECK(nsgd_to_truth(pair, result.f) < 1e-6);
    CHECK(result.iterations_used <= 2000);
    const std::size_t inliers = static_cast<std::size_t>(std::count(
        result.inlier_mask.begin(), result.inlier_mask.end(), true));
    CHECK(inliers >= 50);
  }
}

TEST_CASE("estimators reject insufficient data") {
  const SyntheticPair pair = scene(0.0, 0.0, 5, 10);
  const std::vector<Correspondence> seven(
      pair.corrs.correspondences.begin(),
      pair.corrs.correspondences.begin() + 7);
  for (EstimatorKind kind : kAllKinds) {
    EstimatorConfig cfg;
    cfg.kind = kind;
    CHECK_THROWS_AS((void)estimate(seven, cfg), Error);
    try {
      (void)estimate(seven, cfg);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InsufficientData);
    }
  }
}

TEST_CASE("estimator config validation") {
  const SyntheticPair pair = scene(0.0, 0.0, 6, 20);
  EstimatorConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS((void)estimate(pair.corrs.correspondences, cfg), Error);
  cfg = {};
  cfg.confidence = 1.0;
  CHECK_THROWS_AS((void)estimate(pair.corrs.correspondences, cfg), Error);
  cfg = {};
  cfg.inlier_threshold = 0.0;
  CHECK_THROWS_AS((void)estimate(pair.corrs.correspondences, cfg), Error);
}

TEST_CASE("determinism: identical config gives bit-identical results") {
  const SyntheticPair pair = scene(0.3, 0.5, 777);
  for (EstimatorKind kind : kAllKinds) {
    CAPTURE(estimator_name(kind));
    const EstimationResult a = run_kind(kind, pair, 31, 600);
    const EstimationResult b = run_kind(kind, pair, 31, 600);
    CHECK(same_result(a, b));
  }
}

TEST_CASE("inlier mask consistency with the returned model") {
  const SyntheticPair pair = scene(0.25, 0.5, 4242);
  for (EstimatorKind kind : kAllKinds) {
    CAPTURE(estimator_name(kind));
    const EstimationResult result = run_kind(kind, pair, 7, 800);
    REQUIRE(result.inlier_mask.size() == pair.corrs.correspondences.size());
    for (size_t i = 0; i < result.inlier_mask.size(); ++i) {
      const double r = symmetric_epipolar_distance(
          result.f, pair.corrs.correspondences[i]);
      if (result.inlier_mask[i]) {
        CHECK(r <= result.inlier_cutoff);
      } else if (kind != EstimatorKind::CoarseToFine) {
        // Stage-1 pruning makes the coarse-to-fine mask conservative;
        // the others classify against their cutoff exactly.
        CHECK(r > result.inlier_cutoff);
      }
    }
    if (kind == EstimatorKind::Ransac || kind == EstimatorKind::Msac)
      CHECK(result.inlier_cutoff == 1.0);
  }
}

TEST_CASE("ransac adaptive termination on easy data") {
  const SyntheticPair pair = scene(0.0, 0.0, 10);
  const EstimationResult result = run_kind(EstimatorKind::Ransac, pair, 3);
  // Early samples reach full support: the loop stops almost immediately.
  CHECK(result.iterations_used <= 3);
}

TEST_CASE("msac matches ransac on clean data") {
  const SyntheticPair pair = scene(0.0, 0.0, 55);
  const EstimationResult r = run_kind(EstimatorKind::Ransac, pair, 1);
  const EstimationResult m = run_kind(EstimatorKind::Msac, pair, 1);
  double diff = 0.0;
  for (int i = 0; i < 9; ++i)
    diff = std::max(diff, std::abs(r.f.m[i] - m.f.m[i]));
  CHECK(diff < 1e-8);
}

TEST_CASE("lmeds clean-majority median is tiny") {
  const SyntheticPair pair = scene(0.4, 0.0, 91);  // 60% exact inliers
  const EstimationResult result = run_kind(EstimatorKind::LMedS, pair, 5);
  CHECK(std::sqrt(result.score) < 1e-9);
  // Classical draw count at the 50% design point, under the cap.
  CHECK(result.iterations_used ==
        ransac_required_iterations(0.99, 0.5, 8, 2000));
  CHECK(result.iterations_used == 1177);
}

TEST_CASE("lmeds breaks down beyond half outliers while ransac survives") {
  int lmeds_hits = 0, ransac_hits = 0;
  const int trials = 12;
  for (int t = 0; t < trials; ++t) {
    const SyntheticPair pair = scene(0.6, 0.5, 5000 + t);
    const double l =
        nsgd_to_truth(pair, run_kind(EstimatorKind::LMedS, pair, t, 800).f);
    const double r =
        nsgd_to_truth(pair, run_kind(EstimatorKind::Ransac, pair, t, 800).f);
    if (l < 0.05) ++lmeds_hits;
    if (r < 0.05) ++ransac_hits;
  }
  CHECK(ransac_hits > lmeds_hits);
}

TEST_CASE("coarse-to-fine beats plain lmeds at 30 percent inliers") {
  int cf_hits = 0, lmeds_hits = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const SyntheticPair pair = scene(0.7, 0.25, 9100 + t);
    const double cf = nsgd_to_truth(
        pair, run_kind(EstimatorKind::CoarseToFine, pair, t).f);
    const double lm =
        nsgd_to_truth(pair, run_kind(EstimatorKind::LMedS, pair, t).f);
    if (cf < 0.05) ++cf_hits;
    if (lm < 0.05) ++lmeds_hits;
  }
  CHECK(cf_hits >= 8);
  CHECK(cf_hits > lmeds_hits);
}

TEST_CASE("coarse-to-fine diagnostics and pruning quality") {
  const SyntheticPair pair = scene(0.5, 0.5, 321);
  const EstimationResult result =
      run_kind(EstimatorKind::CoarseToFine, pair, 17);
  REQUIRE(result.stage_diagnostics.has_value());
  const StageDiagnostics& diag = *result.stage_diagnostics;
  CHECK(diag.input_count == 100);
  CHECK(diag.survivor_count >= 8);
  CHECK(diag.survivor_count <= diag.input_count);
  CHECK(diag.coarse_inlier_rate ==
        doctest::Approx(static_cast<double>(diag.survivor_count) / 100.0));
  CHECK(diag.coarse_iterations <= 2000);

  // Pruning must enrich the stage-2 input: the survivor set's true-inlier
  // rate exceeds the full input's (0.5 by construction).
  std::size_t true_in_survivors = 0;
  for (size_t i = 0; i < diag.survivor_mask.size(); ++i)
    if (diag.survivor_mask[i] && pair.inlier_truth[i]) ++true_in_survivors;
  const double survivor_rate = static_cast<double>(true_in_survivors) /
                               static_cast<double>(diag.survivor_count);
  CHECK(survivor_rate > 0.5);

  // Under the final model, the survivor set fits at least as well as the
  // raw input did.
  std::size_t in_survivors = 0, in_input = 0;
  for (size_t i = 0; i < diag.survivor_mask.size(); ++i) {
    const double r = symmetric_epipolar_distance(
        result.f, pair.corrs.correspondences[i]);
    if (r <= 1.0) {
      ++in_input;
      if (diag.survivor_mask[i]) ++in_survivors;
    }
  }
  CHECK(static_cast<double>(in_survivors) /
            static_cast<double>(diag.survivor_count) >=
        static_cast<double>(in_input) / 100.0);
}

TEST_CASE("coarse stage pruning to fewer than 8 points fails") {
  // Seven exact correspondences with low ratios plus two far outliers:
  // progressive sampling keeps drawing the top-7 pool, whose model
  // supports exactly seven points.
  const SyntheticPair pair = scene(0.0, 0.0, 246, 9);
  std::vector<Correspondence> corrs = pair.corrs.correspondences;
  Rng rng(4);
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (i < 7) {
      corrs[i].nn_ratio = 0.2 + 0.01 * static_cast<double>(i);
      continue;
    }
    corrs[i].nn_ratio = 0.9;
    for (int tries = 0; tries < 1000; ++tries) {
      const Point2 candidate{rng.uniform(0.0, 640.0), rng.uniform(0.0, 480.0)};
      const Correspondence moved{corrs[i].p1, candidate, corrs[i].nn_ratio};
      if (symmetric_epipolar_distance(pair.f_gt, moved) >= 50.0) {
        corrs[i] = moved;
        break;
      }
    }
  }
  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::CoarseToFine;
  cfg.seed = 2;
  CHECK_THROWS_AS((void)estimate(corrs, cfg), Error);
  try {
    (void)estimate(corrs, cfg);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EstimationFailed);
  }
}

TEST_CASE("mean nsgd degrades monotonically with the outlier rate") {
  const double rates[] = {0.0, 0.2, 0.4, 0.6};
  for (EstimatorKind kind : kAllKinds) {
    CAPTURE(std::string(estimator_name(kind)));
    double previous = -1.0;
    for (double rate : rates) {
      double mean = 0.0;
      const int trials = 24;
      for (int t = 0; t < trials; ++t) {
        const SyntheticPair pair = scene(rate, 0.5, 7000 + t);
        double v;
        try {
          v = nsgd_to_truth(pair, run_kind(kind, pair, 50 + t, 800).f);
        } catch (const Error&) {
          v = 1.0;
        }
        mean += v;
      }
      mean /= trials;
      // Below breakdown the trend is flat and the Monte-Carlo jitter of
      // the mean dominates; allow that much slack. Breakdown inversions
      // are an order of magnitude larger and still fail the check.
      CHECK(mean >= previous - (0.10 * previous + 5e-4));
      previous = mean;
    }
  }
}

TEST_CASE("sort_by_ratio") {
  std::vector<Correspondence> corrs{{{0, 0}, {0, 0}, 0.9},
                                    {{1, 1}, {1, 1}, 0.5},
                                    {{2, 2}, {2, 2}, 0.7}};
  const std::vector<Correspondence> sorted = sort_by_ratio(corrs);
  CHECK(*sorted[0].nn_ratio == 0.5);
  CHECK(*sorted[1].nn_ratio == 0.7);
  CHECK(*sorted[2].nn_ratio == 0.9);

  // All absent: original order preserved.
  std::vector<Correspondence> blank{{{0, 0}, {0, 0}, {}},
                                    {{1, 1}, {1, 1}, {}}};
  const std::vector<Correspondence> kept = sort_by_ratio(blank);
  CHECK(kept[0].p1.u == 0.0);
  CHECK(kept[1].p1.u == 1.0);

  // Mixed: rated ascending first, unrated after in original order.
  std::vector<Correspondence> mixed{{{0, 0}, {0, 0}, {}},
                                    {{1, 1}, {1, 1}, 0.8},
                                    {{2, 2}, {2, 2}, {}},
                                    {{3, 3}, {3, 3}, 0.3}};
  const std::vector<Correspondence> m = sort_by_ratio(mixed);
  CHECK(*m[0].nn_ratio == 0.3);
  CHECK(*m[1].nn_ratio == 0.8);
  CHECK(m[2].p1.u == 0.0);
  CHECK(m[3].p1.u == 2.0);
}
