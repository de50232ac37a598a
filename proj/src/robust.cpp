#include "twoview/robust.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "twoview/rng.hpp"
#include "twoview/solvers.hpp"

namespace twoview {

namespace {

constexpr std::uint64_t kCoarseStream = 0xc0a25e01u;
constexpr std::uint64_t kFineStream = 0xf19e5702u;
constexpr int kLocalOptRounds = 4;

void validate(std::span<const Correspondence> corrs,
              const EstimatorConfig& cfg) {
  if (cfg.max_iterations < 1)
    fail(Errc::InvalidInput, "estimator: max_iterations must be >= 1");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
    fail(Errc::InvalidInput, "estimator: confidence must be in (0, 1)");
  if (!(cfg.inlier_threshold > 0.0))
    fail(Errc::InvalidInput, "estimator: inlier_threshold must be positive");
  if (corrs.size() < 8)
    fail(Errc::InsufficientData, "estimator: need at least 8 correspondences");
}

int adaptive_iterations(double confidence, double inlier_fraction,
                        int sample_size, int cap) {
  return ransac_required_iterations(confidence, inlier_fraction, sample_size,
                                    cap);
}

void sample_distinct(Rng& rng, std::size_t n, std::span<std::size_t> out) {
  for (std::size_t k = 0; k < out.size();) {
    const std::size_t idx = rng.uniform_index(n);
    bool duplicate = false;
    for (std::size_t j = 0; j < k; ++j)
      if (out[j] == idx) duplicate = true;
    if (!duplicate) out[k++] = idx;
  }
}

std::vector<double> residuals_of(const Mat3& f,
                                 std::span<const Correspondence> corrs) {
  std::vector<double> r(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i)
    r[i] = symmetric_residual_unchecked(f, corrs[i]);
  return r;
}

int count_within(const std::vector<double>& residuals, double cutoff) {
  int count = 0;
  for (double r : residuals)
    if (r <= cutoff) ++count;
  return count;
}

std::vector<bool> mask_within(const std::vector<double>& residuals,
                              double cutoff) {
  std::vector<bool> mask(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i)
    mask[i] = residuals[i] <= cutoff;
  return mask;
}

std::vector<Correspondence> gather(std::span<const Correspondence> corrs,
                                   const std::vector<bool>& mask) {
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < corrs.size(); ++i)
    if (mask[i]) out.push_back(corrs[i]);
  return out;
}

double msac_score(const std::vector<double>& residuals, double threshold) {
  return truncated_quadratic_loss(residuals, threshold);
}

double median_squared(const std::vector<double>& residuals) {
  return median_squared_residual(residuals);
}

double lmeds_cutoff(double median_sq, std::size_t n) {
  const double correction =
      1.0 + 5.0 / static_cast<double>(std::max<std::size_t>(1, n - 8));
  return 2.5 * 1.4826 * correction * std::sqrt(median_sq);
}

// Threshold-rule finalization shared by RANSAC and MSAC: refit by 8-point
// on the winning inliers and rebuild the mask under the refit model,
// falling back to the sample model when the refit loses support.
struct ThresholdFit {
  FundamentalMatrix f;
  std::vector<bool> mask;
  std::vector<double> residuals;
};

ThresholdFit finalize_threshold(const FundamentalMatrix& best,
                                std::span<const Correspondence> corrs,
                                double threshold) {
  ThresholdFit fit{best, {}, residuals_of(best.m, corrs)};
  fit.mask = mask_within(fit.residuals, threshold);
  const std::vector<Correspondence> inliers = gather(corrs, fit.mask);
  if (inliers.size() >= 8) {
    try {
      const FundamentalMatrix refit = solve_eight_point(inliers);
      std::vector<double> res = residuals_of(refit.m, corrs);
      std::vector<bool> mask = mask_within(res, threshold);
      if (count_within(res, threshold) >= 8)
        fit = {refit, std::move(mask), std::move(res)};
    } catch (const Error&) {
      // keep the sample model
    }
  }
  return fit;
}

EstimationResult run_sampling_loop(std::span<const Correspondence> corrs,
                                   const EstimatorConfig& cfg, bool msac) {
  validate(corrs, cfg);
  const std::size_t n = corrs.size();
  const double threshold = cfg.inlier_threshold;
  Rng rng(cfg.seed);

  bool found = false;
  FundamentalMatrix best_f;
  int best_count = -1;
  double best_score = std::numeric_limits<double>::infinity();
  int dynamic_cap = cfg.max_iterations;
  int iter = 0;

  std::array<std::size_t, 8> picks{};
  std::vector<Correspondence> subset(8);
  while (iter < dynamic_cap) {
    ++iter;
    sample_distinct(rng, n, picks);
    for (int j = 0; j < 8; ++j) subset[j] = corrs[picks[j]];

    FundamentalMatrix f;
    try {
      f = solve_eight_point(subset);
    } catch (const Error&) {
      continue;
    }
    const std::vector<double> res = residuals_of(f.m, corrs);
    const int count = count_within(res, threshold);
    const double score =
        msac ? msac_score(res, threshold) : static_cast<double>(count);
    const bool better = msac ? score < best_score : count > best_count;
    if (better) {
      found = true;
      best_f = f;
      best_count = count;
      best_score = score;
      dynamic_cap = std::min(
          cfg.max_iterations,
          adaptive_iterations(cfg.confidence,
                              static_cast<double>(count) /
                                  static_cast<double>(n),
                              8, cfg.max_iterations));
    }
  }
  if (!found || best_count < 8)
    fail(Errc::EstimationFailed,
         "estimator: no model with at least 8 supporting inliers");

  const ThresholdFit fit = finalize_threshold(best_f, corrs, threshold);
  EstimationResult out;
  out.f = fit.f;
  out.inlier_mask = fit.mask;
  out.iterations_used = iter;
  out.score = msac ? msac_score(fit.residuals, threshold)
                   : static_cast<double>(count_within(fit.residuals,
                                                      threshold));
  out.inlier_cutoff = threshold;
  return out;
}

}  // namespace

EstimationResult estimate_ransac(std::span<const Correspondence> corrs,
                                 const EstimatorConfig& cfg) {
  return run_sampling_loop(corrs, cfg, /*msac=*/false);
}

EstimationResult estimate_msac(std::span<const Correspondence> corrs,
                               const EstimatorConfig& cfg) {
  return run_sampling_loop(corrs, cfg, /*msac=*/true);
}

EstimationResult estimate_lmeds(std::span<const Correspondence> corrs,
                                const EstimatorConfig& cfg) {
  validate(corrs, cfg);
  const std::size_t n = corrs.size();
  Rng rng(cfg.seed);

  // Classical sample count: enough draws for one outlier-free sample with
  // the configured confidence at the 50% breakdown design point.
  const int samples = std::min(
      cfg.max_iterations,
      ransac_required_iterations(cfg.confidence, 0.5, 8, cfg.max_iterations));

  bool found = false;
  FundamentalMatrix best_f;
  double best_median = std::numeric_limits<double>::infinity();

  std::array<std::size_t, 8> picks{};
  std::vector<Correspondence> subset(8);
  for (int iter = 0; iter < samples; ++iter) {
    sample_distinct(rng, n, picks);
    for (int j = 0; j < 8; ++j) subset[j] = corrs[picks[j]];
    FundamentalMatrix f;
    try {
      f = solve_eight_point(subset);
    } catch (const Error&) {
      continue;
    }
    const double med = median_squared(residuals_of(f.m, corrs));
    if (med < best_median) {
      best_median = med;
      best_f = f;
      found = true;
    }
  }
  if (!found)
    fail(Errc::EstimationFailed, "lmeds: every sample was degenerate");

  // Robust-scale mask, one refit, then the mask rebuilt under the refit.
  std::vector<double> res = residuals_of(best_f.m, corrs);
  double median_sq = median_squared(res);
  double cutoff = lmeds_cutoff(median_sq, n);
  std::vector<bool> mask = mask_within(res, cutoff);

  const std::vector<Correspondence> inliers = gather(corrs, mask);
  if (inliers.size() >= 8) {
    try {
      const FundamentalMatrix refit = solve_eight_point(inliers);
      std::vector<double> res2 = residuals_of(refit.m, corrs);
      const double median2 = median_squared(res2);
      const double cutoff2 = lmeds_cutoff(median2, n);
      std::vector<bool> mask2 = mask_within(res2, cutoff2);
      if (count_within(res2, cutoff2) >= 8) {
        best_f = refit;
        median_sq = median2;
        cutoff = cutoff2;
        mask = std::move(mask2);
      }
    } catch (const Error&) {
    }
  }
  if (std::count(mask.begin(), mask.end(), true) < 8)
    fail(Errc::EstimationFailed, "lmeds: fewer than 8 inliers at 2.5 sigma");

  EstimationResult out;
  out.f = best_f;
  out.inlier_mask = mask;
  out.iterations_used = samples;
  out.score = median_sq;
  out.inlier_cutoff = cutoff;
  return out;
}

namespace {

std::vector<std::size_t> ratio_order(std::span<const Correspondence> corrs) {
  std::vector<std::size_t> order(corrs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& ra = corrs[a].nn_ratio;
                     const auto& rb = corrs[b].nn_ratio;
                     if (ra && rb) return *ra < *rb;
                     return ra.has_value() && !rb.has_value();
                   });
  return order;
}

/// PROSAC growth ladder: T'[p] is the first iteration allowed to sample
/// from the top-p pool (Chum & Matas schedule with the iteration cap as
/// the growth budget).
std::vector<double> prosac_ladder(std::size_t n, int m, int budget) {
  std::vector<double> tprime(n + 1, 1.0);
  double tn = static_cast<double>(budget);
  for (int i = 0; i < m; ++i)
    tn *= static_cast<double>(m - i) / static_cast<double>(n - i);
  double tcur = tn;
  for (std::size_t p = static_cast<std::size_t>(m); p < n; ++p) {
    const double tnext =
        tcur * static_cast<double>(p + 1) / static_cast<double>(p + 1 - m);
    tprime[p + 1] = tprime[p] + std::ceil(tnext - tcur);
    tcur = tnext;
  }
  return tprime;
}

}  // namespace

EstimationResult estimate_coarse_to_fine(std::span<const Correspondence> corrs,
                                         const EstimatorConfig& cfg) {
  validate(corrs, cfg);
  const std::size_t n = corrs.size();
  const double threshold = cfg.inlier_threshold;
  constexpr int kSample = 7;
  Rng rng(Rng::derive(cfg.seed, kCoarseStream));

  const bool have_ratios =
      std::any_of(corrs.begin(), corrs.end(),
                  [](const Correspondence& c) { return c.nn_ratio.has_value(); });
  std::vector<std::size_t> order;
  std::vector<double> ladder;
  std::size_t pool = n;
  if (have_ratios) {
    order = ratio_order(corrs);
    ladder = prosac_ladder(n, kSample, cfg.max_iterations);
    pool = kSample;
  }

  bool found = false;
  Mat3 best_f{};
  double best_score = std::numeric_limits<double>::infinity();
  int dynamic_cap = cfg.max_iterations;
  int iter = 0;

  std::array<std::size_t, kSample> picks{};
  std::vector<Correspondence> subset(kSample);
  while (iter < dynamic_cap) {
    ++iter;
    bool grew = false;
    if (have_ratios) {
      while (pool < n && static_cast<double>(iter) >= ladder[pool + 1]) {
        ++pool;
        grew = true;
      }
    }
    if (grew) {
      // Progressive step: force the newest pool member into the sample.
      sample_distinct(rng, pool - 1, std::span(picks.data(), kSample - 1));
      picks[kSample - 1] = pool - 1;
    } else {
      sample_distinct(rng, pool, picks);
    }
    for (int j = 0; j < kSample; ++j)
      subset[j] = have_ratios ? corrs[order[picks[j]]] : corrs[picks[j]];

    std::vector<FundamentalMatrix> roots;
    try {
      roots = solve_seven_point(subset);
    } catch (const Error&) {
      continue;
    }
    Mat3 sample_f{};
    double sample_score = std::numeric_limits<double>::infinity();
    for (const FundamentalMatrix& f : roots) {
      const double s = msac_score(residuals_of(f.m, corrs), threshold);
      if (s < sample_score) {
        sample_score = s;
        sample_f = f.m;
      }
    }
    if (!(sample_score < best_score)) continue;

    // Local optimization: refit by 8-point on the current inlier set,
    // accepting rounds while the truncated loss improves.
    Mat3 cur_f = sample_f;
    double cur_score = sample_score;
    for (int round = 0; round < kLocalOptRounds; ++round) {
      const std::vector<double> res = residuals_of(cur_f, corrs);
      const std::vector<Correspondence> inl =
          gather(corrs, mask_within(res, threshold));
      if (inl.size() < 8) break;
      FundamentalMatrix refit;
      try {
        refit = solve_eight_point(inl);
      } catch (const Error&) {
        break;
      }
      const double s = msac_score(residuals_of(refit.m, corrs), threshold);
      if (s < cur_score) {
        cur_f = refit.m;
        cur_score = s;
      } else {
        break;
      }
    }
    if (cur_score < best_score) {
      best_score = cur_score;
      best_f = cur_f;
      found = true;
      const int count = count_within(residuals_of(cur_f, corrs), threshold);
      dynamic_cap = std::min(
          cfg.max_iterations,
          adaptive_iterations(cfg.confidence,
                              static_cast<double>(count) /
                                  static_cast<double>(n),
                              kSample, cfg.max_iterations));
    }
  }

  StageDiagnostics diag;
  diag.coarse_iterations = iter;
  diag.input_count = n;
  if (!found)
    fail(Errc::EstimationFailed, "coarse stage: no usable minimal sample");

  diag.survivor_mask = mask_within(residuals_of(best_f, corrs), threshold);
  diag.survivor_count = static_cast<std::size_t>(
      std::count(diag.survivor_mask.begin(), diag.survivor_mask.end(), true));
  diag.coarse_inlier_rate = static_cast<double>(diag.survivor_count) /
                            static_cast<double>(diag.input_count);
  if (diag.survivor_count < 8)
    fail(Errc::EstimationFailed,
         "coarse stage pruned to " + std::to_string(diag.survivor_count) +
             " of " + std::to_string(n) + " correspondences");

  const std::vector<Correspondence> survivors =
      gather(corrs, diag.survivor_mask);
  EstimatorConfig fine = cfg;
  fine.kind = EstimatorKind::LMedS;
  fine.seed = Rng::derive(cfg.seed, kFineStream);
  EstimationResult fine_result = estimate_lmeds(survivors, fine);

  EstimationResult out;
  out.f = fine_result.f;
  out.inlier_mask.assign(n, false);
  std::size_t s = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diag.survivor_mask[i]) out.inlier_mask[i] = fine_result.inlier_mask[s++];
  out.iterations_used = fine_result.iterations_used;
  out.score = fine_result.score;
  out.inlier_cutoff = fine_result.inlier_cutoff;
  out.stage_diagnostics = std::move(diag);
  return out;
}

EstimationResult estimate(std::span<const Correspondence> corrs,
                          const EstimatorConfig& cfg) {
  switch (cfg.kind) {
    case EstimatorKind::Ransac:
      return estimate_ransac(corrs, cfg);
    case EstimatorKind::Msac:
      return estimate_msac(corrs, cfg);
    case EstimatorKind::LMedS:
      return estimate_lmeds(corrs, cfg);
    case EstimatorKind::CoarseToFine:
      return estimate_coarse_to_fine(corrs, cfg);
  }
  fail(Errc::InvalidInput, "estimate: unknown estimator kind");
}

std::vector<Correspondence> sort_by_ratio(
    std::span<const Correspondence> corrs) {
  const std::vector<std::size_t> order = ratio_order(corrs);
  std::vector<Correspondence> out;
  out.reserve(corrs.size());
  for (std::size_t idx : order) out.push_back(corrs[idx]);
  return out;
}

double truncated_quadratic_loss(std::span<const double> residuals,
                                double threshold) {
  const double t2 = threshold * threshold;
  double s = 0.0;
  for (double r : residuals) s += std::min(r * r, t2);
  return s;
}

double median_squared_residual(std::span<const double> residuals) {
  if (residuals.empty())
    fail(Errc::InvalidInput, "median_squared_residual: empty input");
  std::vector<double> sq(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i)
    sq[i] = residuals[i] * residuals[i];
  const std::size_t k = sq.size() / 2;
  std::nth_element(sq.begin(), sq.begin() + static_cast<long>(k), sq.end());
  return sq[k];
}

int ransac_required_iterations(double confidence, double inlier_fraction,
                               int sample_size, int cap) {
  if (inlier_fraction <= 0.0) return cap;
  const double wk = std::pow(std::min(inlier_fraction, 1.0), sample_size);
  if (wk >= 1.0) return 1;
  const double denom = std::log1p(-wk);
  if (denom >= 0.0) return cap;
  const double needed = std::log(1.0 - confidence) / denom;
  if (!(needed < static_cast<double>(cap))) return cap;
  return std::max(1, static_cast<int>(std::ceil(needed)));
}

}  // namespace twoview
