#ifndef TWOVIEW_ROBUST_HPP_
#define TWOVIEW_ROBUST_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twoview/geometry.hpp"

namespace twoview {

enum class EstimatorKind { Ransac, Msac, LMedS, CoarseToFine };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::Ransac;
  int max_iterations = 2000;
  double confidence = 0.99;
  double inlier_threshold = 1.0;  // px, symmetric epipolar distance
  std::uint64_t seed = 0;
};

/// Coarse-stage summary of the coarse-to-fine estimator.
struct StageDiagnostics {
  int coarse_iterations = 0;
  std::size_t input_count = 0;
  std::size_t survivor_count = 0;
  double coarse_inlier_rate = 0.0;  // survivors / input
  std::vector<bool> survivor_mask;
};

/// Estimate plus its support. inlier_cutoff is the residual bound the
/// mask was built with: the configured threshold for RANSAC/MSAC, the
/// 2.5-sigma robust cutoff for LMedS (and the coarse-to-fine fine stage,
/// whose mask covers stage-1 survivors only).
struct EstimationResult {
  FundamentalMatrix f;
  std::vector<bool> inlier_mask;
  int iterations_used = 0;
  double score = 0.0;
  double inlier_cutoff = 0.0;
  std::optional<StageDiagnostics> stage_diagnostics;
};

/// Classic RANSAC with the 8-point solver: maximizes the inlier count,
/// adapts the iteration budget from the best support, refits on the
/// winning inliers. Deterministic given cfg.seed.
EstimationResult estimate_ransac(std::span<const Correspondence> corrs,
                                 const EstimatorConfig& cfg);

/// MSAC: same loop scored by the truncated quadratic loss
/// sum(min(r^2, T^2)).
EstimationResult estimate_msac(std::span<const Correspondence> corrs,
                               const EstimatorConfig& cfg);

/// Least-median-of-squares: minimizes the median squared residual over
/// the classical sample count (confidence at the 50% breakdown design
/// point, capped by max_iterations); the inlier mask uses the robust
/// scale 1.4826 (1 + 5/(n-8)) sqrt(median) with a 2.5-sigma cutoff.
EstimationResult estimate_lmeds(std::span<const Correspondence> corrs,
                                const EstimatorConfig& cfg);

/// Coarse-to-fine estimator: stage 1 prunes outliers with a locally
/// optimized, ratio-ordered (PROSAC-style) MSAC over 7-point samples;
/// stage 2 runs LMedS on the survivors. stage_diagnostics reports the
/// pruning outcome.
EstimationResult estimate_coarse_to_fine(std::span<const Correspondence> corrs,
                                         const EstimatorConfig& cfg);

/// Dispatch on cfg.kind.
EstimationResult estimate(std::span<const Correspondence> corrs,
                          const EstimatorConfig& cfg);

/// Stable ascending sort by nn_ratio; correspondences without a ratio
/// keep their relative order at the end.
std::vector<Correspondence> sort_by_ratio(
    std::span<const Correspondence> corrs);

/// MSAC sample score: sum of min(r^2, threshold^2).
double truncated_quadratic_loss(std::span<const double> residuals,
                                double threshold);

/// LMedS sample score: median of squared residuals (upper median on even
/// counts).
double median_squared_residual(std::span<const double> residuals);

/// Adaptive RANSAC termination: ceil(log(1-confidence) /
/// log(1 - inlier_fraction^sample_size)), capped.
int ransac_required_iterations(double confidence, double inlier_fraction,
                               int sample_size, int cap);

}  // namespace twoview

#endif  // TWOVIEW_ROBUST_HPP_
