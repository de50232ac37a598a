#ifndef TWOVIEW_METRICS_HPP_
#define TWOVIEW_METRICS_HPP_

#include <cstdint>
#include <span>

#include "twoview/geometry.hpp"
#include "twoview/matching.hpp"

namespace twoview {

struct SgdConfig {
  int n_samples = 1000;  // accepted samples per half
  std::uint64_t seed = 0;
  ImageDims dims1{480, 640};
  ImageDims dims2{480, 640};
};

/// Symmetric geometry distance between two fundamental matrices, in
/// pixels. Virtual correspondences are generated from f1 over image 1 and
/// scored against f2's epipolar lines in both images; roles (images and
/// matrices) are then swapped and the four distance sums averaged over
/// 4N. Deterministic given the seed; both halves derive the same
/// sub-stream, so compute_sgd(a, b, cfg) equals
/// compute_sgd(b^T, a^T, swapped dims) exactly.
/// Raises NonOverlappingGeometry when epipolar lines miss the other image
/// for 100*N consecutive draws.
double compute_sgd(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                   const SgdConfig& cfg);

/// Same sampling as compute_sgd but every distance term is scaled by the
/// diagonal factor of the image it is measured in before averaging;
/// clamped to [0, 1]. This is the resolution-comparable form used for
/// %Recall.
double compute_nsgd(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                    const SgdConfig& cfg);

/// Scalar normalization of an SGD value. Exact (sgd / diagonal) for equal
/// resolutions; for mixed resolutions it applies the mean of the two
/// diagonal factors -- compute_nsgd is the per-term-correct variant.
double nsgd(double sgd_px, const ImageDims& dims1, const ImageDims& dims2);

/// Percentage of values strictly below the threshold. Failed estimations
/// are expected to be encoded as 1.0 by the caller.
double recall(std::span<const double> nsgd_values, double threshold = 0.05);

/// Percentage of matches within alpha * diagonal of the ground-truth
/// epipolar line in both images (per-image thresholds, strict less-than).
double inlier_rate(std::span<const Correspondence> corrs,
                   const FundamentalMatrix& f_gt, const ImageDims& dims1,
                   const ImageDims& dims2, double alpha = 0.003);

struct MetricReport {
  double nsgd = 0.0;
  double inlier_rate_post = 0.0;  // %Inlier
  double inlier_rate_pre = 0.0;   // %Inlier-m
  std::size_t corrs_post = 0;     // #Corrs
  std::size_t corrs_pre = 0;      // #Corrs-m
};

/// Per-pair metrics: ms_pre holds the matches fed to the estimator,
/// ms_post the matches surviving it.
MetricReport pair_report(const MatchSet& ms_pre, const MatchSet& ms_post,
                         const FundamentalMatrix& f_est,
                         const FundamentalMatrix& f_gt, const SgdConfig& cfg);

}  // namespace twoview

#endif  // TWOVIEW_METRICS_HPP_
