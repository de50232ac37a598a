#include "twoview/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "twoview/rng.hpp"

namespace twoview {

namespace {

constexpr std::uint64_t kSgdStream = 0x5d6f2a31u;
constexpr double kLineEps = 1e-12;

struct Segment {
  double x0, y0, x1, y1;
  bool valid = false;
};

// Chord of a normalized infinite line inside [0, w] x [0, h].
Segment clip_line(const Line2& l, const ImageDims& dims) {
  const double w = static_cast<double>(dims.w);
  const double h = static_cast<double>(dims.h);
  // Anchor at the point closest to the origin, direction along the line.
  const double px = -l[2] * l[0];
  const double py = -l[2] * l[1];
  const double dx = -l[1];
  const double dy = l[0];

  double tlo = -std::numeric_limits<double>::infinity();
  double thi = std::numeric_limits<double>::infinity();
  const auto narrow = [&](double p, double d, double lo, double hi) {
    if (std::abs(d) < kLineEps) return p >= lo && p <= hi;
    double a = (lo - p) / d;
    double b = (hi - p) / d;
    if (a > b) std::swap(a, b);
    tlo = std::max(tlo, a);
    thi = std::min(thi, b);
    return true;
  };
  if (!narrow(px, dx, 0.0, w) || !narrow(py, dy, 0.0, h)) return {};
  if (tlo > thi || !std::isfinite(tlo) || !std::isfinite(thi)) return {};
  return {px + tlo * dx, py + tlo * dy, px + thi * dx, py + thi * dy, true};
}

struct HalfSums {
  double src = 0.0;  // distance terms measured in the sampled image
  double dst = 0.0;  // distance terms measured in the other image
};

// One direction of the SGD loop: `gen` and `meas` both map points of the
// source image to lines of the destination image.
HalfSums sgd_half(const Mat3& gen, const Mat3& meas, const ImageDims& src,
                  const ImageDims& dst, int n, std::uint64_t seed) {
  Rng rng(seed);
  HalfSums sums;
  const long budget = 100L * n;
  long rejections = 0;
  int count = 0;
  const Mat3 meas_t = mat3_transpose(meas);

  while (count < n) {
    const double u = rng.uniform(0.0, static_cast<double>(src.w));
    const double v = rng.uniform(0.0, static_cast<double>(src.h));

    const auto reject = [&]() {
      if (++rejections > budget)
        fail(Errc::NonOverlappingGeometry,
             "compute_sgd: epipolar lines do not intersect the other image");
    };

    const Vec3 g = mat3_mul_vec(gen, {u, v, 1.0});
    const double gn = std::hypot(g[0], g[1]);
    if (gn < kLineEps) {
      reject();
      continue;
    }
    const Line2 l1{g[0] / gn, g[1] / gn, g[2] / gn};
    const Segment seg = clip_line(l1, dst);
    if (!seg.valid) {
      reject();
      continue;
    }
    const double s = rng.uniform();
    const Point2 mp{seg.x0 + s * (seg.x1 - seg.x0),
                    seg.y0 + s * (seg.y1 - seg.y0)};

    const Vec3 l2 = mat3_mul_vec(meas, {u, v, 1.0});
    const double n2 = std::hypot(l2[0], l2[1]);
    const Vec3 l3 = mat3_mul_vec(meas_t, {mp.u, mp.v, 1.0});
    const double n3 = std::hypot(l3[0], l3[1]);
    if (n2 < kLineEps || n3 < kLineEps) {
      reject();
      continue;
    }
    sums.dst += std::abs(l2[0] * mp.u + l2[1] * mp.v + l2[2]) / n2;
    sums.src += std::abs(l3[0] * u + l3[1] * v + l3[2]) / n3;
    ++count;
  }
  return sums;
}

struct SgdSums {
  HalfSums a;  // sampled in image 1, generated from f1
  HalfSums b;  // sampled in image 2, generated from f2
};

SgdSums sgd_sums(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                 const SgdConfig& cfg) {
  if (cfg.n_samples < 1)
    fail(Errc::InvalidInput, "compute_sgd: n_samples must be >= 1");
  if (cfg.dims1.h <= 0 || cfg.dims1.w <= 0 || cfg.dims2.h <= 0 ||
      cfg.dims2.w <= 0)
    fail(Errc::InvalidInput, "compute_sgd: invalid image dimensions");

  // Both halves draw from the same derived stream; that makes the
  // construction exactly symmetric under swapping (f1, f2) with their
  // transposes and the two images.
  const std::uint64_t sub = Rng::derive(cfg.seed, kSgdStream);
  SgdSums out;
  out.a = sgd_half(f1.m, f2.m, cfg.dims1, cfg.dims2, cfg.n_samples, sub);
  out.b = sgd_half(mat3_transpose(f2.m), mat3_transpose(f1.m), cfg.dims2,
                   cfg.dims1, cfg.n_samples, sub);
  return out;
}

}  // namespace

double compute_sgd(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                   const SgdConfig& cfg) {
  // Identical matrices: every virtual correspondence lies on its own
  // epipolar line, so all distances vanish identically.
  if (f1 == f2) return 0.0;
  const SgdSums s = sgd_sums(f1, f2, cfg);
  const double total = (s.a.src + s.a.dst) + (s.b.src + s.b.dst);
  return total / (4.0 * cfg.n_samples);
}

double compute_nsgd(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                    const SgdConfig& cfg) {
  if (f1 == f2) return 0.0;
  const SgdSums s = sgd_sums(f1, f2, cfg);
  const double factor1 = cfg.dims1.diagonal_factor();
  const double factor2 = cfg.dims2.diagonal_factor();
  const double total =
      factor1 * (s.a.src + s.b.dst) + factor2 * (s.a.dst + s.b.src);
  return std::clamp(total / (4.0 * cfg.n_samples), 0.0, 1.0);
}

double nsgd(double sgd_px, const ImageDims& dims1, const ImageDims& dims2) {
  if (sgd_px < 0.0) fail(Errc::InvalidInput, "nsgd: negative SGD");
  double value;
  if (dims1 == dims2) {
    value = sgd_px / dims1.diagonal();
  } else {
    value =
        sgd_px * 0.5 * (dims1.diagonal_factor() + dims2.diagonal_factor());
  }
  return std::clamp(value, 0.0, 1.0);
}

double recall(std::span<const double> nsgd_values, double threshold) {
  if (nsgd_values.empty()) fail(Errc::InvalidInput, "recall: empty list");
  std::size_t accurate = 0;
  for (double v : nsgd_values)
    if (v < threshold) ++accurate;
  return 100.0 * static_cast<double>(accurate) /
         static_cast<double>(nsgd_values.size());
}

double inlier_rate(std::span<const Correspondence> corrs,
                   const FundamentalMatrix& f_gt, const ImageDims& dims1,
                   const ImageDims& dims2, double alpha) {
  if (corrs.empty()) fail(Errc::InvalidInput, "inlier_rate: empty matches");
  const double t1 = alpha * dims1.diagonal();
  const double t2 = alpha * dims2.diagonal();
  std::size_t inliers = 0;
  for (const Correspondence& c : corrs) {
    const EpipolarDistances d = epipolar_distances_unchecked(f_gt.m, c);
    if (d.d1 < t1 && d.d2 < t2) ++inliers;
  }
  return 100.0 * static_cast<double>(inliers) /
         static_cast<double>(corrs.size());
}

MetricReport pair_report(const MatchSet& ms_pre, const MatchSet& ms_post,
                         const FundamentalMatrix& f_est,
                         const FundamentalMatrix& f_gt, const SgdConfig& cfg) {
  MetricReport report;
  report.corrs_pre = ms_pre.correspondences.size();
  report.corrs_post = ms_post.correspondences.size();
  report.nsgd = compute_nsgd(f_gt, f_est, cfg);
  if (report.corrs_pre > 0)
    report.inlier_rate_pre =
        inlier_rate(ms_pre.correspondences, f_gt, cfg.dims1, cfg.dims2);
  if (report.corrs_post > 0)
    report.inlier_rate_post =
        inlier_rate(ms_post.correspondences, f_gt, cfg.dims1, cfg.dims2);
  return report;
}

}  // namespace twoview
