#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twoview/rng.hpp"

namespace twoview::oracles {

namespace {

struct Chord {
  double x0, y0, x1, y1;
  bool valid = false;
};

// Clip an infinite line a*x + b*y + c = 0 against [0,w] x [0,h] by
// intersecting all four rectangle edges.
Chord clip_by_edges(double a, double b, double c, double w, double h) {
  std::vector<std::pair<double, double>> pts;
  const auto push = [&](double x, double y) {
    if (x < -1e-9 || x > w + 1e-9 || y < -1e-9 || y > h + 1e-9) return;
    for (const auto& p : pts)
      if (std::abs(p.first - x) < 1e-9 && std::abs(p.second - y) < 1e-9)
        return;
    pts.emplace_back(x, y);
  };
  if (std::abs(b) > 1e-15) {
    push(0.0, -c / b);
    push(w, -(c + a * w) / b);
  }
  if (std::abs(a) > 1e-15) {
    push(-c / a, 0.0);
    push(-(c + b * h) / a, h);
  }
  if (pts.size() < 2) return {};
  // Extremes along the line direction (-b, a).
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  std::pair<double, double> lo{}, hi{};
  for (const auto& p : pts) {
    const double t = -b * p.first + a * p.second;
    if (t < tmin) {
      tmin = t;
      lo = p;
    }
    if (t > tmax) {
      tmax = t;
      hi = p;
    }
  }
  return {lo.first, lo.second, hi.first, hi.second, true};
}

double line_distance(const Mat3& m, double u, double v, double pu,
                     double pv) {
  const double a = m[0] * u + m[1] * v + m[2];
  const double b = m[3] * u + m[4] * v + m[5];
  const double c = m[6] * u + m[7] * v + m[8];
  const double n = std::hypot(a, b);
  if (n < 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(a * pu + b * pv + c) / n;
}

double half_mean(const Mat3& gen, const Mat3& meas, const ImageDims& src,
                 const ImageDims& dst, int grid_u, int grid_v,
                 int chord_samples) {
  const double w = static_cast<double>(src.w);
  const double h = static_cast<double>(src.h);
  const Mat3 meas_t = mat3_transpose(meas);
  double sum = 0.0;
  long terms = 0;
  for (int iu = 0; iu < grid_u; ++iu) {
    const double u = (iu + 0.5) * w / grid_u;
    for (int iv = 0; iv < grid_v; ++iv) {
      const double v = (iv + 0.5) * h / grid_v;
      const double a = gen[0] * u + gen[1] * v + gen[2];
      const double b = gen[3] * u + gen[4] * v + gen[5];
      const double c = gen[6] * u + gen[7] * v + gen[8];
      if (std::hypot(a, b) < 1e-12) continue;
      const Chord chord =
          clip_by_edges(a, b, c, static_cast<double>(dst.w),
                        static_cast<double>(dst.h));
      if (!chord.valid) continue;
      for (int k = 0; k < chord_samples; ++k) {
        const double t = (k + 0.5) / chord_samples;
        const double pu = chord.x0 + t * (chord.x1 - chord.x0);
        const double pv = chord.y0 + t * (chord.y1 - chord.y0);
        const double dprime = line_distance(meas, u, v, pu, pv);
        const double d = line_distance(meas_t, pu, pv, u, v);
        if (std::isnan(dprime) || std::isnan(d)) continue;
        sum += dprime + d;
        ++terms;
      }
    }
  }
  return terms > 0 ? sum / static_cast<double>(terms) : 0.0;
}

}  // namespace

double sgd_dense_grid(const FundamentalMatrix& f1, const FundamentalMatrix& f2,
                      const ImageDims& dims1, const ImageDims& dims2,
                      int grid_u, int grid_v, int chord_samples) {
  const double first =
      half_mean(f1.m, f2.m, dims1, dims2, grid_u, grid_v, chord_samples);
  const double second =
      half_mean(mat3_transpose(f2.m), mat3_transpose(f1.m), dims2, dims1,
                grid_u, grid_v, chord_samples);
  return (first + second) / 4.0;
}

MatchSet nn_exhaustive(std::span<const Keypoint> k1,
                       std::span<const Keypoint> k2) {
  MatchSet out;
  out.keypoints1 = k1.size();
  out.keypoints2 = k2.size();
  for (const Keypoint& q : k1) {
    std::size_t best_idx = 0;
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k2.size(); ++j) {
      double d = 0.0;
      for (std::size_t t = 0; t < q.descriptor.size(); ++t) {
        const double diff = static_cast<double>(q.descriptor[t]) -
                            static_cast<double>(k2[j].descriptor[t]);
        d += diff * diff;
      }
      if (d < best) {
        second = best;
        best = d;
        best_idx = j;
      } else if (d < second) {
        second = d;
      }
    }
    double ratio = second > 0.0 ? std::sqrt(best / second) : 1.0;
    if (ratio <= 0.0) ratio = std::numeric_limits<double>::min();
    out.correspondences.push_back(
        {q.location, k2[best_idx].location, std::min(ratio, 1.0)});
  }
  return out;
}

std::vector<PairId> select_pairs_brute_force(std::span<const PoseRecord> poses,
                                             const CameraIntrinsics& k,
                                             const MatchProvider& provider,
                                             const PairSelectionConfig& cfg) {
  std::vector<PairId> kept;
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      if (cfg.short_baseline &&
          std::abs(poses[j].time - poses[i].time) > cfg.max_time_gap)
        continue;
      const std::optional<MatchSet> ms = provider(i, j);
      if (!ms) continue;
      FundamentalMatrix f;
      try {
        f = fm_from_projections(pose_projection(poses[i], k),
                                pose_projection(poses[j], k));
      } catch (const Error&) {
        continue;
      }
      int count = 0;
      for (const Correspondence& c : ms->correspondences) {
        const EpipolarDistances d = epipolar_distances_unchecked(f.m, c);
        if (std::max(d.d1, d.d2) <= cfg.inlier_px) ++count;
      }
      if (count > cfg.min_inliers) kept.push_back({i, j});
    }
  }
  if (kept.size() <= static_cast<std::size_t>(cfg.sample_count)) return kept;
  Rng rng(cfg.seed);
  for (int s = 0; s < cfg.sample_count; ++s) {
    const std::size_t pick =
        s + rng.uniform_index(kept.size() - static_cast<std::size_t>(s));
    std::swap(kept[s], kept[pick]);
  }
  kept.resize(static_cast<std::size_t>(cfg.sample_count));
  std::sort(kept.begin(), kept.end(), [](const PairId& a, const PairId& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return kept;
}

}  // namespace twoview::oracles
