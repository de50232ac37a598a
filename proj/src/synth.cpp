#include "twoview/synth.hpp"

#include <cmath>

#include "twoview/rng.hpp"

namespace twoview {

namespace {

constexpr double kDepthMin = 4.0;
constexpr double kDepthMax = 12.0;
constexpr double kDepthMid = 0.5 * (kDepthMin + kDepthMax);
constexpr int kAttemptBudget = 10000;

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

Mat3 axis_angle_rotation(const Vec3& axis_in, double angle) {
  const Vec3 axis = normalized(axis_in);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Mat3 k = cross_matrix(axis);
  const Mat3 k2 = mat3_mul(k, k);
  Mat3 r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int i = 0; i < 9; ++i) r[i] += s * k[i] + (1.0 - c) * k2[i];
  return r;
}

// World-to-camera rotation for a camera at `from` looking at `target`,
// +z forward, y roughly down-the-world-y.
Mat3 look_at_rotation(const Vec3& from, const Vec3& target) {
  const Vec3 fwd = normalized(
      {target[0] - from[0], target[1] - from[1], target[2] - from[2]});
  Vec3 up{0.0, 1.0, 0.0};
  Vec3 right = cross(up, fwd);
  const double rn = std::sqrt(right[0] * right[0] + right[1] * right[1] +
                              right[2] * right[2]);
  if (rn < 1e-9) right = {1.0, 0.0, 0.0};
  right = normalized(right);
  up = cross(fwd, right);
  return {right[0], right[1], right[2], up[0], up[1],
          up[2],    fwd[0],   fwd[1],   fwd[2]};
}

struct Pose {
  Mat3 r;  // world-to-camera
  Vec3 t;
};

Vec3 pose_translation(const Mat3& r, const Vec3& center) {
  const Vec3 rc = mat3_mul_vec(r, center);
  return {-rc[0], -rc[1], -rc[2]};
}

Pose sample_rig(RigKind rig, Rng& rng) {
  switch (rig) {
    case RigKind::ShortBaselineForward: {
      const double b = rng.uniform(0.3, 0.7);
      const Vec3 center{b * rng.uniform(-0.1, 0.1),
                        b * rng.uniform(-0.1, 0.1), b};
      // Small attitude jitter; re-drawn until the forward-dominance
      // constraint |t_z| >= 5 max(|t_x|, |t_y|) holds.
      for (;;) {
        const Vec3 axis{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        rng.uniform(-1.0, 1.0)};
        const Mat3 r = axis_angle_rotation(axis, rng.uniform(0.0, 0.035));
        const Vec3 t = pose_translation(r, center);
        if (std::abs(t[2]) >= 5.0 * std::max(std::abs(t[0]), std::abs(t[1])))
          return {r, t};
      }
    }
    case RigKind::WideBaseline: {
      const double angle =
          rng.uniform(0.26, 0.61) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      const Vec3 pivot{0.0, 0.0, kDepthMid};
      const Vec3 center{-kDepthMid * std::sin(angle),
                        rng.uniform(-1.0, 1.0),
                        kDepthMid * (1.0 - std::cos(angle))};
      const Mat3 r = look_at_rotation(center, pivot);
      return {r, pose_translation(r, center)};
    }
    case RigKind::Random:
    default: {
      const Vec3 dir = normalized({rng.gaussian(), rng.gaussian(),
                                   rng.gaussian()});
      const double dist = rng.uniform(0.5, 2.0);
      const Vec3 center{dir[0] * dist, dir[1] * dist, dir[2] * dist};
      const Vec3 target{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        kDepthMid + rng.uniform(-1.0, 1.0)};
      const Mat3 r = look_at_rotation(center, target);
      return {r, pose_translation(r, center)};
    }
  }
}

bool inside(const Point2& p, const ImageDims& dims) {
  return p.u >= 0.0 && p.u < static_cast<double>(dims.w) && p.v >= 0.0 &&
         p.v < static_cast<double>(dims.h);
}

}  // namespace

SyntheticPair generate_pair(const SceneConfig& cfg) {
  if (cfg.n_points < 8)
    fail(Errc::InvalidInput, "generate_pair: need at least 8 points");
  if (!(cfg.outlier_rate >= 0.0 && cfg.outlier_rate < 1.0))
    fail(Errc::InvalidInput, "generate_pair: outlier_rate must be in [0, 1)");
  if (cfg.dims.h <= 0 || cfg.dims.w <= 0)
    fail(Errc::InvalidInput, "generate_pair: invalid image dimensions");
  const int n_outliers =
      static_cast<int>(std::floor(cfg.outlier_rate * cfg.n_points));
  if (cfg.n_points - n_outliers < 8)
    fail(Errc::InvalidInput,
         "generate_pair: config leaves fewer than 8 expected inliers");

  Rng rng(cfg.seed);
  const double w = static_cast<double>(cfg.dims.w);
  const double h = static_cast<double>(cfg.dims.h);

  CameraIntrinsics k;
  k.fx = k.fy = 0.8 * w;
  k.cx = 0.5 * w;
  k.cy = 0.5 * h;

  SyntheticPair pair;
  pair.dims1 = pair.dims2 = cfg.dims;
  pair.p1 = ProjectionMatrix::from_krt(k, {1, 0, 0, 0, 1, 0, 0, 0, 1},
                                       {0, 0, 0});
  const Pose pose2 = sample_rig(cfg.rig, rng);
  pair.p2 = ProjectionMatrix::from_krt(k, pose2.r, pose2.t);
  pair.f_gt = fm_from_projections(pair.p1, pair.p2);

  // Points through camera 1's pixels, kept only when camera 2 sees them.
  std::vector<Point2> proj1, proj2;
  int attempts = 0;
  while (static_cast<int>(proj1.size()) < cfg.n_points &&
         attempts < kAttemptBudget) {
    ++attempts;
    const double u = rng.uniform(0.02 * w, 0.98 * w);
    const double v = rng.uniform(0.02 * h, 0.98 * h);
    const double z = rng.uniform(kDepthMin, kDepthMax);
    const Vec3 x{z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z};

    const Vec3 xc2 = mat3_mul_vec(pose2.r, x);
    const double depth2 = xc2[2] + pose2.t[2];
    if (depth2 < 0.5) continue;
    Point2 p2;
    try {
      p2 = project(pair.p2, x);
    } catch (const Error&) {
      continue;
    }
    if (!inside(p2, cfg.dims)) continue;
    proj1.push_back({u, v});
    proj2.push_back(p2);
  }
  const int n = static_cast<int>(proj1.size());
  if (n < 8)
    fail(Errc::InfeasibleScene,
         "generate_pair: fewer than 8 mutually visible points");

  if (cfg.noise_sigma > 0.0) {
    for (int i = 0; i < n; ++i) {
      proj1[i].u += cfg.noise_sigma * rng.gaussian();
      proj1[i].v += cfg.noise_sigma * rng.gaussian();
      proj2[i].u += cfg.noise_sigma * rng.gaussian();
      proj2[i].v += cfg.noise_sigma * rng.gaussian();
    }
  }

  // Plant outliers on a seeded random subset: replace the image-2 point
  // with a uniform draw far enough from the true epipolar line.
  const int planted = static_cast<int>(std::floor(cfg.outlier_rate * n));
  std::vector<int> indices(n);
  for (int i = 0; i < n; ++i) indices[i] = i;
  for (int i = 0; i < planted; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n - i)));
    std::swap(indices[i], indices[j]);
  }
  std::vector<bool> is_outlier(n, false);
  const double floor_px = 10.0 * std::max(cfg.noise_sigma, 1.0);
  for (int oi = 0; oi < planted; ++oi) {
    const int i = indices[oi];
    is_outlier[i] = true;
    for (int tries = 0; tries < 1000; ++tries) {
      const Point2 candidate{rng.uniform(0.0, w), rng.uniform(0.0, h)};
      const EpipolarDistances d = epipolar_distances_unchecked(
          pair.f_gt.m, {proj1[i], candidate, std::nullopt});
      if (d.d2 >= floor_px) {
        proj2[i] = candidate;
        break;
      }
      if (tries == 999)
        fail(Errc::InfeasibleScene,
             "generate_pair: image too small to place outliers");
    }
  }

  pair.corrs.keypoints1 = pair.corrs.keypoints2 = static_cast<size_t>(n);
  pair.corrs.correspondences.reserve(n);
  pair.inlier_truth.resize(n);
  for (int i = 0; i < n; ++i) {
    pair.inlier_truth[i] = !is_outlier[i];
    const double ratio = is_outlier[i] ? rng.uniform(0.5, 1.0)
                                       : rng.uniform(0.2, 0.78);
    pair.corrs.correspondences.push_back({proj1[i], proj2[i], ratio});
  }
  return pair;
}

RigPoses rig_poses(const SyntheticPair& pair) {
  // Camera 1 is constructed as [K | 0], so K is its left 3x3 block.
  RigPoses out;
  out.k.fx = pair.p1.p[0];
  out.k.skew = pair.p1.p[1];
  out.k.cx = pair.p1.p[2];
  out.k.fy = pair.p1.p[5];
  out.k.cy = pair.p1.p[6];

  // [R|t] of camera 2 via K^-1 (upper triangular) times P2.
  Mat3 r{};
  Vec3 t{};
  for (int c = 0; c < 4; ++c) {
    const double row2 = pair.p2.p[8 + c];
    const double row1 = (pair.p2.p[4 + c] - out.k.cy * row2) / out.k.fy;
    const double row0 =
        (pair.p2.p[c] - out.k.skew * row1 - out.k.cx * row2) / out.k.fx;
    if (c < 3) {
      r[c] = row0;
      r[3 + c] = row1;
      r[6 + c] = row2;
    } else {
      t = {row0, row1, row2};
    }
  }

  out.pose1.time = 0.0;
  out.pose2.time = 0.5;
  // Camera-to-world: R_cw = R^T, center = -R^T t.
  out.pose2.rotation = mat3_transpose(r);
  const Vec3 rc = mat3_mul_vec(out.pose2.rotation, t);
  out.pose2.translation = {-rc[0], -rc[1], -rc[2]};
  out.pose1.quaternion = rotation_to_quaternion(out.pose1.rotation);
  out.pose2.quaternion = rotation_to_quaternion(out.pose2.rotation);
  return out;
}

PlantedKeypoints plant_descriptors(const SyntheticPair& pair,
                                   const PlantConfig& cfg) {
  if (cfg.dim < 2) fail(Errc::InvalidInput, "plant_descriptors: dim too small");
  Rng rng(cfg.seed);

  const auto random_unit = [&]() {
    std::vector<double> v(cfg.dim);
    double norm_sq = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm_sq += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
    return v;
  };
  const auto to_float = [](const std::vector<double>& v) {
    Descriptor d(v.size());
    for (size_t i = 0; i < v.size(); ++i) d[i] = static_cast<float>(v[i]);
    return d;
  };

  PlantedKeypoints out;
  const auto& corrs = pair.corrs.correspondences;
  out.image1.reserve(corrs.size());
  out.image2.reserve(corrs.size() + cfg.distractors);

  for (size_t i = 0; i < corrs.size(); ++i) {
    const std::vector<double> base = random_unit();
    out.image1.push_back({corrs[i].p1, to_float(base)});
    if (pair.inlier_truth[i]) {
      std::vector<double> noisy(base);
      if (cfg.perturbation > 0.0) {
        double norm_sq = 0.0;
        for (double& x : noisy) {
          x += cfg.perturbation * rng.gaussian();
          norm_sq += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : noisy) x *= inv;
      }
      out.image2.push_back({corrs[i].p2, to_float(noisy)});
    } else {
      out.image2.push_back({corrs[i].p2, to_float(random_unit())});
    }
  }
  for (int i = 0; i < cfg.distractors; ++i) {
    const Point2 loc{rng.uniform(0.0, static_cast<double>(pair.dims2.w)),
                     rng.uniform(0.0, static_cast<double>(pair.dims2.h))};
    out.image2.push_back({loc, to_float(random_unit())});
  }
  return out;
}

}  // namespace twoview
