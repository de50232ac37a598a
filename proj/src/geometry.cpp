#include "twoview/geometry.hpp"

#include <cmath>
#include <limits>

namespace twoview {

namespace {

constexpr double kEpipoleEps = 1e-12;
constexpr double kLineNormTol = 1e-9;
constexpr double kBaselineEps = 1e-9;
constexpr double kDepthEps = 1e-12;

}  // namespace

double ImageDims::diagonal() const {
  return std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
}

double ImageDims::diagonal_factor() const { return 1.0 / diagonal(); }

ProjectionMatrix ProjectionMatrix::from_krt(const CameraIntrinsics& k,
                                            const Mat3& r, const Vec3& t) {
  const Mat3 km = k.matrix();
  const Mat3 kr = mat3_mul(km, r);
  const Vec3 kt = mat3_mul_vec(km, t);
  ProjectionMatrix out;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) out.p[row * 4 + col] = kr[row * 3 + col];
    out.p[row * 4 + 3] = kt[row];
  }
  return out;
}

Mat ProjectionMatrix::as_mat() const {
  Mat m(3, 4);
  for (int i = 0; i < 12; ++i) m.data[i] = p[i];
  return m;
}

Vec3 ProjectionMatrix::center() const {
  const std::vector<double> c = right_null_vector(as_mat());
  if (std::abs(c[3]) < kDepthEps)
    fail(Errc::InvalidInput, "projection matrix has a center at infinity");
  return {c[0] / c[3], c[1] / c[3], c[2] / c[3]};
}

Line2 epipolar_line(const FundamentalMatrix& f, const Point2& m,
                    LineDirection direction) {
  const Mat3 mat =
      direction == LineDirection::Image1ToImage2 ? f.m : mat3_transpose(f.m);
  const Vec3 l = mat3_mul_vec(mat, {m.u, m.v, 1.0});
  const double norm3 = std::sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
  if (norm3 < kEpipoleEps)
    fail(Errc::EpipoleDegenerate, "epipolar_line: point maps to zero line");
  const double nab = std::hypot(l[0], l[1]);
  if (nab < kEpipoleEps)
    fail(Errc::EpipoleDegenerate, "epipolar_line: line at infinity");
  return {l[0] / nab, l[1] / nab, l[2] / nab};
}

double point_line_distance(const Point2& p, const Line2& line) {
  const double n = line[0] * line[0] + line[1] * line[1];
  if (std::abs(n - 1.0) > kLineNormTol)
    fail(Errc::InvalidInput, "point_line_distance: line not normalized");
  return std::abs(line[0] * p.u + line[1] * p.v + line[2]);
}

Point2 project(const ProjectionMatrix& p, const Vec3& x) {
  const double* m = p.p.data();
  const double d = m[8] * x[0] + m[9] * x[1] + m[10] * x[2] + m[11];
  if (std::abs(d) <= kDepthEps)
    fail(Errc::BehindCamera, "project: point on the camera plane");
  const double u = m[0] * x[0] + m[1] * x[1] + m[2] * x[2] + m[3];
  const double v = m[4] * x[0] + m[5] * x[1] + m[6] * x[2] + m[7];
  return {u / d, v / d};
}

namespace {

// Pixel-coordinate scale of a projection matrix (focal proxy): the norm
// of the image rows relative to the depth row. Conditioning with it
// keeps the [P'C]x P'P+ products at O(1), which matters for the residual
// precision of the resulting F.
double pixel_scale(const ProjectionMatrix& p) {
  double img = 0.0, depth = 0.0;
  for (int c = 0; c < 4; ++c) {
    img += p.p[c] * p.p[c] + p.p[4 + c] * p.p[4 + c];
    depth += p.p[8 + c] * p.p[8 + c];
  }
  if (depth == 0.0) fail(Errc::InvalidInput, "projection: zero depth row");
  const double s = std::sqrt(img / (2.0 * depth));
  return s > 0.0 ? s : 1.0;
}

}  // namespace

FundamentalMatrix fm_from_projections(const ProjectionMatrix& p1,
                                      const ProjectionMatrix& p2) {
  const Vec3 c1 = p1.center();
  const Vec3 c2 = p2.center();
  const double baseline = std::sqrt((c1[0] - c2[0]) * (c1[0] - c2[0]) +
                                    (c1[1] - c2[1]) * (c1[1] - c2[1]) +
                                    (c1[2] - c2[2]) * (c1[2] - c2[2]));
  if (baseline <= kBaselineEps)
    fail(Errc::NoBaseline, "fm_from_projections: coincident camera centers");

  // Work in scaled image coordinates: divide the image rows by each
  // camera's pixel scale, undo on the way out.
  const double s1 = pixel_scale(p1);
  const double s2 = pixel_scale(p2);
  ProjectionMatrix q1 = p1;
  ProjectionMatrix q2 = p2;
  for (int c = 0; c < 4; ++c) {
    q1.p[c] /= s1;
    q1.p[4 + c] /= s1;
    q2.p[c] /= s2;
    q2.p[4 + c] /= s2;
  }

  const Mat q1m = q1.as_mat();
  Mat pinv = pseudo_inverse(q1m);  // 4x3

  // One Newton step X <- X (2I - P X) squares away the SVD tolerance.
  {
    Mat px = q1m * pinv;  // 3x3
    Mat two_minus(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc)
        two_minus.at(r, cc) = (r == cc ? 2.0 : 0.0) - px.at(r, cc);
    pinv = pinv * two_minus;
  }

  // Homogeneous center of P, refined by projecting out the residual.
  std::vector<double> c = right_null_vector(q1m);
  {
    double residual[3];
    for (int r = 0; r < 3; ++r)
      residual[r] = q1m.at(r, 0) * c[0] + q1m.at(r, 1) * c[1] +
                    q1m.at(r, 2) * c[2] + q1m.at(r, 3) * c[3];
    for (int r = 0; r < 4; ++r)
      for (int k = 0; k < 3; ++k) c[r] -= pinv.at(r, k) * residual[k];
    double norm = 0.0;
    for (double x : c) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : c) x /= norm;
  }

  Vec3 epipole{};
  for (int r = 0; r < 3; ++r)
    epipole[r] = q2.p[r * 4] * c[0] + q2.p[r * 4 + 1] * c[1] +
                 q2.p[r * 4 + 2] * c[2] + q2.p[r * 4 + 3] * c[3];

  const Mat core = q2.as_mat() * pinv;  // 3x3
  Mat3 core3{};
  for (int i = 0; i < 9; ++i) core3[i] = core.data[i];
  Mat3 f_hat = mat3_mul(cross_matrix(epipole), core3);

  // F = T2^T F_hat T1 with T = diag(1/s, 1/s, 1).
  const double row_scale[3] = {1.0 / s2, 1.0 / s2, 1.0};
  const double col_scale[3] = {1.0 / s1, 1.0 / s1, 1.0};
  for (int r = 0; r < 3; ++r)
    for (int cidx = 0; cidx < 3; ++cidx)
      f_hat[r * 3 + cidx] *= row_scale[r] * col_scale[cidx];
  return canonicalize(f_hat);
}

EpipolarDistances epipolar_distances(const FundamentalMatrix& f,
                                     const Correspondence& c) {
  EpipolarDistances out;
  out.d2 = point_line_distance(
      c.p2, epipolar_line(f, c.p1, LineDirection::Image1ToImage2));
  out.d1 = point_line_distance(
      c.p1, epipolar_line(f, c.p2, LineDirection::Image2ToImage1));
  return out;
}

double symmetric_epipolar_distance(const FundamentalMatrix& f,
                                   const Correspondence& c) {
  const EpipolarDistances d = epipolar_distances(f, c);
  return std::max(d.d1, d.d2);
}

EpipolarDistances epipolar_distances_unchecked(const Mat3& f,
                                               const Correspondence& c) {
  const double inf = std::numeric_limits<double>::infinity();
  EpipolarDistances out{inf, inf};

  const Vec3 l2 = mat3_mul_vec(f, {c.p1.u, c.p1.v, 1.0});
  const double n2 = std::hypot(l2[0], l2[1]);
  if (n2 >= kEpipoleEps)
    out.d2 = std::abs(l2[0] * c.p2.u + l2[1] * c.p2.v + l2[2]) / n2;

  const Vec3 l1 = mat3_mul_vec(mat3_transpose(f), {c.p2.u, c.p2.v, 1.0});
  const double n1 = std::hypot(l1[0], l1[1]);
  if (n1 >= kEpipoleEps)
    out.d1 = std::abs(l1[0] * c.p1.u + l1[1] * c.p1.v + l1[2]) / n1;
  return out;
}

double symmetric_residual_unchecked(const Mat3& f, const Correspondence& c) {
  const EpipolarDistances d = epipolar_distances_unchecked(f, c);
  return std::max(d.d1, d.d2);
}

FundamentalMatrix canonicalize(const Mat3& f) {
  double max_abs = 0.0;
  for (double x : f) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs == 0.0) fail(Errc::InvalidInput, "canonicalize: zero matrix");

  Mat m(3, 3);
  for (int i = 0; i < 9; ++i) m.data[i] = f[i] / max_abs;
  const Svd dec = svd(m);
  if (dec.sigma[1] == 0.0)
    fail(Errc::InvalidInput, "canonicalize: rank-deficient matrix");

  Mat3 out{};
  if (dec.sigma[2] <= 1e-12 * dec.sigma[0]) {
    // Already numerically rank-2: plain rescaling preserves the relative
    // precision of small entries, which an SVD reconstruction would
    // smear at absolute epsilon.
    const double norm = mat3_frobenius(f);
    for (int i = 0; i < 9; ++i) out[i] = f[i] / norm;
  } else {
    // Drop the smallest singular value, rescale to unit Frobenius norm.
    const double s0 = dec.sigma[0];
    const double s1 = dec.sigma[1];
    const double norm = std::sqrt(s0 * s0 + s1 * s1);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        out[r * 3 + c] = (s0 / norm) * dec.u.at(r, 0) * dec.v.at(c, 0) +
                         (s1 / norm) * dec.u.at(r, 1) * dec.v.at(c, 1);
  }

  int argmax = 0;
  for (int i = 1; i < 9; ++i)
    if (std::abs(out[i]) > std::abs(out[argmax])) argmax = i;
  if (out[argmax] < 0.0)
    for (double& x : out) x = -x;
  return {out};
}

}  // namespace twoview
