#include "twoview/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace twoview {

namespace {

// Off-diagonal convergence: quadratic convergence makes the tighter
// bound one extra sweep, and downstream pixel-space residual bounds
// (ground-truth F at 1e-9) need the headroom.
constexpr double kJacobiTol = 1e-14;
constexpr int kMaxSweeps = 60;
constexpr double kCubicEps = 1e-12;    // leading-coefficient / discriminant cutoff
constexpr double kNullGapRel = 1e-8;   // ambiguous-null-space gap

}  // namespace

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Mat Mat::transposed() const {
  Mat t(cols, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
  return t;
}

Mat Mat::operator*(const Mat& rhs) const {
  if (cols != rhs.rows)
    fail(Errc::InvalidInput, "matrix product dimension mismatch");
  Mat out(rows, rhs.cols);
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < cols; ++k) {
      const double a = at(r, k);
      if (a == 0.0) continue;
      for (int c = 0; c < rhs.cols; ++c) out.at(r, c) += a * rhs.at(k, c);
    }
  }
  return out;
}

bool Mat::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double x) { return std::isfinite(x); });
}

Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      out[r * 3 + c] = a[r * 3] * b[c] + a[r * 3 + 1] * b[3 + c] +
                       a[r * 3 + 2] * b[6 + c];
  return out;
}

Mat3 mat3_transpose(const Mat3& a) {
  return {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
}

double mat3_det(const Mat3& a) {
  return a[0] * (a[4] * a[8] - a[5] * a[7]) -
         a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Vec3 mat3_mul_vec(const Mat3& a, const Vec3& x) {
  return {a[0] * x[0] + a[1] * x[1] + a[2] * x[2],
          a[3] * x[0] + a[4] * x[1] + a[5] * x[2],
          a[6] * x[0] + a[7] * x[1] + a[8] * x[2]};
}

Mat3 cross_matrix(const Vec3& t) {
  return {0.0, -t[2], t[1], t[2], 0.0, -t[0], -t[1], t[0], 0.0};
}

double mat3_frobenius(const Mat3& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

namespace {

// Completes zero-sigma columns of u to an orthonormal basis.
void complete_column(Mat& u, int col) {
  for (int cand = 0; cand < u.rows; ++cand) {
    for (int r = 0; r < u.rows; ++r) u.at(r, col) = (r == cand) ? 1.0 : 0.0;
    for (int prev = 0; prev < col; ++prev) {
      double d = 0.0;
      for (int r = 0; r < u.rows; ++r) d += u.at(r, col) * u.at(r, prev);
      for (int r = 0; r < u.rows; ++r) u.at(r, col) -= d * u.at(r, prev);
    }
    double norm_sq = 0.0;
    for (int r = 0; r < u.rows; ++r) norm_sq += u.at(r, col) * u.at(r, col);
    const double n = std::sqrt(norm_sq);
    if (n > 0.5) {
      for (int r = 0; r < u.rows; ++r) u.at(r, col) /= n;
      return;
    }
  }
}

}  // namespace

Svd svd(const Mat& m) {
  if (m.rows < 1 || m.cols < 1)
    fail(Errc::InvalidInput, "svd: empty matrix");
  if (!m.all_finite()) fail(Errc::InvalidInput, "svd: non-finite input");

  const int rows = m.rows;
  const int n = m.cols;

  // Column-major working copies keep the pair sweeps on contiguous data.
  std::vector<double> w(static_cast<size_t>(n) * rows);
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < rows; ++r)
      w[static_cast<size_t>(j) * rows + r] = m.at(r, j);
    v[static_cast<size_t>(j) * n + j] = 1.0;
  }

  double max_norm_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double x = w[static_cast<size_t>(j) * rows + r];
      s += x * x;
    }
    max_norm_sq = std::max(max_norm_sq, s);
  }
  // Columns this small are numerically zero; rotating them against the
  // relative tolerance would never converge.
  const double dead_sq = max_norm_sq * 1e-30;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      double* wi = &w[static_cast<size_t>(i) * rows];
      double* vi = &v[static_cast<size_t>(i) * n];
      for (int j = i + 1; j < n; ++j) {
        double* wj = &w[static_cast<size_t>(j) * rows];
        double* vj = &v[static_cast<size_t>(j) * n];
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int r = 0; r < rows; ++r) {
          alpha += wi[r] * wi[r];
          beta += wj[r] * wj[r];
          gamma += wi[r] * wj[r];
        }
        if (alpha <= dead_sq || beta <= dead_sq) continue;
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < rows; ++r) {
          const double a = wi[r];
          const double b = wj[r];
          wi[r] = c * a - s * b;
          wj[r] = s * a + c * b;
        }
        for (int r = 0; r < n; ++r) {
          const double a = vi[r];
          const double b = vj[r];
          vi[r] = c * a - s * b;
          vj[r] = s * a + c * b;
        }
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double x = w[static_cast<size_t>(j) * rows + r];
      s += x * x;
    }
    norms[j] = std::sqrt(s);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return norms[a] > norms[b]; });

  const int k = std::min(rows, n);
  Svd out;
  out.sigma.resize(k);
  out.u = Mat(rows, k);
  out.v = Mat(n, n);
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < n; ++r)
      out.v.at(r, j) = v[static_cast<size_t>(order[j]) * n + r];

  const double sigma_max = norms.empty() ? 0.0 : norms[order[0]];
  const double sigma_cut =
      sigma_max * std::numeric_limits<double>::epsilon() * std::max(rows, n);
  for (int j = 0; j < k; ++j) {
    const double s = norms[order[j]];
    out.sigma[j] = s;
    if (s > sigma_cut && s > 0.0) {
      for (int r = 0; r < rows; ++r)
        out.u.at(r, j) = w[static_cast<size_t>(order[j]) * rows + r] / s;
    } else {
      complete_column(out.u, j);
    }
  }
  return out;
}

std::vector<double> right_null_vector(const Mat& m) {
  const Svd dec = svd(m);
  const int n = m.cols;
  const int k = static_cast<int>(dec.sigma.size());

  // Singular values conceptually padded with zeros for wide inputs.
  const double smallest = (n > k) ? 0.0 : dec.sigma[k - 1];
  const double second =
      (n > k + 1) ? 0.0 : ((n == k + 1) ? dec.sigma[k - 1] : dec.sigma[k - 2]);
  const double sigma_max = dec.sigma[0];

  if (second - smallest <= kNullGapRel * sigma_max)
    fail(Errc::AmbiguousNullSpace,
         "right_null_vector: smallest singular values are not separated");
  if (smallest > kNullGapRel * std::max(sigma_max, 1e-300))
    fail(Errc::InvalidInput, "right_null_vector: no numerical null space");

  std::vector<double> out(n);
  for (int r = 0; r < n; ++r) out[r] = dec.v.at(r, n - 1);
  return out;
}

Mat pseudo_inverse(const Mat& m) {
  if (!m.all_finite()) fail(Errc::InvalidInput, "pseudo_inverse: non-finite");
  const Svd dec = svd(m);
  const double cut = dec.sigma[0] * std::max(m.rows, m.cols) * 1e-13;
  Mat out(m.cols, m.rows);
  for (size_t j = 0; j < dec.sigma.size(); ++j) {
    if (dec.sigma[j] <= cut) continue;
    const double inv = 1.0 / dec.sigma[j];
    for (int r = 0; r < m.cols; ++r) {
      const double vr = dec.v.at(r, static_cast<int>(j)) * inv;
      for (int c = 0; c < m.rows; ++c)
        out.at(r, c) += vr * dec.u.at(c, static_cast<int>(j));
    }
  }
  return out;
}

namespace {

double horner(double c3, double c2, double c1, double c0, double x) {
  return ((c3 * x + c2) * x + c1) * x + c0;
}

void polish_root(double c3, double c2, double c1, double c0, double& x) {
  for (int it = 0; it < 3; ++it) {
    const double f = horner(c3, c2, c1, c0, x);
    const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) return;
    const double step = f / df;
    if (!std::isfinite(step)) return;
    x -= step;
  }
}

std::vector<double> quadratic_real_roots(double a, double b, double c,
                                         double scale) {
  if (std::abs(a) <= kCubicEps * scale) {
    if (std::abs(b) <= kCubicEps * scale) return {};  // nonzero constant
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  std::vector<double> roots;
  roots.push_back(q / a);
  if (q != 0.0) roots.push_back(c / q);
  return roots;
}

}  // namespace

std::vector<double> cubic_real_roots(double c3, double c2, double c1,
                                     double c0) {
  const double scale =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0)
    fail(Errc::DegeneratePolynomial, "cubic_real_roots: all coefficients zero");
  if (!std::isfinite(scale))
    fail(Errc::InvalidInput, "cubic_real_roots: non-finite coefficients");

  std::vector<double> roots;
  if (std::abs(c3) <= kCubicEps * scale) {
    roots = quadratic_real_roots(c2, c1, c0, scale);
  } else {
    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    const double disc_scale =
        std::max(1.0, 4.0 * std::abs(p * p * p) + 27.0 * q * q);

    if (disc > kCubicEps * disc_scale) {
      // Three distinct real roots (trigonometric form).
      const double r = 2.0 * std::sqrt(-p / 3.0);
      double arg = 3.0 * q / (p * r);
      arg = std::clamp(arg, -1.0, 1.0);
      const double phi = std::acos(arg);
      for (int k = 0; k < 3; ++k)
        roots.push_back(r * std::cos((phi - 2.0 * M_PI * k) / 3.0) - a / 3.0);
    } else if (disc < -kCubicEps * disc_scale) {
      // One real root (Cardano).
      const double h = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
      const double u = std::cbrt(-q / 2.0 + h);
      const double w = std::cbrt(-q / 2.0 - h);
      roots.push_back(u + w - a / 3.0);
    } else {
      // Boundary: repeated roots.
      if (std::abs(p) <= kCubicEps * std::max(1.0, std::cbrt(q * q))) {
        roots.push_back(std::cbrt(-q) - a / 3.0);
      } else {
        roots.push_back(-1.5 * q / p - a / 3.0);  // double root
        roots.push_back(3.0 * q / p - a / 3.0);   // simple root
      }
    }
  }

  for (double& r : roots) polish_root(c3, c2, c1, c0, r);
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() ||
        std::abs(r - unique.back()) > 1e-9 * std::max(1.0, std::abs(r)))
      unique.push_back(r);
  }
  return unique;
}

Point2 NormalizingTransform::apply(const Point2& p) const {
  const Vec3 h = mat3_mul_vec(t, {p.u, p.v, 1.0});
  return {h[0], h[1]};
}

NormalizingTransform NormalizingTransform::inverse() const {
  const double s = t[0];
  NormalizingTransform inv;
  inv.t = {1.0 / s, 0.0, -t[2] / s, 0.0, 1.0 / s, -t[5] / s, 0.0, 0.0, 1.0};
  return inv;
}

NormalizedPoints hartley_normalize(std::span<const Point2> points) {
  if (points.size() < 2)
    fail(Errc::InvalidInput, "hartley_normalize: need at least 2 points");

  double cu = 0.0, cv = 0.0;
  for (const Point2& p : points) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v))
      fail(Errc::InvalidInput, "hartley_normalize: non-finite point");
    cu += p.u;
    cv += p.v;
  }
  cu /= static_cast<double>(points.size());
  cv /= static_cast<double>(points.size());

  double mean_dist = 0.0;
  for (const Point2& p : points)
    mean_dist += std::hypot(p.u - cu, p.v - cv);
  mean_dist /= static_cast<double>(points.size());

  if (mean_dist <= 1e-12 * (1.0 + std::hypot(cu, cv)))
    fail(Errc::DegenerateConfiguration,
         "hartley_normalize: all points coincide");

  const double s = std::sqrt(2.0) / mean_dist;
  NormalizedPoints out;
  out.transform.t = {s, 0.0, -s * cu, 0.0, s, -s * cv, 0.0, 0.0, 1.0};
  out.points.reserve(points.size());
  for (const Point2& p : points)
    out.points.push_back({s * (p.u - cu), s * (p.v - cv)});
  return out;
}

}  // namespace twoview
