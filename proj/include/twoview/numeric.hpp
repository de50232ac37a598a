#ifndef TWOVIEW_NUMERIC_HPP_
#define TWOVIEW_NUMERIC_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "twoview/error.hpp"

namespace twoview {

/// Image point in pixels.
struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

/// Dense row-major matrix. Sized for design matrices (N x 9) and camera
/// blocks, not for general linear algebra.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }

  static Mat identity(int n);
  Mat transposed() const;
  Mat operator*(const Mat& rhs) const;
  bool all_finite() const;
};

// Fixed-size kernels for the 3x3 / 3x4 hot paths.
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;  // row-major

Mat3 mat3_mul(const Mat3& a, const Mat3& b);
Mat3 mat3_transpose(const Mat3& a);
double mat3_det(const Mat3& a);
Vec3 mat3_mul_vec(const Mat3& a, const Vec3& x);
Mat3 cross_matrix(const Vec3& t);
double mat3_frobenius(const Mat3& a);

/// Full right-basis SVD: `u` is rows x k with orthonormal columns,
/// `sigma` holds the k = min(rows, cols) singular values descending, and
/// `v` is cols x cols orthogonal. Columns of `v` beyond k span the null
/// space of wide inputs.
struct Svd {
  Mat u;
  std::vector<double> sigma;
  Mat v;
};

/// One-sided Jacobi SVD. Self-contained so downstream results do not
/// depend on an external numeric stack; plenty for N x 9 design matrices.
Svd svd(const Mat& m);

/// Unit vector v with m*v ~ 0. Requires a one-dimensional numerical null
/// space: a degenerate gap between the two smallest singular values (1e-8
/// relative) raises AmbiguousNullSpace.
std::vector<double> right_null_vector(const Mat& m);

/// Moore-Penrose pseudo-inverse via SVD.
Mat pseudo_inverse(const Mat& m);

/// Distinct real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending. Falls
/// back to the quadratic/linear solve when leading coefficients vanish;
/// an all-zero polynomial raises DegeneratePolynomial. A nonzero constant
/// polynomial has no roots and yields an empty list.
std::vector<double> cubic_real_roots(double c3, double c2, double c1,
                                     double c0);

/// Similarity transform on homogeneous 2D points: isotropic scale plus
/// translation, last row (0, 0, 1).
struct NormalizingTransform {
  Mat3 t{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Point2 apply(const Point2& p) const;
  NormalizingTransform inverse() const;
};

/// Hartley conditioning: translates the centroid to the origin and scales
/// the mean distance to sqrt(2).
struct NormalizedPoints {
  NormalizingTransform transform;
  std::vector<Point2> points;
};

NormalizedPoints hartley_normalize(std::span<const Point2> points);

}  // namespace twoview

#endif  // TWOVIEW_NUMERIC_HPP_
