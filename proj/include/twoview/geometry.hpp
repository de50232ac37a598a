#ifndef TWOVIEW_GEOMETRY_HPP_
#define TWOVIEW_GEOMETRY_HPP_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "twoview/numeric.hpp"

namespace twoview {

struct ImageDims {
  int h = 0;  // height, pixels
  int w = 0;  // width, pixels

  double diagonal() const;
  /// Resolution-normalizing factor 1 / sqrt(h^2 + w^2).
  double diagonal_factor() const;
  bool operator==(const ImageDims&) const = default;
};

/// A putative match between the two images. nn_ratio is Lowe's first-to-
/// second nearest-neighbor descriptor distance ratio in (0, 1], when known.
struct Correspondence {
  Point2 p1;
  Point2 p2;
  std::optional<double> nn_ratio;
};

/// Rank-2, unit-Frobenius-norm 3x3 matrix with its largest-magnitude entry
/// positive. Construct through canonicalize() so the invariants hold and
/// equality tests are meaningful.
struct FundamentalMatrix {
  Mat3 m{};

  FundamentalMatrix transposed() const { return {mat3_transpose(m)}; }
  bool operator==(const FundamentalMatrix&) const = default;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  Mat3 matrix() const {
    return {fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0};
  }
};

/// 3x4 camera projection P = K[R|t], row-major.
struct ProjectionMatrix {
  std::array<double, 12> p{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};

  static ProjectionMatrix from_krt(const CameraIntrinsics& k, const Mat3& r,
                                   const Vec3& t);
  Mat as_mat() const;
  /// Dehomogenized camera center C with P*C = 0.
  Vec3 center() const;
};

/// Epipolar line direction: whose point is being mapped.
enum class LineDirection { Image1ToImage2, Image2ToImage1 };

/// Line (a, b, c) with a^2 + b^2 = 1; points (u, v) on it satisfy
/// a*u + b*v + c = 0.
using Line2 = std::array<double, 3>;

/// Epipolar line of m in the other image. Image2ToImage1 applies F^T.
/// Raises EpipoleDegenerate when F maps m to (numerically) zero.
Line2 epipolar_line(const FundamentalMatrix& f, const Point2& m,
                    LineDirection direction);

/// Unsigned distance from p to a normalized line. Rejects lines whose
/// normal is not unit within 1e-9.
double point_line_distance(const Point2& p, const Line2& line);

/// Pinhole projection of a 3D point; the point must be strictly off the
/// camera plane (|depth| > 1e-12).
Point2 project(const ProjectionMatrix& p, const Vec3& x);

/// Ground-truth F from two projection matrices: [P'C]x P' P+, then
/// canonicalized. Raises NoBaseline when the camera centers coincide.
FundamentalMatrix fm_from_projections(const ProjectionMatrix& p1,
                                      const ProjectionMatrix& p2);

/// Per-image epipolar distances of a correspondence: d2 is measured in
/// image 2 against F*p1, d1 in image 1 against F^T*p2.
struct EpipolarDistances {
  double d1 = 0.0;
  double d2 = 0.0;
};

EpipolarDistances epipolar_distances(const FundamentalMatrix& f,
                                     const Correspondence& c);

/// max(d1, d2): one threshold comparison implements the "within t pixels
/// in both images" inlier rule.
double symmetric_epipolar_distance(const FundamentalMatrix& f,
                                   const Correspondence& c);

/// Non-throwing variants for scoring loops: degenerate epipolar lines
/// yield +inf distances instead of an exception.
EpipolarDistances epipolar_distances_unchecked(const Mat3& f,
                                               const Correspondence& c);
double symmetric_residual_unchecked(const Mat3& f, const Correspondence& c);

/// Nearest rank-2 matrix, scaled to unit Frobenius norm with the
/// largest-magnitude entry positive. Idempotent.
FundamentalMatrix canonicalize(const Mat3& f);

}  // namespace twoview

#endif  // TWOVIEW_GEOMETRY_HPP_
