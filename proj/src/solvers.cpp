#include "twoview/solvers.hpp"

#include <cmath>

namespace twoview {

namespace {

constexpr double kDesignGapRel = 1e-10;
constexpr double kConstraintTol = 1e-8;

struct ConditionedPoints {
  NormalizingTransform t1;
  NormalizingTransform t2;
  std::vector<Point2> x1;
  std::vector<Point2> x2;
};

ConditionedPoints condition(std::span<const Correspondence> corrs) {
  std::vector<Point2> p1, p2;
  p1.reserve(corrs.size());
  p2.reserve(corrs.size());
  for (const Correspondence& c : corrs) {
    p1.push_back(c.p1);
    p2.push_back(c.p2);
  }
  try {
    NormalizedPoints n1 = hartley_normalize(p1);
    NormalizedPoints n2 = hartley_normalize(p2);
    return {n1.transform, n2.transform, std::move(n1.points),
            std::move(n2.points)};
  } catch (const Error& e) {
    if (e.code() == Errc::DegenerateConfiguration)
      fail(Errc::DegenerateSample, "solver: coincident points in a sample");
    throw;
  }
}

// Row of the epipolar design matrix for x2^T F x1 = 0, F row-major.
void design_row(const Point2& x1, const Point2& x2, double* row) {
  row[0] = x2.u * x1.u;
  row[1] = x2.u * x1.v;
  row[2] = x2.u;
  row[3] = x2.v * x1.u;
  row[4] = x2.v * x1.v;
  row[5] = x2.v;
  row[6] = x1.u;
  row[7] = x1.v;
  row[8] = 1.0;
}

Mat design_matrix(const ConditionedPoints& pts) {
  const int n = static_cast<int>(pts.x1.size());
  Mat a(n, 9);
  for (int i = 0; i < n; ++i)
    design_row(pts.x1[i], pts.x2[i], &a.data[static_cast<size_t>(i) * 9]);
  return a;
}

Mat3 denormalize(const Mat3& f_hat, const NormalizingTransform& t1,
                 const NormalizingTransform& t2) {
  return mat3_mul(mat3_transpose(t2.t), mat3_mul(f_hat, t1.t));
}

double max_constraint_residual(const Mat3& f,
                               std::span<const Correspondence> corrs) {
  double worst = 0.0;
  for (const Correspondence& c : corrs) {
    const Vec3 l = mat3_mul_vec(f, {c.p1.u, c.p1.v, 1.0});
    const double r = std::abs(c.p2.u * l[0] + c.p2.v * l[1] + l[2]);
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace

FundamentalMatrix solve_eight_point(std::span<const Correspondence> corrs) {
  if (corrs.size() < 8)
    fail(Errc::InsufficientData, "solve_eight_point: need >= 8 matches");

  const ConditionedPoints pts = condition(corrs);
  const Mat a = design_matrix(pts);
  const Svd dec = svd(a);

  // Singular values padded with zeros when the design is wide (n == 8).
  const int k = static_cast<int>(dec.sigma.size());
  const double smallest = (k < 9) ? 0.0 : dec.sigma[8];
  const double second = (k < 9) ? dec.sigma[k - 1] : dec.sigma[7];
  if (second - smallest <= kDesignGapRel * dec.sigma[0])
    fail(Errc::DegenerateSample,
         "solve_eight_point: rank-deficient design matrix");

  Mat3 f_hat{};
  for (int i = 0; i < 9; ++i) f_hat[i] = dec.v.at(i, 8);
  return canonicalize(denormalize(f_hat, pts.t1, pts.t2));
}

std::vector<FundamentalMatrix> solve_seven_point(
    std::span<const Correspondence> corrs) {
  if (corrs.size() != 7)
    fail(Errc::InsufficientData, "solve_seven_point: need exactly 7 matches");

  const ConditionedPoints pts = condition(corrs);
  const Mat a = design_matrix(pts);
  const Svd dec = svd(a);

  // Rank must be exactly 7 so the null space is two-dimensional.
  if (dec.sigma[6] <= kDesignGapRel * dec.sigma[0])
    fail(Errc::DegenerateSample,
         "solve_seven_point: null space dimension exceeds 2");

  Mat3 f1{}, f2{};
  for (int i = 0; i < 9; ++i) {
    f1[i] = dec.v.at(i, 7);
    f2[i] = dec.v.at(i, 8);
  }

  // det(f1 + x f2) is cubic in x; interpolate its coefficients from four
  // evaluations.
  const auto det_at = [&](double x) {
    Mat3 m{};
    for (int i = 0; i < 9; ++i) m[i] = f1[i] + x * f2[i];
    return mat3_det(m);
  };
  const double d0 = det_at(0.0);
  const double d1 = det_at(1.0);
  const double dm1 = det_at(-1.0);
  const double d2 = det_at(2.0);
  const double c0 = d0;
  const double c2 = 0.5 * (d1 + dm1) - d0;
  const double odd = 0.5 * (d1 - dm1);               // c1 + c3
  const double c3 = (0.5 * (d2 - d0 - 4.0 * c2) - odd) / 3.0;
  const double c1 = odd - c3;

  std::vector<double> lambdas = cubic_real_roots(c3, c2, c1, c0);

  std::vector<FundamentalMatrix> solutions;
  const auto push_candidate = [&](const Mat3& f_hat) {
    FundamentalMatrix f;
    try {
      f = canonicalize(denormalize(f_hat, pts.t1, pts.t2));
    } catch (const Error&) {
      return;
    }
    if (max_constraint_residual(f.m, corrs) > kConstraintTol) return;
    for (const FundamentalMatrix& seen : solutions) {
      double diff = 0.0;
      for (int i = 0; i < 9; ++i)
        diff = std::max(diff, std::abs(seen.m[i] - f.m[i]));
      if (diff < 1e-9) return;
    }
    solutions.push_back(f);
  };

  for (double lambda : lambdas) {
    Mat3 f_hat{};
    for (int i = 0; i < 9; ++i) f_hat[i] = f1[i] + lambda * f2[i];
    push_candidate(f_hat);
  }
  // Leading coefficient ~ 0 means f2 itself is (close to) rank 2: the
  // solution the finite roots miss.
  const double coeff_scale = std::max(
      {std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (std::abs(c3) <= 1e-12 * coeff_scale) push_candidate(f2);

  if (solutions.empty())
    fail(Errc::DegenerateSample,
         "solve_seven_point: no root satisfies the epipolar constraints");
  return solutions;
}

}  // namespace twoview
