#ifndef TWOVIEW_SOLVERS_HPP_
#define TWOVIEW_SOLVERS_HPP_

#include <span>
#include <vector>

#include "twoview/geometry.hpp"

namespace twoview {

/// Minimal solver selection. EightPoint needs >= 8 correspondences,
/// SevenPoint exactly 7 per sample.
enum class SolverKind { EightPoint, SevenPoint };

/// Normalized (Hartley) 8-point solve over >= 8 correspondences.
/// Degenerate configurations (coincident/collinear points, rank-deficient
/// design) raise DegenerateSample.
FundamentalMatrix solve_eight_point(std::span<const Correspondence> corrs);

/// 7-point solve: 2D null space of the design matrix plus the cubic
/// rank-2 constraint. Returns 1-3 canonical solutions, each satisfying
/// all seven epipolar constraints.
std::vector<FundamentalMatrix> solve_seven_point(
    std::span<const Correspondence> corrs);

}  // namespace twoview

#endif  // TWOVIEW_SOLVERS_HPP_
