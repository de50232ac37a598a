#ifndef TWOVIEW_MATCHING_HPP_
#define TWOVIEW_MATCHING_HPP_

#include <functional>
#include <span>
#include <vector>

#include "twoview/geometry.hpp"

namespace twoview {

/// Descriptor vector; dimensionality is uniform within a set.
using Descriptor = std::vector<float>;

struct Keypoint {
  Point2 location;
  Descriptor descriptor;
};

/// Correspondences plus the source keypoint counts they were drawn from.
/// Each image-1 keypoint appears at most once as a match source.
struct MatchSet {
  std::vector<Correspondence> correspondences;
  std::size_t keypoints1 = 0;
  std::size_t keypoints2 = 0;
};

/// Exact (brute-force) nearest-neighbor matching by L2 descriptor
/// distance. Every image-1 keypoint is matched to its nearest image-2
/// keypoint with nn_ratio = d1/d2 from the two nearest neighbors; ties
/// break to the lower index. Needs |k2| >= 2.
MatchSet match_nearest_neighbor(std::span<const Keypoint> k1,
                                std::span<const Keypoint> k2);

/// Lowe's ratio test: keeps correspondences with nn_ratio strictly below
/// the threshold, preserving order. Every input must carry nn_ratio.
MatchSet ratio_test(const MatchSet& ms, double threshold);

using Pruner = std::function<MatchSet(const MatchSet&)>;

/// Runs a pluggable correspondence filter and enforces that its output is
/// a subsequence of the input (ContractViolation otherwise).
MatchSet apply_pruner(const MatchSet& ms, const Pruner& pruner);

}  // namespace twoview

#endif  // TWOVIEW_MATCHING_HPP_
