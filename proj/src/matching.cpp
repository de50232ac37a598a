#include "twoview/matching.hpp"

#include <cmath>
#include <limits>

namespace twoview {

namespace {

double squared_distance(const Descriptor& a, const Descriptor& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

MatchSet match_nearest_neighbor(std::span<const Keypoint> k1,
                                std::span<const Keypoint> k2) {
  if (k1.empty()) fail(Errc::InvalidInput, "match: empty query set");
  if (k2.size() < 2)
    fail(Errc::InsufficientData, "match: ratio needs two candidates");

  const size_t dim = k1[0].descriptor.size();
  for (const Keypoint& k : k1)
    if (k.descriptor.size() != dim)
      fail(Errc::InvalidInput, "match: descriptor dimension mismatch");
  for (const Keypoint& k : k2)
    if (k.descriptor.size() != dim)
      fail(Errc::InvalidInput, "match: descriptor dimension mismatch");

  MatchSet out;
  out.keypoints1 = k1.size();
  out.keypoints2 = k2.size();
  out.correspondences.reserve(k1.size());

  for (const Keypoint& q : k1) {
    size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    double second_sq = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < k2.size(); ++j) {
      const double d = squared_distance(q.descriptor, k2[j].descriptor);
      if (d < best_sq) {
        second_sq = best_sq;
        best_sq = d;
        best = j;
      } else if (d < second_sq) {
        second_sq = d;
      }
    }
    double ratio = second_sq > 0.0 ? std::sqrt(best_sq / second_sq) : 1.0;
    if (ratio <= 0.0) ratio = std::numeric_limits<double>::min();
    out.correspondences.push_back(
        {q.location, k2[best].location, std::min(ratio, 1.0)});
  }
  return out;
}

MatchSet ratio_test(const MatchSet& ms, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    fail(Errc::InvalidInput, "ratio_test: threshold must be in (0, 1]");
  MatchSet out;
  out.keypoints1 = ms.keypoints1;
  out.keypoints2 = ms.keypoints2;
  for (const Correspondence& c : ms.correspondences) {
    if (!c.nn_ratio)
      fail(Errc::InvalidInput, "ratio_test: correspondence without nn_ratio");
    if (*c.nn_ratio < threshold) out.correspondences.push_back(c);
  }
  return out;
}

namespace {

bool same_correspondence(const Correspondence& a, const Correspondence& b) {
  return a.p1.u == b.p1.u && a.p1.v == b.p1.v && a.p2.u == b.p2.u &&
         a.p2.v == b.p2.v && a.nn_ratio == b.nn_ratio;
}

}  // namespace

MatchSet apply_pruner(const MatchSet& ms, const Pruner& pruner) {
  MatchSet pruned = pruner(ms);
  pruned.keypoints1 = ms.keypoints1;
  pruned.keypoints2 = ms.keypoints2;

  // The output must be an ordered subsequence of the input.
  size_t cursor = 0;
  for (const Correspondence& kept : pruned.correspondences) {
    while (cursor < ms.correspondences.size() &&
           !same_correspondence(ms.correspondences[cursor], kept))
      ++cursor;
    if (cursor == ms.correspondences.size())
      fail(Errc::ContractViolation,
           "apply_pruner: output is not a subset of the input");
    ++cursor;
  }
  return pruned;
}

}  // namespace twoview
