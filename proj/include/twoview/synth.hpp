#ifndef TWOVIEW_SYNTH_HPP_
#define TWOVIEW_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "twoview/formats.hpp"
#include "twoview/geometry.hpp"
#include "twoview/matching.hpp"

namespace twoview {

/// Camera-pair families: forward motion along the optical axis (KITTI
/// style), a wide lateral baseline looking at a common target, or a
/// random pose.
enum class RigKind { ShortBaselineForward, WideBaseline, Random };

struct SceneConfig {
  RigKind rig = RigKind::Random;
  int n_points = 100;
  double noise_sigma = 0.0;    // pixels, applied to both images' inliers
  double outlier_rate = 0.0;   // fraction in [0, 1)
  ImageDims dims{480, 640};
  std::uint64_t seed = 0;
};

/// A two-view rig with exact ground truth. Planted outliers have their
/// image-2 point displaced at least 10 * max(sigma, 1) px from the true
/// epipolar line, so inlier/outlier labels stay separable. All
/// correspondences carry an nn_ratio drawn low for inliers and high for
/// outliers, mimicking ratio-test statistics.
struct SyntheticPair {
  ProjectionMatrix p1;
  ProjectionMatrix p2;
  FundamentalMatrix f_gt;
  MatchSet corrs;
  std::vector<bool> inlier_truth;
  ImageDims dims1;
  ImageDims dims2;
};

SyntheticPair generate_pair(const SceneConfig& cfg);

struct PlantConfig {
  int dim = 128;
  double perturbation = 0.05;  // descriptor noise on true matches
  int distractors = 0;         // extra unmatched image-2 keypoints
  std::uint64_t seed = 0;
};

struct PlantedKeypoints {
  std::vector<Keypoint> image1;
  std::vector<Keypoint> image2;
};

/// Assigns descriptors so nearest-neighbor matching recovers the planted
/// correspondences: true pairs share a random unit descriptor up to the
/// configured perturbation, outliers and distractors get independent
/// ones.
PlantedKeypoints plant_descriptors(const SyntheticPair& pair,
                                   const PlantConfig& cfg);

/// The pair's cameras as camera-to-world pose records (timestamps 0 and
/// 0.5 s) plus the shared intrinsics, for the trajectory file formats.
struct RigPoses {
  PoseRecord pose1;
  PoseRecord pose2;
  CameraIntrinsics k;
};

RigPoses rig_poses(const SyntheticPair& pair);

}  // namespace twoview

#endif  // TWOVIEW_SYNTH_HPP_
