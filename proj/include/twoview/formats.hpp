#ifndef TWOVIEW_FORMATS_HPP_
#define TWOVIEW_FORMATS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twoview/geometry.hpp"
#include "twoview/matching.hpp"

namespace twoview {

/// Camera pose, camera-to-world: `rotation` maps camera coordinates into
/// the world frame and `translation` is the camera center. Both the
/// quaternion and the matrix form are stored so each pose file format
/// round-trips byte-identically through its native representation.
struct PoseRecord {
  double time = 0.0;
  std::array<double, 4> quaternion{0.0, 0.0, 0.0, 1.0};  // x, y, z, w
  Mat3 rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{0.0, 0.0, 0.0};
};

Mat3 quaternion_to_rotation(const std::array<double, 4>& q);
std::array<double, 4> rotation_to_quaternion(const Mat3& r);

/// World-to-camera projection K [R^T | -R^T c] for a camera-to-world pose.
ProjectionMatrix pose_projection(const PoseRecord& pose,
                                 const CameraIntrinsics& k);

/// TUM trajectory text: "timestamp tx ty tz qx qy qz qw" per line, '#'
/// comments. Quaternions off unit norm by more than 1e-3 are normalized
/// with a warning on stderr; malformed lines raise ParseError with the
/// line number.
std::vector<PoseRecord> load_tum_trajectory(const std::string& path);
void save_tum_trajectory(const std::string& path,
                         std::span<const PoseRecord> poses);

/// KITTI pose text: 12 reals per line, row-major [R|t] camera-to-world.
/// Rotations non-orthonormal beyond 1e-3 are rejected with the line
/// number. Timestamps are synthesized at the KITTI odometry rate (10 Hz).
std::vector<PoseRecord> load_kitti_poses(const std::string& path);
void save_kitti_poses(const std::string& path,
                      std::span<const PoseRecord> poses);

/// Correspondence text: "u1 v1 u2 v2 [ratio]" per line, '#' comments.
/// When image dimensions are given, points far outside them (beyond a
/// 25% border) are rejected as a unit or file mix-up.
MatchSet load_correspondences(const std::string& path);
MatchSet load_correspondences(const std::string& path, const ImageDims& dims1,
                              const ImageDims& dims2);
void save_correspondences(const std::string& path, const MatchSet& ms);

/// Descriptor binary: little-endian uint32 count, uint32 dimension, then
/// count*dimension row-major float32 values.
std::vector<Descriptor> load_descriptors(const std::string& path);
void save_descriptors(const std::string& path,
                      std::span<const Descriptor> descriptors);

/// Keypoint locations text: "u v" per line; combined with a companion
/// descriptor file of the same length.
std::vector<Keypoint> load_keypoints(const std::string& points_path,
                                     const std::string& descriptors_path);
void save_keypoints(const std::string& points_path,
                    const std::string& descriptors_path,
                    std::span<const Keypoint> keypoints);

/// Fundamental matrix text: 9 whitespace-separated reals, row-major.
/// Values already in canonical form are kept bit-exact; anything else is
/// canonicalized on load.
FundamentalMatrix load_fmatrix(const std::string& path);
void save_fmatrix(const std::string& path, const FundamentalMatrix& f);

/// Shortest exact decimal form used by every text format ("%.17g").
std::string format_double(double value);

}  // namespace twoview

#endif  // TWOVIEW_FORMATS_HPP_
