#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mimic/ad/tape.hpp"

namespace mimic::human {

inline constexpr int kNumJoints = 22;  // body only, no hands

/// Static morphology of the simplified skeleton: one global scale, one
/// length multiplier per segment, one offset vector per named keypoint.
struct ShapeParams {
  double alpha = 1.0;
  Eigen::VectorXd beta;   // kNumJoints - 1 segment multipliers, all > 0
  Eigen::MatrixXd delta;  // num_keypoints x 3 offsets (meters)

  static ShapeParams identity();
  void validate() const;
};

/// Angle-axis body pose, one 3-vector per joint.
struct HumanPose {
  Eigen::MatrixXd aa = Eigen::MatrixXd::Zero(kNumJoints, 3);

  Eigen::VectorXd flattened() const;  // 66x1, row-major joint blocks
  static HumanPose from_flat(const Eigen::VectorXd& v);
  void validate() const;
};

/// Fixed-topology 22-joint skeleton with named keypoints at the pelvis,
/// knees, ankles, shoulders, elbows and wrists.
class Skeleton {
 public:
  Skeleton();

  int joint_index(const std::string& name) const;
  int keypoint_index(const std::string& name) const;
  const std::vector<std::string>& joint_names() const { return joint_names_; }
  const std::vector<std::string>& keypoint_names() const { return keypoint_names_; }
  int num_keypoints() const { return static_cast<int>(keypoint_names_.size()); }
  const std::vector<int>& parents() const { return parents_; }
  const Eigen::MatrixXd& rest_offsets() const { return rest_offsets_; }

  /// World positions of all joints; root at the origin.
  Eigen::MatrixXd joint_positions(const HumanPose& pose,
                                  const ShapeParams& shape) const;
  /// Keypoints (num_keypoints x 3), scaled by alpha with deltas applied.
  Eigen::MatrixXd keypoint_positions(const HumanPose& pose,
                                     const ShapeParams& shape) const;

  /// Differentiable keypoints. `pose66` is the 66x1 flattened pose;
  /// alpha/beta/delta may be tape leaves (shape fitting) or constants.
  ad::Var keypoint_positions(ad::Tape& tape, ad::Var pose66, ad::Var alpha,
                             ad::Var beta, ad::Var delta) const;
  ad::Var keypoint_positions(ad::Tape& tape, ad::Var pose66,
                             const ShapeParams& shape) const;

  /// Sagittal mirror: left/right joints swapped, angle-axis reflected.
  HumanPose mirror(const HumanPose& pose) const;

 private:
  std::vector<std::string> joint_names_;
  std::vector<int> parents_;
  Eigen::MatrixXd rest_offsets_;        // kNumJoints x 3, parent->joint
  std::vector<std::string> keypoint_names_;
  std::vector<int> keypoint_joint_;     // joint index per keypoint
  std::vector<int> mirror_perm_;        // joint involution
};

}  // namespace mimic::human
