#pragma once

#include <Eigen/Core>
#include <vector>

#include "mimic/kin/robot_model.hpp"

namespace mimic::kin {

/// Reflection about the sagittal plane: joint permutation with per-joint
/// sign flips plus a keypoint permutation with the lateral coordinate
/// negated. Applying the map twice is the identity.
struct SymmetryMap {
  std::vector<int> joint_perm;       // involution over dofs
  Eigen::VectorXd joint_sign;        // +1 / -1 per dof
  std::vector<int> keypoint_perm;    // involution over expanded keypoint pairs
  int lateral_axis = 1;              // world axis negated on keypoints (y)

  Eigen::VectorXd mirror_joints(const Eigen::VectorXd& q) const;
  /// Points given one per row (n x 3); lateral column negated, rows permuted.
  Eigen::MatrixXd mirror_keypoints(const Eigen::MatrixXd& pts) const;
};

/// Derive the map from l_/r_ (and L_/R_) name pairing. Joints whose axis is
/// parallel to the lateral axis keep their sign; perpendicular axes flip.
SymmetryMap build_symmetry_map(const KinematicTree& tree);

}  // namespace mimic::kin
