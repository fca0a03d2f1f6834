#pragma once

#include <vector>

#include "mimic/human/skeleton.hpp"
#include "mimic/kin/robot_model.hpp"

namespace mimic::human {

/// Pairing of a robot dof with the human joint it descends from. Used to
/// synthesize human poses from robot trajectories and to seed calibration
/// key frames.
struct JointCorrespondence {
  int robot_dof;
  int human_joint;
  Eigen::Vector3d axis;  // angle-axis direction on the human side
};

/// Derived by name ("l_hip" -> "L_Hip", "torso" -> "Spine1"). Robot joints
/// without a counterpart are skipped.
std::vector<JointCorrespondence> derive_correspondence(
    const kin::KinematicTree& tree, const Skeleton& skel);

/// Human pose whose corresponded joints carry the robot angles.
HumanPose pose_from_joints(const std::vector<JointCorrespondence>& corr,
                           const Eigen::VectorXd& q);

}  // namespace mimic::human
