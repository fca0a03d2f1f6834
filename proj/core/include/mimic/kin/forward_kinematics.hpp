#pragma once

#include "mimic/ad/tape.hpp"
#include "mimic/kin/robot_model.hpp"

namespace mimic::kin {

/// World pose of every link for a plain joint vector. Row i of `pos` is the
/// origin of link i; `rot[i]` its orientation.
struct LinkPoses {
  std::vector<Eigen::Vector3d> pos;
  std::vector<Eigen::Matrix3d> rot;
};

struct BasePose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

LinkPoses forward_kinematics(const KinematicTree& tree, const Eigen::VectorXd& q,
                             const BasePose& base = {});

/// Keypoint world positions (one row per expanded keypoint pair).
Eigen::MatrixXd keypoint_positions(const KinematicTree& tree,
                                   const Eigen::VectorXd& q,
                                   const BasePose& base = {});

/// Tape-recorded FK: differentiable w.r.t. q and the base pose.
struct DiffLinkPoses {
  std::vector<ad::Var> pos;  // 3x1 each
  std::vector<ad::Var> rot;  // 3x3 each
};

DiffLinkPoses forward_kinematics(ad::Tape& tape, const KinematicTree& tree,
                                 ad::Var q /* Jx1 */, ad::Var base_pos /* 3x1 */,
                                 ad::Var base_rot /* 3x3 */);

/// Keypoints stacked as a (num_pairs x 3) Var.
ad::Var keypoint_positions(ad::Tape& tape, const KinematicTree& tree, ad::Var q);

/// Rotation about a fixed unit axis by a 1x1 angle node.
ad::Var rotation_about_axis(ad::Tape& tape, const Eigen::Vector3d& axis,
                            ad::Var angle);

/// Rodrigues rotation from a 3x1 angle-axis node, smooth at zero.
ad::Var rotation_from_angle_axis(ad::Tape& tape, ad::Var aa);

}  // namespace mimic::kin
