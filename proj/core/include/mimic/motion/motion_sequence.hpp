#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "mimic/human/skeleton.hpp"

namespace mimic::motion {

/// Time-indexed robot trajectory plus the augmented reference channels
/// produced by post-processing. All per-frame arrays share the frame count.
struct MotionSequence {
  std::string name;
  double rate = 50.0;  // Hz

  Eigen::MatrixXd joint_pos;   // n x J (rad)
  Eigen::MatrixXd root_pos;    // n x 3 (m, world)
  Eigen::MatrixXd root_quat;   // n x 4 (w,x,y,z)

  // augmented channels, empty until augment_references()
  Eigen::MatrixXd joint_vel;       // n x J (rad/s)
  Eigen::MatrixXd root_lin_vel_b;  // n x 3 (m/s, robot frame)
  Eigen::MatrixXd root_ang_vel_b;  // n x 3 (rad/s, robot frame)
  Eigen::MatrixXd gravity_b;       // n x 3 (unit vector, robot frame)
  Eigen::VectorXd root_height;     // n (m)
  Eigen::MatrixXd contacts;        // n x F (0/1)
  Eigen::MatrixXd contact_phase;   // n x 2F (cos, sin per foot)

  std::optional<std::pair<int, int>> cycle;  // (i, j), j - i >= 0.2 n

  Eigen::Index frames() const { return joint_pos.rows(); }
  bool augmented() const { return joint_vel.size() > 0; }
  void validate() const;
};

/// Source-side stream: human poses plus a global root trajectory.
struct HumanMotion {
  std::string name;
  double rate = 50.0;
  std::vector<human::HumanPose> frames;
  Eigen::MatrixXd root_pos;   // n x 3
  Eigen::MatrixXd root_quat;  // n x 4

  Eigen::Index size() const { return static_cast<Eigen::Index>(frames.size()); }
};

// quaternion helpers shared by resampling and augmentation (w,x,y,z order)
Eigen::Vector4d quat_identity();
Eigen::Vector4d quat_normalize(const Eigen::Vector4d& q);
Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b);
Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q);
Eigen::Matrix3d quat_to_rot(const Eigen::Vector4d& q);
Eigen::Vector4d quat_from_yaw_pitch(double yaw, double pitch);
Eigen::Vector4d quat_slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                           double t);

}  // namespace mimic::motion
