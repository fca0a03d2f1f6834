#pragma once

#include "mimic/human/correspondence.hpp"
#include "mimic/motion/motion_sequence.hpp"

namespace mimic::env {

/// Procedural motion synthesis for the planar biped: closed-form gait
/// patterns with exact ground-truth contact flags, emitted both as a robot
/// trajectory and as the matching human pose stream.
struct MotionGenConfig {
  std::string pattern = "walk";  // walk | squat | kick
  double duration_s = 4.0;
  double rate = 50.0;
  // walk
  double step_angle = 0.4;   // stance sweep amplitude (rad)
  double knee_lift = 0.7;    // swing-knee bump (rad)
  double period_s = 1.2;     // full gait cycle
  // squat
  double squat_depth = 0.6;  // hip amplitude (rad)
  // kick
  double kick_angle = 1.0;
};

struct GeneratedMotion {
  motion::MotionSequence robot;
  motion::HumanMotion human;
  Eigen::MatrixXd true_contacts;  // frames x 2 (left, right)
};

GeneratedMotion generate_motion(const MotionGenConfig& config,
                                const kin::KinematicTree& tree,
                                const human::Skeleton& skel);

}  // namespace mimic::env
