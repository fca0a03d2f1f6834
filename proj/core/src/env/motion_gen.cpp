#include "mimic/env/motion_gen.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace mimic::env {

using motion::MotionSequence;

namespace {

struct JointIds {
  int l_hip, l_knee, l_ankle, r_hip, r_knee, r_ankle;
  int torso, l_shoulder, l_elbow, r_shoulder, r_elbow;
};

JointIds joint_ids(const kin::KinematicTree& tree) {
  std::map<std::string, int> dof;
  for (const auto& link : tree.links)
    if (link.joint.dof >= 0) dof[link.joint.name] = link.joint.dof;
  auto need = [&](const char* n) {
    auto it = dof.find(n);
    if (it == dof.end())
      throw std::invalid_argument(std::string("motion_gen: robot lacks joint ") + n);
    return it->second;
  };
  return {need("l_hip"),      need("l_knee"), need("l_ankle"), need("r_hip"),
          need("r_knee"),     need("r_ankle"), need("torso"),  need("l_shoulder"),
          need("l_elbow"),    need("r_shoulder"), need("r_elbow")};
}

// stance-leg geometry: root height that pins the stance foot to z = 0
double root_height_for(double hip, double knee, double hip_off_z, double thigh,
                       double shin) {
  return hip_off_z + thigh * std::cos(hip) + shin * std::cos(hip + knee);
}

}  // namespace

GeneratedMotion generate_motion(const MotionGenConfig& cfg,
                                const kin::KinematicTree& tree,
                                const human::Skeleton& skel) {
  const auto n = static_cast<Eigen::Index>(cfg.duration_s * cfg.rate);
  if (n < 3) throw std::invalid_argument("motion_gen: duration too short");
  const JointIds id = joint_ids(tree);
  const double hip_off_z = 0.06, thigh = 0.40, shin = 0.40;
  const double knee_rest = 0.05;

  MotionSequence robot;
  robot.name = cfg.pattern;
  robot.rate = cfg.rate;
  robot.joint_pos = Eigen::MatrixXd::Zero(n, tree.dof_count);
  robot.root_pos = Eigen::MatrixXd::Zero(n, 3);
  robot.root_quat = Eigen::MatrixXd::Zero(n, 4);
  robot.root_quat.col(0).setOnes();
  Eigen::MatrixXd contacts = Eigen::MatrixXd::Zero(n, 2);

  const double dt = 1.0 / cfg.rate;

  if (cfg.pattern == "walk") {
    const double half = cfg.period_s / 2.0;
    // horizontal hip-to-foot offset for a stance hip angle
    auto lever = [&](double hip) {
      return thigh * std::sin(hip) + shin * std::sin(hip + knee_rest);
    };
    double foot_x_stance = -lever(-cfg.step_angle);  // stance foot starts at x=0... pinned
    long prev_half = -1;
    double root_x = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double time = static_cast<double>(k) * dt;
      const long half_idx = static_cast<long>(std::floor(time / half));
      const double u = (time - static_cast<double>(half_idx) * half) / half;
      const bool left_stance = half_idx % 2 == 0;

      if (half_idx != prev_half && k > 0) {
        // the landing swing foot becomes the pinned stance foot
        foot_x_stance = root_x - lever(-cfg.step_angle);
      }
      prev_half = half_idx;

      const double stance_hip = -cfg.step_angle + 2.0 * cfg.step_angle * u;
      const double swing_hip = cfg.step_angle - 2.0 * cfg.step_angle * u;
      const double swing_knee = knee_rest + cfg.knee_lift * std::sin(M_PI * u);

      auto& q = robot.joint_pos;
      if (left_stance) {
        q(k, id.l_hip) = stance_hip;
        q(k, id.l_knee) = knee_rest;
        q(k, id.r_hip) = swing_hip;
        q(k, id.r_knee) = swing_knee;
        contacts(k, 0) = 1.0;
      } else {
        q(k, id.r_hip) = stance_hip;
        q(k, id.r_knee) = knee_rest;
        q(k, id.l_hip) = swing_hip;
        q(k, id.l_knee) = swing_knee;
        contacts(k, 1) = 1.0;
      }
      // arms counter-swing; ankles stay neutral
      q(k, id.l_shoulder) = left_stance ? 0.25 * (2 * u - 1) : 0.25 * (1 - 2 * u);
      q(k, id.r_shoulder) = -q(k, id.l_shoulder);
      q(k, id.l_elbow) = -0.3;
      q(k, id.r_elbow) = -0.3;

      root_x = foot_x_stance + lever(stance_hip);
      robot.root_pos(k, 0) = root_x;
      robot.root_pos(k, 2) =
          root_height_for(stance_hip, knee_rest, hip_off_z, thigh, shin);
    }
  } else if (cfg.pattern == "squat") {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double time = static_cast<double>(k) * dt;
      const double a =
          cfg.squat_depth * 0.5 * (1.0 - std::cos(2.0 * M_PI * time / cfg.period_s));
      auto& q = robot.joint_pos;
      q(k, id.l_hip) = -a;
      q(k, id.r_hip) = -a;
      q(k, id.l_knee) = 2.0 * a;
      q(k, id.r_knee) = 2.0 * a;
      q(k, id.l_ankle) = -a;
      q(k, id.r_ankle) = -a;
      q(k, id.l_shoulder) = -0.5 * a;
      q(k, id.r_shoulder) = -0.5 * a;
      contacts.row(k).setOnes();
      robot.root_pos(k, 2) = root_height_for(-a, 2.0 * a, hip_off_z, thigh, shin);
    }
  } else if (cfg.pattern == "kick") {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double time = static_cast<double>(k) * dt;
      const double a =
          cfg.kick_angle * 0.5 * (1.0 - std::cos(2.0 * M_PI * time / cfg.period_s));
      auto& q = robot.joint_pos;
      q(k, id.r_hip) = -a;                       // leg swings forward
      q(k, id.r_knee) = knee_rest + 0.4 * a;
      q(k, id.l_knee) = knee_rest;
      q(k, id.torso) = 0.15 * a;
      q(k, id.l_shoulder) = 0.3 * a;
      q(k, id.r_shoulder) = -0.3 * a;
      contacts(k, 0) = 1.0;
      contacts(k, 1) = a < 0.05 ? 1.0 : 0.0;
      robot.root_pos(k, 2) =
          root_height_for(0.0, knee_rest, hip_off_z, thigh, shin);
    }
  } else {
    throw std::invalid_argument("motion_gen: unknown pattern '" + cfg.pattern + "'");
  }

  robot.joint_pos = robot.joint_pos.cwiseMax(
      tree.lower_limits().transpose().replicate(n, 1));
  robot.joint_pos = robot.joint_pos.cwiseMin(
      tree.upper_limits().transpose().replicate(n, 1));

  GeneratedMotion out;
  out.true_contacts = std::move(contacts);

  const auto corr = human::derive_correspondence(tree, skel);
  out.human.name = cfg.pattern;
  out.human.rate = cfg.rate;
  out.human.root_pos = robot.root_pos;
  out.human.root_quat = robot.root_quat;
  for (Eigen::Index k = 0; k < n; ++k)
    out.human.frames.push_back(
        human::pose_from_joints(corr, robot.joint_pos.row(k).transpose()));

  out.robot = std::move(robot);
  return out;
}

}  // namespace mimic::env
