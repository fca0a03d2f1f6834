#pragma once

#include <optional>

#include "mimic/kin/forward_kinematics.hpp"
#include "mimic/kin/robot_model.hpp"
#include "mimic/util/rng.hpp"

namespace mimic::env {

enum class SimMode { Simplified, Full };

struct EnvConfig {
  double dt = 0.02;          // s
  double gravity = 9.81;     // m/s^2
  // PD actuators tracking joint-position targets
  double kp = 120.0;
  double kd = 10.0;
  double torque_limit = 80.0;
  double joint_inertia = 0.4;
  // lumped base body
  double base_mass = 12.0;
  double base_pitch_inertia = 1.5;
  // penalty ground contacts
  double contact_kp = 12000.0;
  double contact_kd = 400.0;
  double friction_mu = 1.0;
  double friction_kt = 600.0;
  // domain randomization
  bool randomize = false;
  double payload_kg = 5.0;                      // +- added to base mass
  Eigen::Vector2d multiplier_range{0.8, 1.2};   // mass/stiffness/damping
  double push_speed = 0.5;                      // +- m/s velocity jumps
  double push_interval_s = 3.0;
  int max_episode_steps = 240;

  void validate() const;
};

struct EnvState {
  Eigen::Vector3d base_pos = Eigen::Vector3d::Zero();  // x, y(=0), z
  double pitch = 0.0;
  Eigen::Vector3d base_vel = Eigen::Vector3d::Zero();
  double pitch_rate = 0.0;
  Eigen::VectorXd q, qd;
  Eigen::Vector2d foot_contact = Eigen::Vector2d::Zero();
  double time = 0.0;

  Eigen::Matrix3d rotation() const;        // world_R_base (pitch about y)
  Eigen::Vector3d gravity_body(double g = 1.0) const;
  Eigen::Vector3d lin_vel_body() const;
};

struct StepResult {
  bool fault = false;  // non-finite state detected, env was auto-reset
};

/// Planar torso with two PD-driven legs and arms. The base is a lumped
/// rigid body in the sagittal plane; ground contact acts through penalty
/// normal plus Coulomb-capped friction forces at the feet. Simplified mode
/// welds the base at its reset pose and disables contacts.
class BipedEnv {
 public:
  BipedEnv(const kin::KinematicTree& tree, const EnvConfig& config,
           std::uint64_t seed, int env_id = 0);

  void set_mode(SimMode mode) { mode_ = mode; }
  SimMode mode() const { return mode_; }

  /// PD targets per dof (clamped to limits inside the actuator model).
  StepResult step(const Eigen::VectorXd& action);

  /// Accumulates an external base force (N, world frame) for the next step.
  void apply_external_force(const Eigen::Vector3d& force);

  /// Places the robot in a reference-derived state; velocities included.
  void reset_to(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                const Eigen::Vector3d& base_pos, double pitch,
                const Eigen::Vector3d& base_vel_body, double pitch_rate);

  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }
  const kin::KinematicTree& tree() const { return tree_; }
  const EnvConfig& config() const { return config_; }
  int dof_count() const { return tree_.dof_count; }

  /// World foot positions (left, right), rows of a 2x3 matrix.
  Eigen::MatrixXd foot_positions() const;

  /// Re-rolls the per-episode randomization (payload, multipliers, pushes).
  void randomize_episode(RngStream& rng);

  double effective_mass() const { return mass_; }
  int steps_taken() const { return steps_; }

 private:
  Eigen::Vector3d foot_world(int foot, const EnvState& s) const;

  kin::KinematicTree tree_;
  EnvConfig config_;
  SimMode mode_ = SimMode::Full;
  EnvState state_;
  Eigen::Vector3d weld_pos_ = Eigen::Vector3d::Zero();
  double weld_pitch_ = 0.0;

  // per-episode randomized effective parameters
  double mass_;
  double kp_eff_, kd_eff_, contact_kp_eff_, contact_kd_eff_;

  Eigen::Vector3d pending_force_ = Eigen::Vector3d::Zero();
  Eigen::MatrixXd prev_feet_;  // 2x3, for penalty damping
  double next_push_time_ = -1.0;
  RngStream push_rng_;
  int steps_ = 0;
  std::vector<int> foot_links_;
};

}  // namespace mimic::env
