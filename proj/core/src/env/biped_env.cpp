#include "mimic/env/biped_env.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic::env {

void EnvConfig::validate() const {
  if (dt <= 0.0) throw std::invalid_argument("env: dt must be > 0");
  if (multiplier_range(0) <= 0.0 || multiplier_range(1) >= 2.0 ||
      multiplier_range(0) > multiplier_range(1))
    throw std::invalid_argument("env: multiplier range must lie inside (0, 2)");
  if (max_episode_steps <= 0)
    throw std::invalid_argument("env: max_episode_steps must be positive");
}

Eigen::Matrix3d EnvState::rotation() const {
  return Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

Eigen::Vector3d EnvState::gravity_body(double g) const {
  return rotation().transpose() * Eigen::Vector3d(0, 0, -g);
}

Eigen::Vector3d EnvState::lin_vel_body() const {
  return rotation().transpose() * base_vel;
}

BipedEnv::BipedEnv(const kin::KinematicTree& tree, const EnvConfig& config,
                   std::uint64_t seed, int env_id)
    : tree_(tree),
      config_(config),
      push_rng_(seed, "env.push." + std::to_string(env_id)) {
  config.validate();
  state_.q = Eigen::VectorXd::Zero(tree_.dof_count);
  state_.qd = Eigen::VectorXd::Zero(tree_.dof_count);
  mass_ = config.base_mass;
  kp_eff_ = config.kp;
  kd_eff_ = config.kd;
  contact_kp_eff_ = config.contact_kp;
  contact_kd_eff_ = config.contact_kd;
  for (const auto& pair : tree_.keypoints.pairs)
    if (pair.human.find("Ankle") != std::string::npos)
      foot_links_.push_back(pair.link);
  if (foot_links_.size() != 2)
    throw std::invalid_argument("env: expected two ankle keypoints");
  prev_feet_ = foot_positions();
}

Eigen::Vector3d BipedEnv::foot_world(int foot, const EnvState& s) const {
  kin::BasePose base;
  base.position = s.base_pos;
  base.rotation = s.rotation();
  auto lp = kin::forward_kinematics(tree_, s.q, base);
  return lp.pos[static_cast<std::size_t>(
      foot_links_[static_cast<std::size_t>(foot)])];
}

Eigen::MatrixXd BipedEnv::foot_positions() const {
  Eigen::MatrixXd out(2, 3);
  kin::BasePose base;
  base.position = state_.base_pos;
  base.rotation = state_.rotation();
  auto lp = kin::forward_kinematics(tree_, state_.q, base);
  for (int f = 0; f < 2; ++f)
    out.row(f) = lp.pos[static_cast<std::size_t>(
                            foot_links_[static_cast<std::size_t>(f)])]
                     .transpose();
  return out;
}

void BipedEnv::randomize_episode(RngStream& rng) {
  const double lo = config_.multiplier_range(0), hi = config_.multiplier_range(1);
  mass_ = config_.base_mass * rng.uniform(lo, hi) +
          rng.uniform(-config_.payload_kg, config_.payload_kg);
  mass_ = std::max(1.0, mass_);
  kp_eff_ = config_.kp * rng.uniform(lo, hi);
  kd_eff_ = config_.kd * rng.uniform(lo, hi);
  contact_kp_eff_ = config_.contact_kp * rng.uniform(lo, hi);
  contact_kd_eff_ = config_.contact_kd * rng.uniform(lo, hi);
  next_push_time_ = state_.time + rng.uniform(0.5, 2.0 * config_.push_interval_s);
}

void BipedEnv::apply_external_force(const Eigen::Vector3d& force) {
  pending_force_ += force;
}

void BipedEnv::reset_to(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                        const Eigen::Vector3d& base_pos, double pitch,
                        const Eigen::Vector3d& base_vel_body, double pitch_rate) {
  if (q.size() != tree_.dof_count || qd.size() != tree_.dof_count)
    throw std::invalid_argument("env reset: joint vector length");
  state_.q = tree_.clamp_to_limits(q);
  state_.qd = qd;
  state_.base_pos = base_pos;
  state_.base_pos.y() = 0.0;  // planar
  state_.pitch = pitch;
  state_.pitch_rate = pitch_rate;
  state_.base_vel = state_.rotation() * base_vel_body;
  state_.base_vel.y() = 0.0;
  state_.time = 0.0;
  state_.foot_contact.setZero();
  weld_pos_ = state_.base_pos;
  weld_pitch_ = state_.pitch;
  pending_force_.setZero();
  prev_feet_ = foot_positions();
  steps_ = 0;
}

StepResult BipedEnv::step(const Eigen::VectorXd& action) {
  if (action.size() != tree_.dof_count)
    throw std::invalid_argument("env step: action length mismatch");
  const double dt = config_.dt;
  EnvState& s = state_;

  // PD actuators toward clamped targets
  const Eigen::VectorXd target = tree_.clamp_to_limits(action);
  Eigen::VectorXd tau = kp_eff_ * (target - s.q) - kd_eff_ * s.qd;
  tau = tau.cwiseMax(-config_.torque_limit).cwiseMin(config_.torque_limit);
  s.qd += (tau / config_.joint_inertia) * dt;
  s.q += s.qd * dt;
  // hard joint stops
  const Eigen::VectorXd lo = tree_.lower_limits(), hi = tree_.upper_limits();
  for (int j = 0; j < tree_.dof_count; ++j) {
    if (s.q(j) < lo(j)) {
      s.q(j) = lo(j);
      s.qd(j) = std::max(0.0, s.qd(j));
    } else if (s.q(j) > hi(j)) {
      s.q(j) = hi(j);
      s.qd(j) = std::min(0.0, s.qd(j));
    }
  }

  if (mode_ == SimMode::Simplified) {
    // welded base, no ground interactions
    s.base_pos = weld_pos_;
    s.pitch = weld_pitch_;
    s.base_vel.setZero();
    s.pitch_rate = 0.0;
    s.foot_contact.setZero();
    pending_force_.setZero();
    prev_feet_ = foot_positions();
  } else {
    // scheduled push: instantaneous horizontal velocity jump
    if (config_.randomize && next_push_time_ >= 0.0 && s.time >= next_push_time_) {
      s.base_vel.x() += push_rng_.uniform(-config_.push_speed, config_.push_speed);
      next_push_time_ = s.time + push_rng_.uniform(0.5 * config_.push_interval_s,
                                                   1.5 * config_.push_interval_s);
    }

    Eigen::Vector3d force(0, 0, -mass_ * config_.gravity);
    force += pending_force_;
    double torque = 0.0;  // pitch, about +y

    Eigen::MatrixXd feet = foot_positions();
    for (int f = 0; f < 2; ++f) {
      const Eigen::Vector3d p = feet.row(f).transpose();
      const Eigen::Vector3d v = (p - prev_feet_.row(f).transpose()) / dt;
      double fn = 0.0, ft = 0.0;
      if (p.z() < 0.0) {
        fn = std::max(0.0, -contact_kp_eff_ * p.z() - contact_kd_eff_ * v.z());
        ft = -config_.friction_kt * v.x();
        ft = std::clamp(ft, -config_.friction_mu * fn, config_.friction_mu * fn);
      }
      s.foot_contact(f) = fn > 0.0 ? 1.0 : 0.0;
      const Eigen::Vector3d contact_force(ft, 0.0, fn);
      force += contact_force;
      const Eigen::Vector3d lever = p - s.base_pos;
      // planar torque about y: tau_y = r_z * F_x - r_x * F_z
      torque += lever.z() * contact_force.x() - lever.x() * contact_force.z();
    }
    prev_feet_ = feet;
    pending_force_.setZero();

    s.base_vel += (force / mass_) * dt;
    s.base_vel.y() = 0.0;
    s.pitch_rate += (torque / config_.base_pitch_inertia) * dt;
    s.base_pos += s.base_vel * dt;
    s.pitch += s.pitch_rate * dt;
  }

  s.time += dt;
  ++steps_;

  StepResult out;
  const bool finite = s.q.allFinite() && s.qd.allFinite() &&
                      s.base_pos.allFinite() && s.base_vel.allFinite() &&
                      std::isfinite(s.pitch) && std::isfinite(s.pitch_rate);
  if (!finite) {
    out.fault = true;
    reset_to(Eigen::VectorXd::Zero(tree_.dof_count),
             Eigen::VectorXd::Zero(tree_.dof_count),
             Eigen::Vector3d(0, 0, 0.9), 0.0, Eigen::Vector3d::Zero(), 0.0);
  }
  return out;
}

}  // namespace mimic::env
