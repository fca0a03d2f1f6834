#include <cmath>
#include <stdexcept>

#include "mimic/post/postprocess.hpp"

namespace mimic::post {

using motion::MotionSequence;

MotionSequence augment_references(const MotionSequence& seq,
                                  const kin::KinematicTree& tree,
                                  const ContactConfig& contact) {
  if (seq.frames() < 3)
    throw std::invalid_argument("augment_references: need at least 3 frames");
  MotionSequence out = seq;
  const Eigen::Index n = seq.frames();
  const double dt = 1.0 / seq.rate;

  out.joint_vel.resize(n, seq.joint_pos.cols());
  out.root_lin_vel_b.resize(n, 3);
  out.root_ang_vel_b.resize(n, 3);
  out.gravity_b.resize(n, 3);
  out.root_height.resize(n);

  for (Eigen::Index t = 0; t < n; ++t) {
    // joint velocities: central differences
    const Eigen::Index c0 = std::max<Eigen::Index>(0, t - 1);
    const Eigen::Index c1 = std::min(n - 1, t + 1);
    out.joint_vel.row(t) =
        (seq.joint_pos.row(c1) - seq.joint_pos.row(c0)) /
        (static_cast<double>(c1 - c0) * dt);

    // root velocities: forward differences, so integrating the stored
    // differentials step by step reproduces the positions exactly
    const Eigen::Index t1 = std::min(n - 1, t + 1);
    const Eigen::Index t0 = t1 - 1;
    const Eigen::Matrix3d r = motion::quat_to_rot(seq.root_quat.row(t0).transpose());
    const Eigen::Vector3d v_world =
        (seq.root_pos.row(t1) - seq.root_pos.row(t0)).transpose() / dt;
    out.root_lin_vel_b.row(t) = (r.transpose() * v_world).transpose();

    const Eigen::Vector4d q0 = seq.root_quat.row(t0).transpose();
    const Eigen::Vector4d q1 = seq.root_quat.row(t1).transpose();
    Eigen::Vector4d dq = motion::quat_multiply(q1, motion::quat_conjugate(q0));
    if (dq(0) < 0) dq = -dq;
    const double half_angle = std::atan2(dq.tail<3>().norm(), dq(0));
    Eigen::Vector3d omega_world = Eigen::Vector3d::Zero();
    if (dq.tail<3>().norm() > 1e-12)
      omega_world = dq.tail<3>().normalized() * (2.0 * half_angle / dt);
    const Eigen::Matrix3d rt = motion::quat_to_rot(seq.root_quat.row(t).transpose());
    out.root_ang_vel_b.row(t) = (rt.transpose() * omega_world).transpose();

    out.gravity_b.row(t) = (rt.transpose() * Eigen::Vector3d(0, 0, -1)).transpose();
    out.root_height(t) = seq.root_pos(t, 2);
  }

  out.contacts = detect_contacts(out, tree, contact);
  out.contact_phase = encode_phase(out.contacts);
  out.validate();
  return out;
}

}  // namespace mimic::post
