#include "mimic/motion/motion_sequence.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic::motion {

void MotionSequence::validate() const {
  const Eigen::Index n = frames();
  auto check = [n](const Eigen::MatrixXd& m, const char* what) {
    if (m.size() > 0 && m.rows() != n)
      throw std::invalid_argument(std::string("motion sequence: ") + what +
                                  " frame count mismatch");
  };
  check(root_pos, "root_pos");
  check(root_quat, "root_quat");
  check(joint_vel, "joint_vel");
  check(root_lin_vel_b, "root_lin_vel_b");
  check(root_ang_vel_b, "root_ang_vel_b");
  check(gravity_b, "gravity_b");
  check(contacts, "contacts");
  check(contact_phase, "contact_phase");
  if (root_height.size() > 0 && root_height.size() != n)
    throw std::invalid_argument("motion sequence: root_height frame count mismatch");
  if (rate <= 0.0) throw std::invalid_argument("motion sequence: rate must be > 0");
  if (contact_phase.size() > 0) {
    for (Eigen::Index t = 0; t < n; ++t)
      for (Eigen::Index f = 0; f + 1 < contact_phase.cols(); f += 2) {
        const double c = contact_phase(t, f), s = contact_phase(t, f + 1);
        if (std::abs(c * c + s * s - 1.0) > 1e-9)
          throw std::invalid_argument("motion sequence: phase off the unit circle");
      }
  }
  if (cycle) {
    const auto [i, j] = *cycle;
    if (!(0 <= i && i < j && j < n))
      throw std::invalid_argument("motion sequence: bad cycle indices");
    if (5 * (j - i) < n)
      throw std::invalid_argument("motion sequence: cycle shorter than 0.2 n");
  }
}

Eigen::Vector4d quat_identity() { return {1.0, 0.0, 0.0, 0.0}; }

Eigen::Vector4d quat_normalize(const Eigen::Vector4d& q) {
  const double n = q.norm();
  return n > 0 ? Eigen::Vector4d(q / n) : quat_identity();
}

Eigen::Vector4d quat_multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return {a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3),
          a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2),
          a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1),
          a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0)};
}

Eigen::Vector4d quat_conjugate(const Eigen::Vector4d& q) {
  return {q(0), -q(1), -q(2), -q(3)};
}

Eigen::Matrix3d quat_to_rot(const Eigen::Vector4d& q) {
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Vector4d quat_from_yaw_pitch(double yaw, double pitch) {
  // R = Rz(yaw) * Ry(pitch)
  const Eigen::Vector4d qz{std::cos(yaw / 2), 0, 0, std::sin(yaw / 2)};
  const Eigen::Vector4d qy{std::cos(pitch / 2), 0, std::sin(pitch / 2), 0};
  return quat_multiply(qz, qy);
}

Eigen::Vector4d quat_slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                           double t) {
  Eigen::Vector4d b2 = b;
  double dot = a.dot(b);
  if (dot < 0.0) {
    b2 = -b;
    dot = -dot;
  }
  if (dot > 0.9995) return quat_normalize(a + t * (b2 - a));  // nearly parallel
  const double theta = std::acos(std::min(1.0, dot));
  const double s = std::sin(theta);
  return quat_normalize((std::sin((1 - t) * theta) / s) * a +
                        (std::sin(t * theta) / s) * b2);
}

}  // namespace mimic::motion
