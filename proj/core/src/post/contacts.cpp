#include <cmath>
#include <stdexcept>

#include "mimic/kin/forward_kinematics.hpp"
#include "mimic/post/postprocess.hpp"

namespace mimic::post {

using motion::MotionSequence;

namespace {

std::vector<int> foot_links(const kin::KinematicTree& tree) {
  std::vector<int> feet;
  for (const auto& pair : tree.keypoints.pairs)
    if (pair.human.find("Ankle") != std::string::npos) feet.push_back(pair.link);
  if (feet.empty())
    throw std::invalid_argument("detect_contacts: no foot keypoints in the map");
  return feet;
}

// world foot positions per frame (n x 3*feet)
Eigen::MatrixXd foot_positions(const MotionSequence& seq,
                               const kin::KinematicTree& tree,
                               const std::vector<int>& feet) {
  Eigen::MatrixXd out(seq.frames(), 3 * static_cast<Eigen::Index>(feet.size()));
  for (Eigen::Index t = 0; t < seq.frames(); ++t) {
    kin::BasePose base;
    base.position = seq.root_pos.row(t).transpose();
    base.rotation = motion::quat_to_rot(seq.root_quat.row(t).transpose());
    auto lp = kin::forward_kinematics(tree, seq.joint_pos.row(t).transpose(), base);
    for (std::size_t f = 0; f < feet.size(); ++f)
      out.block<1, 3>(t, 3 * static_cast<Eigen::Index>(f)) =
          lp.pos[static_cast<std::size_t>(feet[f])].transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd detect_contacts(const MotionSequence& seq,
                                const kin::KinematicTree& tree,
                                const ContactConfig& config) {
  const auto feet = foot_links(tree);
  const Eigen::MatrixXd pos = foot_positions(seq, tree, feet);
  const Eigen::Index n = seq.frames();
  const double dt = 1.0 / seq.rate;

  Eigen::MatrixXd flags(n, static_cast<Eigen::Index>(feet.size()));
  for (std::size_t f = 0; f < feet.size(); ++f) {
    const auto c = 3 * static_cast<Eigen::Index>(f);
    double h_thresh;
    if (config.height_thresh) {
      h_thresh = *config.height_thresh;
    } else {
      h_thresh = pos.col(c + 2).minCoeff() + 0.05;
    }
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index t0 = std::max<Eigen::Index>(0, t - 1);
      const Eigen::Index t1 = std::min(n - 1, t + 1);
      const double speed = (pos.block<1, 3>(t1, c) - pos.block<1, 3>(t0, c)).norm() /
                           (static_cast<double>(t1 - t0) * dt);
      const bool contact = speed < config.vel_thresh && pos(t, c + 2) < h_thresh;
      flags(t, static_cast<Eigen::Index>(f)) = contact ? 1.0 : 0.0;
    }
  }
  return flags;
}

Eigen::MatrixXd encode_phase(const Eigen::MatrixXd& flags) {
  const Eigen::Index n = flags.rows();
  Eigen::MatrixXd phase(n, 2 * flags.cols());
  for (Eigen::Index f = 0; f < flags.cols(); ++f) {
    double base = flags(0, f) != 0.0 ? 0.0 : M_PI;
    Eigen::Index seg_start = 0;
    while (seg_start < n) {
      Eigen::Index seg_end = seg_start;
      while (seg_end + 1 < n && flags(seg_end + 1, f) == flags(seg_start, f))
        ++seg_end;
      const auto len = static_cast<double>(seg_end - seg_start + 1);
      for (Eigen::Index t = seg_start; t <= seg_end; ++t) {
        const double phi =
            base + M_PI * static_cast<double>(t - seg_start) / len;
        phase(t, 2 * f) = std::cos(phi);
        phase(t, 2 * f + 1) = std::sin(phi);
      }
      base += M_PI;  // next segment continues the cycle
      seg_start = seg_end + 1;
    }
  }
  return phase;
}

}  // namespace mimic::post
