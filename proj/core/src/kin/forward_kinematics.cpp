#include "mimic/kin/forward_kinematics.hpp"

#include <stdexcept>

namespace mimic::kin {

using ad::Mat;
using ad::Tape;
using ad::Var;

LinkPoses forward_kinematics(const KinematicTree& tree, const Eigen::VectorXd& q,
                             const BasePose& base) {
  if (q.size() != tree.dof_count)
    throw std::invalid_argument("forward_kinematics: joint vector length");
  LinkPoses out;
  out.pos.resize(tree.links.size());
  out.rot.resize(tree.links.size());
  out.pos[0] = base.position;
  out.rot[0] = base.rotation;
  for (std::size_t i = 1; i < tree.links.size(); ++i) {
    const Link& link = tree.links[i];
    const auto p = static_cast<std::size_t>(link.parent);
    Eigen::Matrix3d r = out.rot[p] * link.joint.origin_rot;
    Eigen::Vector3d t = out.pos[p] + out.rot[p] * link.joint.origin_xyz;
    if (link.joint.dof >= 0)
      r = r * Eigen::AngleAxisd(q(link.joint.dof), link.joint.axis).toRotationMatrix();
    out.pos[i] = t;
    out.rot[i] = r;
  }
  return out;
}

Eigen::MatrixXd keypoint_positions(const KinematicTree& tree,
                                   const Eigen::VectorXd& q, const BasePose& base) {
  LinkPoses lp = forward_kinematics(tree, q, base);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tree.keypoints.pairs.size()), 3);
  for (std::size_t i = 0; i < tree.keypoints.pairs.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        lp.pos[static_cast<std::size_t>(tree.keypoints.pairs[i].link)].transpose();
  return out;
}

Var rotation_about_axis(Tape& tape, const Eigen::Vector3d& axis, Var angle) {
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  Var kk = tape.constant(k);
  Var kk2 = tape.constant(k * k);
  Var s = tape.sin_(angle);
  Var one_minus_c = tape.sub(tape.scalar_const(1.0), tape.cos_(angle));
  Var r = tape.add(tape.constant(Eigen::Matrix3d::Identity()),
                   tape.add(tape.scale(kk, s), tape.scale(kk2, one_minus_c)));
  return r;
}

Var rotation_from_angle_axis(Tape& tape, Var aa) {
  if (aa.rows() != 3 || aa.cols() != 1)
    throw std::invalid_argument("rotation_from_angle_axis: need 3x1");
  Var u = tape.dot(aa, aa);               // theta^2
  Var a = tape.sinc_of_sq(u);             // sin(theta)/theta
  Var b = tape.versine_of_sq(u);          // (1-cos(theta))/theta^2
  Var k = tape.skew(aa);
  Var k2 = tape.matmul(k, k);
  return tape.add(tape.constant(Eigen::Matrix3d::Identity()),
                  tape.add(tape.scale(k, a), tape.scale(k2, b)));
}

DiffLinkPoses forward_kinematics(Tape& tape, const KinematicTree& tree, Var q,
                                 Var base_pos, Var base_rot) {
  if (q.rows() != tree.dof_count || q.cols() != 1)
    throw std::invalid_argument("forward_kinematics: joint vector length");
  DiffLinkPoses out;
  out.pos.resize(tree.links.size());
  out.rot.resize(tree.links.size());
  out.pos[0] = base_pos;
  out.rot[0] = base_rot;
  for (std::size_t i = 1; i < tree.links.size(); ++i) {
    const Link& link = tree.links[i];
    const auto p = static_cast<std::size_t>(link.parent);
    Var r = tape.matmul(out.rot[p], tape.constant(link.joint.origin_rot));
    Var t = tape.add(out.pos[p],
                     tape.matmul(out.rot[p], tape.constant(link.joint.origin_xyz)));
    if (link.joint.dof >= 0) {
      Var angle = tape.block(q, link.joint.dof, 0, 1, 1);
      r = tape.matmul(r, rotation_about_axis(tape, link.joint.axis, angle));
    }
    out.pos[i] = t;
    out.rot[i] = r;
  }
  return out;
}

Var keypoint_positions(Tape& tape, const KinematicTree& tree, Var q) {
  Var base_pos = tape.constant(Eigen::Vector3d::Zero());
  Var base_rot = tape.constant(Eigen::Matrix3d::Identity());
  DiffLinkPoses lp = forward_kinematics(tape, tree, q, base_pos, base_rot);
  std::vector<Var> rows;
  rows.reserve(tree.keypoints.pairs.size());
  for (const auto& pair : tree.keypoints.pairs)
    rows.push_back(tape.transpose(lp.pos[static_cast<std::size_t>(pair.link)]));
  return tape.concat_rows(rows);
}

}  // namespace mimic::kin
