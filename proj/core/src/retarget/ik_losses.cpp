#include "mimic/retarget/ik_losses.hpp"

#include <stdexcept>

namespace mimic::retarget {

using ad::Mat;
using ad::Tape;
using ad::Var;

void IkLossWeights::validate() const {
  if (dist < 0 || limit < 0 || disturb_start < 0 || disturb_end < 0 || sym < 0 ||
      single_dof < 0)
    throw std::invalid_argument("ik loss weights must be >= 0");
  if (disturb_sigma <= 0)
    throw std::invalid_argument("disturb sigma must be > 0");
}

Var robot_keypoints_var(Tape& t, const kin::KinematicTree& tree, Var q) {
  return kin::keypoint_positions(t, tree, q);
}

namespace {
Mat weight_sqrt_cols(const kin::KinematicTree& tree) {
  return tree.keypoints.pair_weights().array().sqrt().matrix() *
         Eigen::RowVector3d::Ones();
}
}  // namespace

Var loss_dist(Tape& t, const IkLossContext& ctx, Var q,
              const human::HumanPose& pose) {
  Var robot = robot_keypoints_var(t, ctx.tree, q);
  // the human side is constant w.r.t. the regressor
  Eigen::MatrixXd human_kp = ctx.skel.keypoint_positions(pose, ctx.shape);
  Eigen::MatrixXd target(robot.rows(), 3);
  for (Eigen::Index i = 0; i < robot.rows(); ++i)
    target.row(i) = human_kp.row(
        ctx.skel.keypoint_index(ctx.tree.keypoints.pairs[static_cast<std::size_t>(i)].human));
  Var diff = t.sub(robot, t.constant(target));
  return t.norm2(t.mul(diff, t.constant(weight_sqrt_cols(ctx.tree))));
}

Var loss_limit(Tape& t, const kin::KinematicTree& tree, Var q) {
  Var lo = t.constant(tree.lower_limits());
  Var hi = t.constant(tree.upper_limits());
  Var under = t.max0(t.sub(lo, q));
  Var over = t.max0(t.sub(q, hi));
  return t.norm2(t.add(under, over));
}

Var loss_disturb_generic(Tape& t, Var out, Var out_disturbed, double delta_norm) {
  if (delta_norm <= 0.0)
    throw std::invalid_argument("loss_disturb: zero-norm perturbation");
  return t.scale(t.norm2(t.sub(out, out_disturbed)),
                 t.scalar_const(1.0 / delta_norm));
}

Var loss_disturb(Tape& t, const IkLossContext& ctx, Var q, Var q_disturbed,
                 double delta_norm) {
  return loss_disturb_generic(t, robot_keypoints_var(t, ctx.tree, q),
                              robot_keypoints_var(t, ctx.tree, q_disturbed),
                              delta_norm);
}

Var loss_sym(Tape& t, const IkLossContext& ctx, Var q, Var q_of_mirrored) {
  Var kp = robot_keypoints_var(t, ctx.tree, q);
  // mirror = row permutation plus lateral-column sign flip, both linear
  const auto n = kp.rows();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    perm[static_cast<std::size_t>(i)] = ctx.sym.keypoint_perm[static_cast<std::size_t>(i)];
  Mat sign = Mat::Ones(n, 3);
  sign.col(ctx.sym.lateral_axis).setConstant(-1.0);
  Var mirrored = t.mul(t.gather_rows(kp, perm), t.constant(sign));
  Var kp_m = robot_keypoints_var(t, ctx.tree, q_of_mirrored);
  return t.norm2(t.sub(mirrored, kp_m));
}

Var loss_single_dof(Tape& t, const std::vector<kin::SingleDofEntry>& dofs, Var q,
                    const human::HumanPose& pose) {
  if (dofs.empty()) return t.scalar_const(0.0);
  human::Skeleton skel;  // fixed topology, joint lookup only
  std::vector<Eigen::Index> idx;
  Eigen::VectorXd target(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    idx.push_back(dofs[i].dof);
    target(static_cast<Eigen::Index>(i)) =
        pose.aa(skel.joint_index(dofs[i].human_joint), dofs[i].axis);
  }
  Var picked = t.gather_rows(q, std::move(idx));
  return t.norm2(t.sub(picked, t.constant(target)));
}

}  // namespace mimic::retarget
