#include "mimic/shapefit/shape_fit.hpp"

#include <cmath>
#include <stdexcept>

#include "mimic/human/correspondence.hpp"

namespace mimic::shapefit {

using ad::Mat;
using ad::Tape;
using ad::Var;
using human::HumanPose;
using human::ShapeParams;
using human::Skeleton;

namespace {

// robot keypoints (constant per pair), ordered like the expanded map pairs
Eigen::MatrixXd robot_keypoints(const kin::KinematicTree& tree,
                                const PairedPose& pair) {
  auto lp = kin::forward_kinematics(tree, pair.robot_q, pair.robot_base);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(tree.keypoints.pairs.size()), 3);
  for (std::size_t i = 0; i < tree.keypoints.pairs.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        lp.pos[static_cast<std::size_t>(tree.keypoints.pairs[i].link)].transpose();
  return out;
}

// reindex skeleton keypoints to the map's pair order
std::vector<Eigen::Index> human_row_order(const kin::KinematicTree& tree,
                                          const Skeleton& skel) {
  std::vector<Eigen::Index> order;
  for (const auto& p : tree.keypoints.pairs) {
    const int k = skel.keypoint_index(p.human);
    if (k < 0)
      throw std::invalid_argument("fit_shape: keypoint '" + p.human +
                                  "' is not defined on the skeleton");
    order.push_back(k);
  }
  return order;
}

}  // namespace

FitResult fit_shape(const kin::KinematicTree& tree, const Skeleton& skel,
                    const std::vector<PairedPose>& pairs, const ShapeParams& init,
                    const FitConfig& config) {
  if (pairs.empty()) throw std::invalid_argument("fit_shape: empty pair set");
  init.validate();
  for (const auto& p : pairs) {
    if ((p.robot_q.array() < tree.lower_limits().array() - 1e-9).any() ||
        (p.robot_q.array() > tree.upper_limits().array() + 1e-9).any())
      throw std::invalid_argument("fit_shape: paired robot vector outside limits");
  }

  const auto order = human_row_order(tree, skel);
  const Eigen::VectorXd weights = tree.keypoints.pair_weights();

  std::vector<Eigen::MatrixXd> targets;
  targets.reserve(pairs.size());
  for (const auto& p : pairs) targets.push_back(robot_keypoints(tree, p));

  Mat alpha = Mat::Constant(1, 1, init.alpha);
  Mat beta = init.beta;
  Mat delta = init.delta;

  ad::OptimizerState state;
  FitResult result;
  result.shape = init;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int it = 0; it < config.iterations; ++it) {
    Tape tape;
    Var a = tape.leaf(alpha);
    Var b = tape.leaf(beta);
    Var d = tape.leaf(delta);

    // sqrt(w) folded into the residual so the per-pose term is a plain
    // Euclidean norm (subgradient 0 at a perfect fit)
    Eigen::MatrixXd w_sqrt =
        weights.array().sqrt().matrix() * Eigen::RowVector3d::Ones();
    Var data_loss = tape.scalar_const(0.0);
    for (std::size_t m = 0; m < pairs.size(); ++m) {
      Var kps = skel.keypoint_positions(
          tape, tape.constant(pairs[m].pose.flattened()), a, b, d);
      Var picked = tape.gather_rows(kps, order);
      Var diff = tape.sub(picked, tape.constant(targets[m]));
      data_loss =
          tape.add(data_loss, tape.norm2(tape.mul(diff, tape.constant(w_sqrt))));
    }
    Var reg = tape.scale(
        tape.add(tape.sum(tape.square(tape.add_scalar(b, tape.scalar_const(-1.0)))),
                 tape.sum(tape.square(d))),
        tape.scalar_const(config.regularization));
    Var loss = tape.add(data_loss, reg);

    const double loss_v = loss.value()(0, 0);
    if (!std::isfinite(loss_v))
      throw std::runtime_error("fit_shape: non-finite loss at iteration " +
                               std::to_string(it));
    if (loss_v < best_loss) {
      best_loss = loss_v;
      result.shape.alpha = alpha(0, 0);
      result.shape.beta = beta;
      result.shape.delta = delta;
    }
    if (it % config.milestone_interval == 0) result.milestones.push_back(best_loss);

    tape.backward(loss);
    const bool warmup =
        it < static_cast<int>(config.alpha_warmup * config.iterations);
    if (warmup) {
      std::vector<Mat> grads = {a.grad()};
      std::vector<Mat*> params = {&alpha};
      ad::optimizer_step(params, std::move(grads), config.optimizer, state);
    } else {
      if (state.m.size() == 1) state = {};  // leaving the alpha-only phase
      std::vector<Mat> grads = {a.grad(), b.grad(), d.grad()};
      std::vector<Mat*> params = {&alpha, &beta, &delta};
      ad::optimizer_step(params, std::move(grads), config.optimizer, state);
    }
    alpha(0, 0) = std::max(alpha(0, 0), 1e-4);
    beta = beta.cwiseMax(1e-3);
    ++result.iterations;
  }
  result.milestones.push_back(best_loss);

  auto [mx, mean] = fit_residual(tree, skel, pairs, result.shape);
  result.residual_max = mx;
  result.residual_mean = mean;
  return result;
}

std::pair<double, double> fit_residual(const kin::KinematicTree& tree,
                                       const Skeleton& skel,
                                       const std::vector<PairedPose>& pairs,
                                       const ShapeParams& shape) {
  const auto order = human_row_order(tree, skel);
  double mx = 0.0, sum = 0.0;
  long count = 0;
  for (const auto& p : pairs) {
    Eigen::MatrixXd hm = skel.keypoint_positions(p.pose, shape);
    Eigen::MatrixXd hn = robot_keypoints(tree, p);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double d =
          (hm.row(order[i]) - hn.row(static_cast<Eigen::Index>(i))).norm();
      mx = std::max(mx, d);
      sum += d;
      ++count;
    }
  }
  return {mx, sum / static_cast<double>(count)};
}

std::vector<PairedPose> default_pair_set(const kin::KinematicTree& tree,
                                         const Skeleton& skel) {
  auto corr = human::derive_correspondence(tree, skel);
  std::vector<PairedPose> pairs;

  PairedPose rest;
  rest.robot_q = Eigen::VectorXd::Zero(tree.dof_count);
  rest.pose = human::pose_from_joints(corr, rest.robot_q);
  pairs.push_back(std::move(rest));

  // arms-forward key frame, the planar analog of a T-pose
  PairedPose key;
  key.robot_q = Eigen::VectorXd::Zero(tree.dof_count);
  for (const auto& link : tree.links) {
    if (link.joint.dof < 0) continue;
    if (link.joint.name.find("shoulder") != std::string::npos)
      key.robot_q(link.joint.dof) = -M_PI / 2.0;
  }
  key.robot_q = tree.clamp_to_limits(key.robot_q);
  key.pose = human::pose_from_joints(corr, key.robot_q);
  pairs.push_back(std::move(key));
  return pairs;
}

}  // namespace mimic::shapefit
