#pragma once

#include <optional>
#include <vector>

#include "mimic/ad/optim.hpp"
#include "mimic/human/skeleton.hpp"
#include "mimic/kin/forward_kinematics.hpp"
#include "mimic/kin/robot_model.hpp"

namespace mimic::shapefit {

/// One calibration pair: a human pose and the robot joint vector that is
/// supposed to place the shared keypoints at the same world locations.
struct PairedPose {
  human::HumanPose pose;
  Eigen::VectorXd robot_q;
  kin::BasePose robot_base;  // lets callers express common rigid moves
};

struct FitConfig {
  ad::OptimizerConfig optimizer = [] {
    ad::OptimizerConfig c;
    c.learning_rate = 1e-2;
    c.algorithm = ad::Algorithm::AdaptiveMoment;
    return c;
  }();
  int iterations = 2000;
  /// Small pull of beta toward 1 and delta toward 0; resolves the
  /// alpha/beta/delta scale redundancy so the global scale lands in alpha.
  double regularization = 1e-3;
  /// Fraction of the budget spent on alpha alone before the joint phase,
  /// so the global scale is found first.
  double alpha_warmup = 0.25;
  int milestone_interval = 100;
};

struct FitResult {
  human::ShapeParams shape;
  double residual_mean = 0.0;  // meters, over all pairs and keypoints
  double residual_max = 0.0;
  std::vector<double> milestones;  // best data loss reached so far
  int iterations = 0;
};

/// Calibrates the skeleton to the robot so keypoints coincide on the paired
/// poses: argmin over (alpha, beta, delta) of the joint-weighted sum of
/// keypoint distances, plus the small regularizer above.
FitResult fit_shape(const kin::KinematicTree& tree, const human::Skeleton& skel,
                    const std::vector<PairedPose>& pairs,
                    const human::ShapeParams& init, const FitConfig& config = {});

/// Residual evaluation only (max and mean keypoint distance in meters).
std::pair<double, double> fit_residual(const kin::KinematicTree& tree,
                                       const human::Skeleton& skel,
                                       const std::vector<PairedPose>& pairs,
                                       const human::ShapeParams& shape);

/// Default calibration pair set: rest pose plus an arms-forward key frame,
/// built through the robot->human joint correspondence.
std::vector<PairedPose> default_pair_set(const kin::KinematicTree& tree,
                                         const human::Skeleton& skel);

}  // namespace mimic::shapefit
