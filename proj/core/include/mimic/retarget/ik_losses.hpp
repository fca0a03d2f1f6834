#pragma once

#include "mimic/human/skeleton.hpp"
#include "mimic/kin/forward_kinematics.hpp"
#include "mimic/kin/symmetry.hpp"

namespace mimic::retarget {

struct IkLossWeights {
  double dist = 5000.0;
  double limit = 1000.0;
  double disturb_start = 100.0;   // annealed linearly ...
  double disturb_end = 200.0;     // ... to this value over training
  double sym = 1000.0;
  double single_dof = 1000.0;
  double disturb_sigma = 0.01;    // perturbation std is sigma * 2*pi

  double disturb_at(double progress) const {  // progress in [0, 1]
    return disturb_start + (disturb_end - disturb_start) * progress;
  }
  void validate() const;
};

/// Shared context for the per-frame loss terms.
struct IkLossContext {
  const kin::KinematicTree& tree;
  const human::Skeleton& skel;
  const human::ShapeParams& shape;
  const kin::SymmetryMap& sym;
};

/// Robot keypoints of a J x 1 joint node, stacked (num_pairs x 3).
ad::Var robot_keypoints_var(ad::Tape& t, const kin::KinematicTree& tree, ad::Var q);

/// Keypoint-distance loss: joint-weighted L2 distance between the robot
/// keypoints of q and the scaled human keypoints of the source pose.
ad::Var loss_dist(ad::Tape& t, const IkLossContext& ctx, ad::Var q,
                  const human::HumanPose& pose);

/// Limit-violation loss: || max(lo - q, 0) + max(q - hi, 0) ||_2.
ad::Var loss_limit(ad::Tape& t, const kin::KinematicTree& tree, ad::Var q);

/// Lipschitz surrogate: keypoint displacement over input displacement.
ad::Var loss_disturb(ad::Tape& t, const IkLossContext& ctx, ad::Var q,
                     ad::Var q_disturbed, double delta_norm);
/// Same ratio over arbitrary outputs; the FK-free core used by tests.
ad::Var loss_disturb_generic(ad::Tape& t, ad::Var out, ad::Var out_disturbed,
                             double delta_norm);

/// Bilateral-symmetry loss: mirrored keypoints of q against the keypoints
/// of the regressor output for the mirrored pose.
ad::Var loss_sym(ad::Tape& t, const IkLossContext& ctx, ad::Var q,
                 ad::Var q_of_mirrored);

/// Single-valid-DoF anchor: L2 difference between designated robot joints
/// and the matching human angle component.
ad::Var loss_single_dof(ad::Tape& t, const std::vector<kin::SingleDofEntry>& dofs,
                        ad::Var q, const human::HumanPose& pose);

}  // namespace mimic::retarget
