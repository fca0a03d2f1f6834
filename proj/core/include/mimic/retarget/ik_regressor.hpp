#pragma once

#include "mimic/human/skeleton.hpp"
#include "mimic/nn/encoder.hpp"

namespace mimic::retarget {

struct IkRegressorConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int robot_dofs = 0;
  int human_joints = human::kNumJoints;
};

/// Pose-to-joint-vector regressor: one token per human joint, a small
/// encoder stack, a per-token projection to the robot joint dimension and
/// mean pooling over tokens.
class IkRegressor {
 public:
  void init(const IkRegressorConfig& cfg, std::uint64_t seed);

  /// tokens is (batch*human_joints) x 3 angle-axis rows; returns batch x J.
  ad::Var forward(nn::Binder& binder, ad::Var tokens) const;

  /// Single-pose convenience evaluation without gradients.
  Eigen::VectorXd infer(const human::HumanPose& pose) const;

  /// Stacks poses into the token layout expected by forward().
  static Eigen::MatrixXd stack_tokens(const std::vector<human::HumanPose>& poses);

  void visit(const nn::ParamVisitor& fn);
  long param_count() const;
  const IkRegressorConfig& config() const { return cfg_; }

 private:
  IkRegressorConfig cfg_;
  mutable nn::Linear token_proj_;   // d x 3
  mutable ad::Mat pos_embedding_;   // human_joints x d
  nn::Encoder encoder_;
  mutable nn::Linear out_proj_;     // J x d
};

}  // namespace mimic::retarget
