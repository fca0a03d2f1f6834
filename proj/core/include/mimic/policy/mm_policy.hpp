#pragma once

#include <filesystem>
#include <optional>

#include "mimic/nn/encoder.hpp"
#include "mimic/policy/embedding.hpp"
#include "mimic/util/json_io.hpp"

namespace mimic::policy {

struct MmPolicyConfig {
  nn::EncoderConfig encoder;
  ObservationSpec obs_spec;
  std::optional<ObservationSpec> ref_spec;  // absent = reference-free policy
  int num_dof = 0;
  double init_action_std = 1.0;

  void validate() const;
  Json to_json() const;
  static MmPolicyConfig from_json(const Json& j);
};

/// Masked two-stream transformer actor-critic. The token sequence is
/// [cls] obs [sep] ref; the key-padding mask hides the sep and reference
/// tokens of environments whose availability bit is 0, excluding them from
/// every attention sum, so masked reference content cannot influence any
/// output. Reference embedding parameters exist only when a reference spec
/// was configured.
class MmPolicy {
 public:
  void init(const MmPolicyConfig& cfg, std::uint64_t seed);

  /// Teacher-adaptation bindings: encoder base weights freeze, adapter and
  /// the actor head bind through `trainable`.
  struct TeacherBinding {
    nn::EncoderLora* lora = nullptr;
    nn::Binder* trainable = nullptr;
  };

  struct Forward {
    ad::Var action_mean;  // batch x num_dof
    ad::Var value;        // batch x 1
    ad::Var log_std;      // 1 x num_dof
    std::vector<ad::Var> attention;  // per layer, when requested
  };

  /// obs (batch x obs_flat); ref (batch x ref_flat) with per-env mask, or
  /// nullptr for reference-free evaluation (identical outputs to a fully
  /// masked batch by construction).
  Forward forward(nn::Binder& binder, const ad::Mat& obs, const ad::Mat* ref,
                  const Eigen::VectorXd* mask,
                  const TeacherBinding* teacher = nullptr,
                  bool want_attention = false) const;

  /// Evaluation helpers without gradient tracking.
  Eigen::MatrixXd act_mean(const ad::Mat& obs, const ad::Mat* ref,
                           const Eigen::VectorXd* mask) const;
  Eigen::VectorXd values(const ad::Mat& obs, const ad::Mat* ref,
                         const Eigen::VectorXd* mask) const;
  Eigen::VectorXd action_std() const;

  void visit(const nn::ParamVisitor& fn);
  long param_count() const;
  const MmPolicyConfig& config() const { return cfg_; }
  std::uint64_t param_hash() const;
  /// Hash over the weights a teacher keeps frozen (everything except the
  /// actor head, which stays trainable during adaptation).
  std::uint64_t frozen_base_hash() const;

  MmPolicy clone() const;

 private:
  MmPolicyConfig cfg_;
  Embedding obs_embed_;
  std::optional<Embedding> ref_embed_;
  mutable ad::Mat cls_, sep_;        // 1 x d_model
  nn::Encoder encoder_;
  mutable nn::Linear actor_head_;    // num_dof x d_model
  mutable nn::Linear critic_head_;   // 1 x d_model
  mutable ad::Mat log_std_;          // 1 x num_dof
};

/// base + scaling * B * A; the plain-matrix form of the adapter delta.
Eigen::MatrixXd lora_apply(const Eigen::MatrixXd& base, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b, double scaling);

void save_policy(const std::filesystem::path& path, const MmPolicy& policy,
                 std::uint64_t seed, const nn::EncoderLora* adapter = nullptr,
                 const Json& extra_config = {});
MmPolicy load_policy(const std::filesystem::path& path,
                     nn::EncoderLora* adapter_out = nullptr);

}  // namespace mimic::policy
