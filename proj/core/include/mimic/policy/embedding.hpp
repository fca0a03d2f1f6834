#pragma once

#include "mimic/nn/module.hpp"
#include "mimic/policy/observation_spec.hpp"

namespace mimic::policy {

/// Single affine projection reshaped to (seq_len, d_model) tokens plus
/// learned positional embeddings.
class BasicEmbedding {
 public:
  void init(const ObservationSpec& spec, int d_model, RngStream& rng);
  /// x is (batch x flat_dim); returns (batch*seq_len x d_model).
  ad::Var forward(nn::Binder& binder, ad::Var x) const;
  void visit(const std::string& prefix, const nn::ParamVisitor& fn);
  int seq_len() const { return seq_len_; }

 private:
  int seq_len_ = 0;
  int d_model_ = 0;
  mutable nn::Linear proj_;
  mutable ad::Mat pos_;  // seq_len x d_model
};

/// Per-group temporal convolution over the history stack followed by a
/// SwiGLU projection; one token per group.
class GroupedEmbedding {
 public:
  void init(const ObservationSpec& spec, int d_model, RngStream& rng);
  ad::Var forward(nn::Binder& binder, ad::Var x) const;
  void visit(const std::string& prefix, const nn::ParamVisitor& fn);
  int seq_len() const { return static_cast<int>(groups_.size()); }

 private:
  struct GroupParams {
    ObservationSpec::Group spec;
    ad::Mat conv_w;  // history x dim (depthwise kernel)
    ad::Mat conv_b;  // 1 x dim
    nn::Linear gate;  // d_model x dim
    nn::Linear up;    // d_model x dim
  };
  int d_model_ = 0;
  mutable std::vector<GroupParams> groups_;
  mutable ad::Mat pos_;  // groups x d_model
};

/// Dispatches on the spec's embedding mode.
class Embedding {
 public:
  void init(const ObservationSpec& spec, int d_model, RngStream& rng);
  ad::Var forward(nn::Binder& binder, ad::Var x) const;
  void visit(const std::string& prefix, const nn::ParamVisitor& fn);
  int seq_len() const;
  const ObservationSpec& spec() const { return spec_; }

 private:
  ObservationSpec spec_;
  BasicEmbedding basic_;
  GroupedEmbedding grouped_;
};

}  // namespace mimic::policy
