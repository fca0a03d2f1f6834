#pragma once

#include <optional>

#include "mimic/nn/module.hpp"

namespace mimic::nn {

struct EncoderConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int ffn_mult = 4;

  void validate() const;
};

/// Low-rank adapter pair for one frozen weight matrix: delta = scaling*B*A.
/// B starts at zero so a fresh adapter is an exact no-op.
struct LoraPair {
  ad::Mat a;  // r x in
  ad::Mat b;  // out x r
  double scaling = 1.0;

  void init(Eigen::Index out, Eigen::Index in, int rank, double scale,
            RngStream& rng);
};

/// Adapters for every attention and FFN projection matrix of an encoder.
struct EncoderLora {
  std::vector<std::vector<LoraPair>> layers;  // [layer][q,k,v,o,ff1,ff2]
  int rank = 4;

  static EncoderLora for_encoder(const EncoderConfig& cfg, int rank,
                                 double scaling, RngStream& rng);
  void visit(const std::string& prefix, const ParamVisitor& fn);
  void bind_all(Binder& binder);  // order matches visit()
};

/// Pre-norm transformer encoder stack with RMS normalization, GELU FFN and
/// multi-head attention over per-sample token blocks.
class Encoder {
 public:
  struct Layer {
    Linear q, k, v, o, ff1, ff2;
    ad::Mat g1, g2;  // 1 x d rms gains
  };

  void init(const EncoderConfig& cfg, RngStream& rng);

  /// tokens is (batch*seq) x d_model; key_keep (batch x seq) marks which key
  /// positions may be attended. When `lora` is given the base weights bind
  /// frozen and the adapter deltas bind through `lora_binder`.
  ad::Var forward(Binder& binder, ad::Var tokens, const ad::Mat& key_keep,
                  EncoderLora* lora = nullptr, Binder* lora_binder = nullptr,
                  std::vector<ad::Var>* attention_nodes = nullptr) const;

  void visit(const std::string& prefix, const ParamVisitor& fn);
  long size() const;
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  mutable std::vector<Layer> layers_;
  mutable ad::Mat in_gain_;
  mutable ad::Mat out_gain_;
};

}  // namespace mimic::nn
