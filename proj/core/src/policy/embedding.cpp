#include "mimic/policy/embedding.hpp"

#include <stdexcept>

namespace mimic::policy {

using ad::Mat;
using ad::Tape;
using ad::Var;

void ObservationSpec::validate() const {
  if (groups.empty()) throw std::invalid_argument("observation spec: no groups");
  for (const auto& g : groups) {
    if (g.dim <= 0 || g.history <= 0)
      throw std::invalid_argument("observation spec: term dims must be positive");
    for (const auto& other : groups)
      if (&g != &other && g.name == other.name)
        throw std::invalid_argument("observation spec: duplicate group '" +
                                    g.name + "'");
  }
  if (mode == EmbeddingMode::Basic && basic_seq_len <= 0)
    throw std::invalid_argument("observation spec: basic_seq_len must be positive");
}

void BasicEmbedding::init(const ObservationSpec& spec, int d_model,
                          RngStream& rng) {
  spec.validate();
  seq_len_ = spec.basic_seq_len;
  d_model_ = d_model;
  proj_.init(static_cast<Eigen::Index>(seq_len_) * d_model, spec.flat_dim(), rng);
  pos_ = 0.02 * nn::xavier(seq_len_, d_model, rng);
}

Var BasicEmbedding::forward(nn::Binder& binder, Var x) const {
  Tape& t = binder.tape();
  const Eigen::Index batch = x.rows();
  Var flat = nn::linear(t, x, proj_.bind(binder));        // B x (S*d)
  Var tokens = t.reshape_rows(flat, batch * seq_len_, d_model_);
  std::vector<Eigen::Index> tile(static_cast<std::size_t>(batch * seq_len_));
  for (Eigen::Index i = 0; i < batch * seq_len_; ++i)
    tile[static_cast<std::size_t>(i)] = i % seq_len_;
  return t.add(tokens, t.gather_rows(binder(pos_), std::move(tile)));
}

void BasicEmbedding::visit(const std::string& prefix, const nn::ParamVisitor& fn) {
  proj_.visit(prefix + ".proj", fn);
  fn(prefix + ".pos", pos_);
}

void GroupedEmbedding::init(const ObservationSpec& spec, int d_model,
                            RngStream& rng) {
  spec.validate();
  d_model_ = d_model;
  groups_.clear();
  for (const auto& g : spec.groups) {
    GroupParams p;
    p.spec = g;
    p.conv_w = Mat::Constant(g.history, g.dim, 1.0 / g.history);
    p.conv_b = Mat::Zero(1, g.dim);
    p.gate.init(d_model, g.dim, rng);
    p.up.init(d_model, g.dim, rng);
    groups_.push_back(std::move(p));
  }
  pos_ = 0.02 * nn::xavier(static_cast<Eigen::Index>(groups_.size()), d_model, rng);
}

Var GroupedEmbedding::forward(nn::Binder& binder, Var x) const {
  Tape& t = binder.tape();
  const Eigen::Index batch = x.rows();
  const auto n_groups = static_cast<Eigen::Index>(groups_.size());

  std::vector<Var> group_tokens;  // each B x d_model
  Eigen::Index col = 0;
  for (auto& g : groups_) {
    Var conv_w = binder(g.conv_w);
    // depthwise temporal convolution across the history stack
    Var collapsed;
    for (int h = 0; h < g.spec.history; ++h) {
      Var slice = t.block(x, 0, col + static_cast<Eigen::Index>(h) * g.spec.dim,
                          batch, g.spec.dim);
      Var weighted = t.mul_rowvec(slice, t.block(conv_w, h, 0, 1, g.spec.dim));
      collapsed = h == 0 ? weighted : t.add(collapsed, weighted);
    }
    collapsed = t.add_rowvec(collapsed, binder(g.conv_b));
    Var gated = t.mul(t.silu(nn::linear(t, collapsed, g.gate.bind(binder))),
                      nn::linear(t, collapsed, g.up.bind(binder)));
    group_tokens.push_back(gated);
    col += g.spec.flat_dim();
  }

  // interleave (B x d) group outputs into per-sample token blocks
  Var stacked = t.concat_rows(group_tokens);  // (G*B) x d, group-major
  std::vector<Eigen::Index> order(static_cast<std::size_t>(batch * n_groups));
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index g = 0; g < n_groups; ++g)
      order[static_cast<std::size_t>(b * n_groups + g)] = g * batch + b;
  Var tokens = t.gather_rows(stacked, std::move(order));

  std::vector<Eigen::Index> tile(static_cast<std::size_t>(batch * n_groups));
  for (Eigen::Index i = 0; i < batch * n_groups; ++i)
    tile[static_cast<std::size_t>(i)] = i % n_groups;
  return t.add(tokens, t.gather_rows(binder(pos_), std::move(tile)));
}

void GroupedEmbedding::visit(const std::string& prefix,
                             const nn::ParamVisitor& fn) {
  for (auto& g : groups_) {
    const std::string p = prefix + "." + g.spec.name;
    fn(p + ".conv_w", g.conv_w);
    fn(p + ".conv_b", g.conv_b);
    g.gate.visit(p + ".gate", fn);
    g.up.visit(p + ".up", fn);
  }
  fn(prefix + ".pos", pos_);
}

void Embedding::init(const ObservationSpec& spec, int d_model, RngStream& rng) {
  spec_ = spec;
  if (spec.mode == EmbeddingMode::Basic)
    basic_.init(spec, d_model, rng);
  else
    grouped_.init(spec, d_model, rng);
}

Var Embedding::forward(nn::Binder& binder, Var x) const {
  if (x.cols() != spec_.flat_dim())
    throw std::invalid_argument("embedding: observation length mismatch");
  return spec_.mode == EmbeddingMode::Basic ? basic_.forward(binder, x)
                                            : grouped_.forward(binder, x);
}

void Embedding::visit(const std::string& prefix, const nn::ParamVisitor& fn) {
  if (spec_.mode == EmbeddingMode::Basic)
    basic_.visit(prefix, fn);
  else
    grouped_.visit(prefix, fn);
}

int Embedding::seq_len() const { return spec_.seq_len(); }

}  // namespace mimic::policy
