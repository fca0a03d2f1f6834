#pragma once

#include <functional>
#include <unordered_map>
#include <string>
#include <vector>

#include "mimic/ad/tape.hpp"
#include "mimic/util/rng.hpp"

namespace mimic::nn {

/// Ties host parameter matrices to tape nodes for one loss evaluation.
/// Trainable parameters become leaves, frozen ones constants; after
/// backward() the gradients come out aligned with the host pointers.
class Binder {
 public:
  Binder(ad::Tape& tape, bool trainable) : tape_(tape), trainable_(trainable) {}

  /// Bind a host matrix; repeated calls return the same node so several
  /// forward passes on one tape share parameters and gradients.
  ad::Var operator()(ad::Mat& host) {
    if (auto it = index_.find(&host); it != index_.end()) return vars_[it->second];
    ad::Var v = trainable_ ? tape_.leaf(host) : tape_.constant(host);
    index_.emplace(&host, hosts_.size());
    hosts_.push_back(&host);
    vars_.push_back(v);
    return v;
  }
  /// Always-frozen binding regardless of mode (LoRA base weights).
  ad::Var frozen(ad::Mat& host) {
    if (auto it = frozen_index_.find(&host); it != frozen_index_.end())
      return frozen_vars_[it->second];
    ad::Var v = tape_.constant(host);
    frozen_index_.emplace(&host, frozen_vars_.size());
    frozen_vars_.push_back(v);
    return v;
  }

  ad::Tape& tape() { return tape_; }
  const std::vector<ad::Mat*>& hosts() const { return hosts_; }
  std::vector<ad::Mat> grads() const {
    std::vector<ad::Mat> out;
    out.reserve(vars_.size());
    for (const auto& v : vars_) out.push_back(v.grad());
    return out;
  }

 private:
  ad::Tape& tape_;
  bool trainable_;
  std::vector<ad::Mat*> hosts_;
  std::vector<ad::Var> vars_;
  std::unordered_map<ad::Mat*, std::size_t> index_;
  std::vector<ad::Var> frozen_vars_;
  std::unordered_map<ad::Mat*, std::size_t> frozen_index_;
};

using ParamVisitor = std::function<void(const std::string&, ad::Mat&)>;

inline ad::Mat xavier(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  const double s = std::sqrt(2.0 / static_cast<double>(rows + cols));
  ad::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, s);
  return m;
}

/// y = x W^T + b with x (N x in), W (out x in), b (1 x out).
struct Linear {
  ad::Mat w, b;

  void init(Eigen::Index out, Eigen::Index in, RngStream& rng) {
    w = xavier(out, in, rng);
    b = ad::Mat::Zero(1, out);
  }
  struct Bound {
    ad::Var w, b;
  };
  Bound bind(Binder& bind) { return {bind(w), bind(b)}; }
  Bound bind_frozen(Binder& bind) { return {bind.frozen(w), bind.frozen(b)}; }

  void visit(const std::string& prefix, const ParamVisitor& fn) {
    fn(prefix + ".w", w);
    fn(prefix + ".b", b);
  }
  long size() const { return w.size() + b.size(); }
};

inline ad::Var linear(ad::Tape& t, ad::Var x, const Linear::Bound& p) {
  return t.add_rowvec(t.matmul(x, t.transpose(p.w)), p.b);
}

}  // namespace mimic::nn
