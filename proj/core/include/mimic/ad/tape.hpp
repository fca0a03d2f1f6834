#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace mimic::ad {

using Mat = Eigen::MatrixXd;

class Tape;

/// Handle to a matrix-valued node on a tape. Scalars are 1x1 matrices.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  /// Gradient of the last backward() output w.r.t. this node.
  /// Zero-sized until backward() has touched the node.
  Mat grad() const;
  double scalar() const { return value()(0, 0); }

  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Recorded reverse-mode computation. One tape per loss evaluation, one
/// tape per worker; nodes are append-only and replayed in reverse by
/// backward(). Leaves created with requires-grad accumulate gradients,
/// constants are skipped entirely.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // ---- inputs -----------------------------------------------------------
  Var leaf(Mat value);             // gradient-tracked input
  Var constant(Mat value);         // no gradient ever accumulated
  Var scalar_leaf(double v);
  Var scalar_const(double v);

  // ---- arithmetic -------------------------------------------------------
  Var add(Var a, Var b);           // same shape
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);           // elementwise, same shape
  Var div(Var a, Var b);           // elementwise, same shape
  Var neg(Var a);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var scale(Var a, Var s);         // s is 1x1
  Var add_scalar(Var a, Var s);    // s is 1x1, added to every entry
  Var add_rowvec(Var m, Var r);    // r is 1xC, added to every row of m
  Var mul_rowvec(Var m, Var r);    // r is 1xC, multiplied into every row

  // ---- elementwise functions --------------------------------------------
  Var square(Var a);
  Var sqrt_(Var a);
  Var exp_(Var a);
  Var log_(Var a);
  Var sin_(Var a);
  Var cos_(Var a);
  Var tanh_(Var a);
  Var gelu(Var a);                 // tanh approximation
  Var silu(Var a);
  Var max0(Var a);                 // max(x, 0), subgradient 0 at the kink
  Var clamp(Var a, double lo, double hi);  // subgradient 0 on boundaries
  Var pow_(Var a, double p);

  // ---- reductions -------------------------------------------------------
  Var sum(Var a);                  // 1x1
  Var mean(Var a);                 // 1x1
  Var dot(Var a, Var b);           // sum(a .* b), 1x1
  Var norm2(Var a);                // Euclidean norm, subgradient 0 at origin
  Var mean_rows(Var a);            // 1xC column means (mean pooling)

  // ---- shape ------------------------------------------------------------
  /// Row-major reinterpretation to (rows, cols); sizes must agree.
  Var reshape_rows(Var a, Eigen::Index rows, Eigen::Index cols);
  Var block(Var a, Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  /// out[i,:] = a[index[i],:]
  Var gather_rows(Var a, std::vector<Eigen::Index> index);

  // ---- normalization / attention ----------------------------------------
  /// Per-row x / sqrt(mean(x^2) + eps). Gain is applied by callers.
  Var rms_norm_rows(Var a, double eps = 1e-8);
  Var softmax_rows(Var a);

  /// Multi-head scaled dot-product attention over per-sample token blocks.
  /// q,k,v are (batch*seq, d) with row b*seq+s holding token s of sample b.
  /// key_keep is (batch, seq): 1 = attend, 0 = exclude from max/exp/sum so
  /// masked content never enters any output arithmetic.
  /// Attention probabilities are recorded and readable via attention_probs().
  Var attention(Var q, Var k, Var v, int heads, const Mat& key_keep);
  /// Probabilities of attention node `id`: batch*heads matrices of seq x seq.
  const std::vector<Mat>& attention_probs(Var attn_out) const;

  // ---- 3-vector geometry helpers ----------------------------------------
  Var skew(Var v3);                // 3x1 -> 3x3 cross-product matrix
  /// sin(theta)/theta as a function of u = theta^2 (series near 0)
  Var sinc_of_sq(Var u);
  /// (1 - cos(theta))/theta^2 as a function of u = theta^2
  Var versine_of_sq(Var u);

  // ---- engine ------------------------------------------------------------
  /// Reverse sweep from `output` (must be 1x1). Gradients of leaves are
  /// readable afterwards via Var::grad(). Repeated calls re-seed.
  void backward(Var output);
  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;                       // lazily allocated
    bool requires_grad = false;
    bool touched = false;
    std::function<void()> backprop; // empty for inputs
    std::vector<Mat> attn_probs;    // only for attention nodes
  };

  Var make(Mat value, bool requires_grad, std::function<void()> backprop);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id())]; }
  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id())]; }
  Mat& grad_buf(int id);
  void accumulate(int id, const Mat& g);

  std::vector<Node> nodes_;

  friend class Var;
};

}  // namespace mimic::ad
