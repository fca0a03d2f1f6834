#include "mimic/ad/tape.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mimic::ad {

const Mat& Var::value() const { return tape_->node(*this).value; }

Mat Var::grad() const {
  const auto& n = tape_->node(*this);
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::make(Mat value, bool requires_grad, std::function<void()> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Mat& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad && !n.backprop) return;  // constant input
  grad_buf(id) += g;
  n.touched = true;
}

Var Tape::leaf(Mat value) { return make(std::move(value), true, nullptr); }
Var Tape::constant(Mat value) { return make(std::move(value), false, nullptr); }
Var Tape::scalar_leaf(double v) { return leaf(Mat::Constant(1, 1, v)); }
Var Tape::scalar_const(double v) { return constant(Mat::Constant(1, 1, v)); }

namespace {
void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}
void check_scalar(const Var& s, const char* op) {
  if (s.rows() != 1 || s.cols() != 1)
    throw std::invalid_argument(std::string(op) + ": expected 1x1");
}
}  // namespace

Var Tape::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  int ia = a.id(), ib = b.id();
  Var out = make(a.value() + b.value(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g);
    accumulate(ib, g);
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  int ia = a.id(), ib = b.id();
  Var out = make(a.value() - b.value(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g);
    accumulate(ib, -g);
  };
  return out;
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  int ia = a.id(), ib = b.id();
  Var out = make(a.value().cwiseProduct(b.value()), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g.cwiseProduct(nodes_[ib].value));
    accumulate(ib, g.cwiseProduct(nodes_[ia].value));
  };
  return out;
}

Var Tape::div(Var a, Var b) {
  check_same_shape(a, b, "div");
  int ia = a.id(), ib = b.id();
  Var out = make(a.value().cwiseQuotient(b.value()), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const Mat& g = nodes_[io].grad;
    const Mat& bv = nodes_[ib].value;
    accumulate(ia, g.cwiseQuotient(bv));
    accumulate(ib, -g.cwiseProduct(nodes_[io].value).cwiseQuotient(bv));
  };
  return out;
}

Var Tape::neg(Var a) {
  int ia = a.id();
  Var out = make(-a.value(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] { accumulate(ia, -nodes_[io].grad); };
  return out;
}

Var Tape::matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims");
  int ia = a.id(), ib = b.id();
  Var out = make(a.value() * b.value(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g * nodes_[ib].value.transpose());
    accumulate(ib, nodes_[ia].value.transpose() * g);
  };
  return out;
}

Var Tape::transpose(Var a) {
  int ia = a.id();
  Var out = make(a.value().transpose(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] { accumulate(ia, nodes_[io].grad.transpose()); };
  return out;
}

Var Tape::scale(Var a, Var s) {
  check_scalar(s, "scale");
  int ia = a.id(), is = s.id();
  Var out = make(a.value() * s.value()(0, 0), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, is, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g * nodes_[is].value(0, 0));
    accumulate(is, Mat::Constant(1, 1, (g.array() * nodes_[ia].value.array()).sum()));
  };
  return out;
}

Var Tape::add_scalar(Var a, Var s) {
  check_scalar(s, "add_scalar");
  int ia = a.id(), is = s.id();
  Var out = make(a.value().array() + s.value()(0, 0), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, is, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(ia, g);
    accumulate(is, Mat::Constant(1, 1, g.sum()));
  };
  return out;
}

Var Tape::add_rowvec(Var m, Var r) {
  if (r.rows() != 1 || r.cols() != m.cols())
    throw std::invalid_argument("add_rowvec: shape");
  int im = m.id(), ir = r.id();
  Var out = make(m.value().rowwise() + r.value().row(0), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, im, ir, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(im, g);
    accumulate(ir, g.colwise().sum());
  };
  return out;
}

Var Tape::mul_rowvec(Var m, Var r) {
  if (r.rows() != 1 || r.cols() != m.cols())
    throw std::invalid_argument("mul_rowvec: shape");
  int im = m.id(), ir = r.id();
  Var out = make(m.value().array().rowwise() * r.value().row(0).array(), true,
                 nullptr);
  int io = out.id();
  node(out).backprop = [this, im, ir, io] {
    const Mat& g = nodes_[io].grad;
    accumulate(im, g.array().rowwise() * nodes_[ir].value.row(0).array());
    accumulate(ir, (g.array() * nodes_[im].value.array()).colwise().sum());
  };
  return out;
}

// ---- elementwise --------------------------------------------------------

Var Tape::square(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().square(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, 2.0 * nodes_[io].grad.cwiseProduct(nodes_[ia].value));
  };
  return out;
}

Var Tape::sqrt_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().sqrt(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, (nodes_[io].grad.array() * 0.5 / nodes_[io].value.array()).matrix());
  };
  return out;
}

Var Tape::exp_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().exp(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, nodes_[io].grad.cwiseProduct(nodes_[io].value));
  };
  return out;
}

Var Tape::log_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().log(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, nodes_[io].grad.cwiseQuotient(nodes_[ia].value));
  };
  return out;
}

Var Tape::sin_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().sin(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, nodes_[io].grad.cwiseProduct(Mat(nodes_[ia].value.array().cos())));
  };
  return out;
}

Var Tape::cos_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().cos(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, -nodes_[io].grad.cwiseProduct(Mat(nodes_[ia].value.array().sin())));
  };
  return out;
}

Var Tape::tanh_(Var a) {
  int ia = a.id();
  Var out = make(a.value().array().tanh(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    accumulate(ia, nodes_[io].grad.cwiseProduct(
                       Mat(1.0 - nodes_[io].value.array().square())));
  };
  return out;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var Tape::gelu(Var a) {
  // 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
  int ia = a.id();
  Eigen::ArrayXXd x = a.value().array();
  Eigen::ArrayXXd inner = kGeluC * (x + kGeluA * x.cube());
  Eigen::ArrayXXd t = inner.tanh();
  Var out = make(0.5 * x * (1.0 + t), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, t, x] {
    Eigen::ArrayXXd dinner = kGeluC * (1.0 + 3.0 * kGeluA * x.square());
    Eigen::ArrayXXd d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t.square()) * dinner;
    accumulate(ia, nodes_[io].grad.cwiseProduct(Mat(d)));
  };
  return out;
}

Var Tape::silu(Var a) {
  int ia = a.id();
  Eigen::ArrayXXd x = a.value().array();
  Eigen::ArrayXXd s = 1.0 / (1.0 + (-x).exp());
  Var out = make(x * s, true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, s, x] {
    Eigen::ArrayXXd d = s * (1.0 + x * (1.0 - s));
    accumulate(ia, nodes_[io].grad.cwiseProduct(Mat(d)));
  };
  return out;
}

Var Tape::max0(Var a) {
  int ia = a.id();
  Var out = make(a.value().cwiseMax(0.0), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    Mat m = (nodes_[ia].value.array() > 0.0).cast<double>();
    accumulate(ia, nodes_[io].grad.cwiseProduct(m));
  };
  return out;
}

Var Tape::clamp(Var a, double lo, double hi) {
  int ia = a.id();
  Var out = make(a.value().cwiseMax(lo).cwiseMin(hi), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, lo, hi] {
    const auto& x = nodes_[ia].value.array();
    Mat m = ((x > lo) && (x < hi)).cast<double>();
    accumulate(ia, nodes_[io].grad.cwiseProduct(m));
  };
  return out;
}

Var Tape::pow_(Var a, double p) {
  int ia = a.id();
  Var out = make(a.value().array().pow(p), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, p] {
    Mat d = p * nodes_[ia].value.array().pow(p - 1.0);
    accumulate(ia, nodes_[io].grad.cwiseProduct(d));
  };
  return out;
}

// ---- reductions ---------------------------------------------------------

Var Tape::sum(Var a) {
  int ia = a.id();
  Var out = make(Mat::Constant(1, 1, a.value().sum()), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    const double g = nodes_[io].grad(0, 0);
    accumulate(ia, Mat::Constant(nodes_[ia].value.rows(), nodes_[ia].value.cols(), g));
  };
  return out;
}

Var Tape::mean(Var a) {
  int ia = a.id();
  const double n = static_cast<double>(a.value().size());
  Var out = make(Mat::Constant(1, 1, a.value().sum() / n), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, n] {
    const double g = nodes_[io].grad(0, 0) / n;
    accumulate(ia, Mat::Constant(nodes_[ia].value.rows(), nodes_[ia].value.cols(), g));
  };
  return out;
}

Var Tape::dot(Var a, Var b) {
  check_same_shape(a, b, "dot");
  int ia = a.id(), ib = b.id();
  Var out = make(Mat::Constant(1, 1, (a.value().array() * b.value().array()).sum()),
                 true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, ib, io] {
    const double g = nodes_[io].grad(0, 0);
    accumulate(ia, g * nodes_[ib].value);
    accumulate(ib, g * nodes_[ia].value);
  };
  return out;
}

Var Tape::norm2(Var a) {
  int ia = a.id();
  const double n = a.value().norm();
  Var out = make(Mat::Constant(1, 1, n), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, n] {
    if (n <= 0.0) return;  // subgradient 0 at the origin
    accumulate(ia, (nodes_[io].grad(0, 0) / n) * nodes_[ia].value);
  };
  return out;
}

Var Tape::mean_rows(Var a) {
  int ia = a.id();
  const double n = static_cast<double>(a.rows());
  Var out = make(a.value().colwise().mean(), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, n] {
    const Mat& g = nodes_[io].grad;  // 1 x C
    Mat full = Mat::Ones(nodes_[ia].value.rows(), 1) * (g / n);
    accumulate(ia, full);
  };
  return out;
}

// ---- shape ----------------------------------------------------------------

Var Tape::reshape_rows(Var a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.rows() * a.cols())
    throw std::invalid_argument("reshape_rows: size mismatch");
  int ia = a.id();
  const Mat& av = a.value();
  Mat v(rows, cols);
  {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < av.rows(); ++i)
      for (Eigen::Index j = 0; j < av.cols(); ++j) {
        v(k / cols, k % cols) = av(i, j);
        ++k;
      }
  }
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, cols] {
    const Mat& g = nodes_[io].grad;
    const Mat& av2 = nodes_[ia].value;
    Mat ga(av2.rows(), av2.cols());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < av2.rows(); ++i)
      for (Eigen::Index j = 0; j < av2.cols(); ++j) {
        ga(i, j) = g(k / cols, k % cols);
        ++k;
      }
    accumulate(ia, ga);
  };
  return out;
}

Var Tape::block(Var a, Eigen::Index r0, Eigen::Index c0, Eigen::Index nr,
                Eigen::Index nc) {
  int ia = a.id();
  Var out = make(a.value().block(r0, c0, nr, nc), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, r0, c0, nr, nc] {
    Mat g = Mat::Zero(nodes_[ia].value.rows(), nodes_[ia].value.cols());
    g.block(r0, c0, nr, nc) = nodes_[io].grad;
    accumulate(ia, g);
  };
  return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: cols");
    rows += p.rows();
  }
  Mat v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offs;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    v.middleRows(r, p.rows()) = p.value();
    ids.push_back(p.id());
    offs.push_back(r);
    r += p.rows();
  }
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ids, offs, io] {
    const Mat& g = nodes_[io].grad;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Mat& pv = nodes_[static_cast<std::size_t>(ids[i])].value;
      accumulate(ids[i], g.middleRows(offs[i], pv.rows()));
    }
  };
  return out;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: rows");
    cols += p.cols();
  }
  Mat v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offs;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    v.middleCols(c, p.cols()) = p.value();
    ids.push_back(p.id());
    offs.push_back(c);
    c += p.cols();
  }
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ids, offs, io] {
    const Mat& g = nodes_[io].grad;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Mat& pv = nodes_[static_cast<std::size_t>(ids[i])].value;
      accumulate(ids[i], g.middleCols(offs[i], pv.cols()));
    }
  };
  return out;
}

Var Tape::gather_rows(Var a, std::vector<Eigen::Index> index) {
  int ia = a.id();
  Mat v(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, index = std::move(index)] {
    const Mat& g = nodes_[io].grad;
    Mat ga = Mat::Zero(nodes_[ia].value.rows(), nodes_[ia].value.cols());
    for (std::size_t i = 0; i < index.size(); ++i)
      ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
    accumulate(ia, ga);
  };
  return out;
}

// ---- normalization / attention --------------------------------------------

Var Tape::rms_norm_rows(Var a, double eps) {
  int ia = a.id();
  const Mat& x = a.value();
  const double d = static_cast<double>(x.cols());
  Eigen::VectorXd rms = ((x.array().square().rowwise().sum() / d) + eps).sqrt();
  Mat v = x.array().colwise() / rms.array();
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, rms, d] {
    const Mat& g = nodes_[io].grad;
    const Mat& x2 = nodes_[ia].value;
    // y_j = x_j / r, r = sqrt(mean(x^2)+eps)
    // dL/dx = g/r - x * (g . x) / (d r^3)
    Eigen::VectorXd gx = (g.array() * x2.array()).rowwise().sum();
    Mat ga = (g.array().colwise() / rms.array()) -
             (x2.array().colwise() * (gx.array() / (d * rms.array().cube())));
    accumulate(ia, ga);
  };
  return out;
}

Var Tape::softmax_rows(Var a) {
  int ia = a.id();
  const Mat& x = a.value();
  Mat v(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::ArrayXd e = (x.row(i).array() - x.row(i).maxCoeff()).exp();
    v.row(i) = e / e.sum();
  }
  Var out = make(std::move(v), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    const Mat& g = nodes_[io].grad;
    const Mat& p = nodes_[io].value;
    Mat ga(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      double s = (g.row(i).array() * p.row(i).array()).sum();
      ga.row(i) = p.row(i).array() * (g.row(i).array() - s);
    }
    accumulate(ia, ga);
  };
  return out;
}

Var Tape::attention(Var q, Var k, Var v, int heads, const Mat& key_keep) {
  check_same_shape(q, k, "attention");
  check_same_shape(q, v, "attention");
  const Eigen::Index batch = key_keep.rows();
  const Eigen::Index seq = key_keep.cols();
  const Eigen::Index d = q.cols();
  if (q.rows() != batch * seq) throw std::invalid_argument("attention: rows");
  if (d % heads != 0) throw std::invalid_argument("attention: heads");
  const Eigen::Index hd = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(hd));

  int iq = q.id(), ik = k.id(), iv = v.id();
  Mat out_v = Mat::Zero(batch * seq, d);
  std::vector<Mat> probs;
  probs.reserve(static_cast<std::size_t>(batch * heads));
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index h = 0; h < heads; ++h) {
      Mat qb = q.value().block(b * seq, h * hd, seq, hd);
      Mat kb = k.value().block(b * seq, h * hd, seq, hd);
      Mat vb = v.value().block(b * seq, h * hd, seq, hd);
      Mat scores = qb * kb.transpose() * inv_scale;
      Mat p = Mat::Zero(seq, seq);
      for (Eigen::Index i = 0; i < seq; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < seq; ++j)
          if (key_keep(b, j) != 0.0) mx = std::max(mx, scores(i, j));
        double z = 0.0;
        if (std::isfinite(mx)) {
          for (Eigen::Index j = 0; j < seq; ++j)
            if (key_keep(b, j) != 0.0) {
              p(i, j) = std::exp(scores(i, j) - mx);
              z += p(i, j);
            }
          if (z > 0.0) p.row(i) /= z;
        }
      }
      out_v.block(b * seq, h * hd, seq, hd) = p * vb;
      probs.push_back(std::move(p));
    }
  }
  Var out = make(std::move(out_v), true, nullptr);
  int io = out.id();
  node(out).attn_probs = std::move(probs);
  node(out).backprop = [this, iq, ik, iv, io, batch, seq, hd, heads, inv_scale,
                        key_keep] {
    const Mat& g = nodes_[io].grad;
    const auto& probs2 = nodes_[io].attn_probs;
    Mat gq = Mat::Zero(batch * seq, heads * hd);
    Mat gk = gq, gv = gq;
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (Eigen::Index h = 0; h < heads; ++h) {
        const Mat& p = probs2[static_cast<std::size_t>(b * heads + h)];
        Mat qb = nodes_[iq].value.block(b * seq, h * hd, seq, hd);
        Mat kb = nodes_[ik].value.block(b * seq, h * hd, seq, hd);
        Mat vb = nodes_[iv].value.block(b * seq, h * hd, seq, hd);
        Mat go = g.block(b * seq, h * hd, seq, hd);
        gv.block(b * seq, h * hd, seq, hd) = p.transpose() * go;
        Mat gp = go * vb.transpose();
        // softmax backward per row; masked columns have p = 0 hence grad 0
        Mat gs(seq, seq);
        for (Eigen::Index i = 0; i < seq; ++i) {
          double s = (gp.row(i).array() * p.row(i).array()).sum();
          gs.row(i) = p.row(i).array() * (gp.row(i).array() - s);
        }
        gs *= inv_scale;
        gq.block(b * seq, h * hd, seq, hd) = gs * kb;
        gk.block(b * seq, h * hd, seq, hd) = gs.transpose() * qb;
      }
    }
    accumulate(iq, gq);
    accumulate(ik, gk);
    accumulate(iv, gv);
  };
  return out;
}

const std::vector<Mat>& Tape::attention_probs(Var attn_out) const {
  return node(attn_out).attn_probs;
}

// ---- geometry helpers ------------------------------------------------------

Var Tape::skew(Var v3) {
  if (v3.rows() != 3 || v3.cols() != 1) throw std::invalid_argument("skew: 3x1");
  int ia = v3.id();
  const Mat& v = v3.value();
  Mat s(3, 3);
  s << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
  Var out = make(std::move(s), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io] {
    const Mat& g = nodes_[io].grad;
    Mat gv(3, 1);
    gv << g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1);
    accumulate(ia, gv);
  };
  return out;
}

namespace {
// sin(sqrt(u))/sqrt(u) and derivative w.r.t. u, stable at u -> 0
void sinc_sq(double u, double& f, double& df) {
  if (u < 1e-8) {
    f = 1.0 - u / 6.0 + u * u / 120.0;
    df = -1.0 / 6.0 + u / 60.0;
  } else {
    const double t = std::sqrt(u);
    f = std::sin(t) / t;
    df = (std::cos(t) * t - std::sin(t)) / (2.0 * t * u);
  }
}
// (1 - cos(sqrt(u)))/u and derivative w.r.t. u, stable at u -> 0
void versine_sq(double u, double& f, double& df) {
  if (u < 1e-8) {
    f = 0.5 - u / 24.0 + u * u / 720.0;
    df = -1.0 / 24.0 + u / 360.0;
  } else {
    const double t = std::sqrt(u);
    f = (1.0 - std::cos(t)) / u;
    df = (std::sin(t) * t / 2.0 - (1.0 - std::cos(t))) / (u * u);
  }
}
}  // namespace

Var Tape::sinc_of_sq(Var u) {
  check_scalar(u, "sinc_of_sq");
  int ia = u.id();
  double f, df;
  sinc_sq(u.value()(0, 0), f, df);
  Var out = make(Mat::Constant(1, 1, f), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, df] {
    accumulate(ia, Mat::Constant(1, 1, nodes_[io].grad(0, 0) * df));
  };
  return out;
}

Var Tape::versine_of_sq(Var u) {
  check_scalar(u, "versine_of_sq");
  int ia = u.id();
  double f, df;
  versine_sq(u.value()(0, 0), f, df);
  Var out = make(Mat::Constant(1, 1, f), true, nullptr);
  int io = out.id();
  node(out).backprop = [this, ia, io, df] {
    accumulate(ia, Mat::Constant(1, 1, nodes_[io].grad(0, 0) * df));
  };
  return out;
}

// ---- engine ----------------------------------------------------------------

void Tape::backward(Var output) {
  if (output.rows() != 1 || output.cols() != 1)
    throw std::invalid_argument("backward: output must be a scalar");
  for (auto& n : nodes_) {
    n.touched = false;
    if (n.grad.size() != 0) n.grad.setZero();
  }
  Node& on = node(output);
  grad_buf(output.id()).setConstant(1.0);
  on.touched = true;
  for (int i = output.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.touched && n.backprop) n.backprop();
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace mimic::ad
