#include "mimic/nn/encoder.hpp"

#include <stdexcept>

namespace mimic::nn {

using ad::Mat;
using ad::Tape;
using ad::Var;

void EncoderConfig::validate() const {
  if (d_model <= 0 || layers <= 0 || heads <= 0)
    throw std::invalid_argument("encoder config: positive dims required");
  if (d_model % heads != 0)
    throw std::invalid_argument("encoder config: d_model must divide by heads");
}

void LoraPair::init(Eigen::Index out, Eigen::Index in, int rank, double scale,
                    RngStream& rng) {
  if (rank >= std::min(out, in))
    throw std::invalid_argument("lora: rank must be below min(out, in)");
  if (rank <= 0) throw std::invalid_argument("lora: rank must be positive");
  a = xavier(rank, in, rng);
  b = Mat::Zero(out, rank);
  scaling = scale;
}

EncoderLora EncoderLora::for_encoder(const EncoderConfig& cfg, int rank,
                                     double scaling, RngStream& rng) {
  EncoderLora out;
  out.rank = rank;
  const int d = cfg.d_model;
  const int f = cfg.ffn_mult * cfg.d_model;
  for (int l = 0; l < cfg.layers; ++l) {
    std::vector<LoraPair> pairs(6);
    for (int i = 0; i < 4; ++i) pairs[static_cast<std::size_t>(i)].init(d, d, rank, scaling, rng);
    pairs[4].init(f, d, rank, scaling, rng);
    pairs[5].init(d, f, rank, scaling, rng);
    out.layers.push_back(std::move(pairs));
  }
  return out;
}

void EncoderLora::visit(const std::string& prefix, const ParamVisitor& fn) {
  static const char* kNames[6] = {"q", "k", "v", "o", "ff1", "ff2"};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int i = 0; i < 6; ++i) {
      auto& p = layers[l][static_cast<std::size_t>(i)];
      const std::string base =
          prefix + ".layer" + std::to_string(l) + "." + kNames[i];
      fn(base + ".a", p.a);
      fn(base + ".b", p.b);
    }
  }
}

void EncoderLora::bind_all(Binder& binder) {
  visit("", [&](const std::string&, Mat& m) { binder(m); });
}

void Encoder::init(const EncoderConfig& cfg, RngStream& rng) {
  cfg.validate();
  cfg_ = cfg;
  layers_.clear();
  const int d = cfg.d_model;
  const int f = cfg.ffn_mult * d;
  for (int l = 0; l < cfg.layers; ++l) {
    Layer layer;
    layer.q.init(d, d, rng);
    layer.k.init(d, d, rng);
    layer.v.init(d, d, rng);
    layer.o.init(d, d, rng);
    layer.ff1.init(f, d, rng);
    layer.ff2.init(d, f, rng);
    layer.g1 = Mat::Ones(1, d);
    layer.g2 = Mat::Ones(1, d);
    layers_.push_back(std::move(layer));
  }
  in_gain_ = Mat::Ones(1, d);
  out_gain_ = Mat::Ones(1, d);
}

namespace {

// effective weight: base (frozen when adapting) plus scaled low-rank delta
Var bind_weight(Binder& binder, Mat& w, LoraPair* lora, Binder* lora_binder) {
  if (!lora) return binder(w);
  Tape& t = binder.tape();
  Var base = binder.frozen(w);
  Var a = (*lora_binder)(lora->a);
  Var b = (*lora_binder)(lora->b);
  return t.add(base, t.scale(t.matmul(b, a), t.scalar_const(lora->scaling)));
}

}  // namespace

Var Encoder::forward(Binder& binder, Var tokens, const Mat& key_keep,
                     EncoderLora* lora, Binder* lora_binder,
                     std::vector<Var>* attention_nodes) const {
  Tape& t = binder.tape();
  if (lora && !lora_binder)
    throw std::invalid_argument("encoder: lora requires a lora binder");
  if (lora && static_cast<int>(lora->layers.size()) != cfg_.layers)
    throw std::invalid_argument("encoder: lora layer count mismatch");

  auto bindv = [&](Mat& m) { return lora ? binder.frozen(m) : binder(m); };

  // RMS normalization of the input token embeddings
  Var x = t.mul_rowvec(t.rms_norm_rows(tokens), bindv(in_gain_));

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    LoraPair* lp = lora ? lora->layers[l].data() : nullptr;

    Var h = t.mul_rowvec(t.rms_norm_rows(x), bindv(layer.g1));
    Var q = t.add_rowvec(
        t.matmul(h, t.transpose(bind_weight(binder, layer.q.w, lp ? &lp[0] : nullptr, lora_binder))),
        bindv(layer.q.b));
    Var k = t.add_rowvec(
        t.matmul(h, t.transpose(bind_weight(binder, layer.k.w, lp ? &lp[1] : nullptr, lora_binder))),
        bindv(layer.k.b));
    Var v = t.add_rowvec(
        t.matmul(h, t.transpose(bind_weight(binder, layer.v.w, lp ? &lp[2] : nullptr, lora_binder))),
        bindv(layer.v.b));
    Var attn = t.attention(q, k, v, cfg_.heads, key_keep);
    if (attention_nodes) attention_nodes->push_back(attn);
    Var o = t.add_rowvec(
        t.matmul(attn, t.transpose(bind_weight(binder, layer.o.w, lp ? &lp[3] : nullptr, lora_binder))),
        bindv(layer.o.b));
    x = t.add(x, o);

    Var h2 = t.mul_rowvec(t.rms_norm_rows(x), bindv(layer.g2));
    Var f1 = t.gelu(t.add_rowvec(
        t.matmul(h2, t.transpose(bind_weight(binder, layer.ff1.w, lp ? &lp[4] : nullptr, lora_binder))),
        bindv(layer.ff1.b)));
    Var f2 = t.add_rowvec(
        t.matmul(f1, t.transpose(bind_weight(binder, layer.ff2.w, lp ? &lp[5] : nullptr, lora_binder))),
        bindv(layer.ff2.b));
    x = t.add(x, f2);
  }
  return t.mul_rowvec(t.rms_norm_rows(x), bindv(out_gain_));
}

void Encoder::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".in_gain", in_gain_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = prefix + ".layer" + std::to_string(l);
    layers_[l].q.visit(p + ".q", fn);
    layers_[l].k.visit(p + ".k", fn);
    layers_[l].v.visit(p + ".v", fn);
    layers_[l].o.visit(p + ".o", fn);
    layers_[l].ff1.visit(p + ".ff1", fn);
    layers_[l].ff2.visit(p + ".ff2", fn);
    fn(p + ".g1", layers_[l].g1);
    fn(p + ".g2", layers_[l].g2);
  }
  fn(prefix + ".out_gain", out_gain_);
}

long Encoder::size() const {
  long n = in_gain_.size() + out_gain_.size();
  for (const auto& l : layers_)
    n += l.q.size() + l.k.size() + l.v.size() + l.o.size() + l.ff1.size() +
         l.ff2.size() + l.g1.size() + l.g2.size();
  return n;
}

}  // namespace mimic::nn
