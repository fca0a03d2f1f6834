#include "mimic/retarget/ik_regressor.hpp"

#include <stdexcept>

namespace mimic::retarget {

using ad::Mat;
using ad::Tape;
using ad::Var;

void IkRegressor::init(const IkRegressorConfig& cfg, std::uint64_t seed) {
  if (cfg.robot_dofs <= 0)
    throw std::invalid_argument("ik regressor: robot_dofs must be set");
  cfg_ = cfg;
  RngStream rng(seed, "ik.init");
  token_proj_.init(cfg.d_model, 3, rng);
  pos_embedding_ = 0.02 * nn::xavier(cfg.human_joints, cfg.d_model, rng);
  nn::EncoderConfig ec;
  ec.d_model = cfg.d_model;
  ec.layers = cfg.layers;
  ec.heads = cfg.heads;
  encoder_.init(ec, rng);
  out_proj_.init(cfg.robot_dofs, cfg.d_model, rng);
}

Eigen::MatrixXd IkRegressor::stack_tokens(
    const std::vector<human::HumanPose>& poses) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(poses.size()) * human::kNumJoints, 3);
  Eigen::Index r = 0;
  for (const auto& p : poses) {
    out.middleRows(r, human::kNumJoints) = p.aa;
    r += human::kNumJoints;
  }
  return out;
}

Var IkRegressor::forward(nn::Binder& binder, Var tokens) const {
  Tape& t = binder.tape();
  const int s = cfg_.human_joints;
  if (tokens.cols() != 3 || tokens.rows() % s != 0)
    throw std::invalid_argument("ik regressor: bad token shape");
  const Eigen::Index batch = tokens.rows() / s;

  Var x = nn::linear(t, tokens, token_proj_.bind(binder));
  // learned positional embeddings, tiled across the batch
  std::vector<Eigen::Index> tile(static_cast<std::size_t>(batch * s));
  for (Eigen::Index i = 0; i < batch * s; ++i)
    tile[static_cast<std::size_t>(i)] = i % s;
  x = t.add(x, t.gather_rows(binder(pos_embedding_), std::move(tile)));

  Mat keep = Mat::Ones(batch, s);
  Var enc = encoder_.forward(binder, x, keep);
  Var per_token = nn::linear(t, enc, out_proj_.bind(binder));  // (B*s) x J

  // mean pooling over each sample's tokens
  Mat pool = Mat::Zero(batch, batch * s);
  for (Eigen::Index b = 0; b < batch; ++b)
    pool.block(b, b * s, 1, s).setConstant(1.0 / static_cast<double>(s));
  return t.matmul(t.constant(pool), per_token);  // B x J
}

Eigen::VectorXd IkRegressor::infer(const human::HumanPose& pose) const {
  Tape tape;
  nn::Binder binder(tape, /*trainable=*/false);
  Var tokens = tape.constant(pose.aa);
  Var out = forward(binder, tokens);
  return out.value().row(0).transpose();
}

void IkRegressor::visit(const nn::ParamVisitor& fn) {
  token_proj_.visit("ik.token", fn);
  fn("ik.pos_embedding", pos_embedding_);
  encoder_.visit("ik.encoder", fn);
  out_proj_.visit("ik.out", fn);
}

long IkRegressor::param_count() const {
  long n = token_proj_.size() + pos_embedding_.size() + out_proj_.size();
  n += encoder_.size();
  return n;
}

}  // namespace mimic::retarget
