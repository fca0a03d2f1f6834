#include "mimic/policy/mm_policy.hpp"

#include <cmath>
#include <stdexcept>

#include "mimic/util/checkpoint.hpp"

namespace mimic::policy {

using ad::Mat;
using ad::Tape;
using ad::Var;

void MmPolicyConfig::validate() const {
  encoder.validate();
  obs_spec.validate();
  if (ref_spec) ref_spec->validate();
  if (num_dof <= 0) throw std::invalid_argument("policy: num_dof must be set");
  if (init_action_std <= 0)
    throw std::invalid_argument("policy: init_action_std must be positive");
}

namespace {
Json spec_to_json(const ObservationSpec& s) {
  Json j;
  j["mode"] = s.mode == EmbeddingMode::Basic ? "basic" : "grouped_v2";
  j["basic_seq_len"] = s.basic_seq_len;
  j["groups"] = Json::array();
  for (const auto& g : s.groups)
    j["groups"].push_back({{"name", g.name}, {"dim", g.dim}, {"history", g.history}});
  return j;
}
ObservationSpec spec_from_json(const Json& j) {
  ObservationSpec s;
  s.mode = j.at("mode") == "basic" ? EmbeddingMode::Basic : EmbeddingMode::GroupedV2;
  s.basic_seq_len = j.at("basic_seq_len");
  for (const auto& g : j.at("groups"))
    s.groups.push_back({g.at("name"), g.at("dim"), g.at("history")});
  return s;
}
}  // namespace

Json MmPolicyConfig::to_json() const {
  Json j;
  j["d_model"] = encoder.d_model;
  j["layers"] = encoder.layers;
  j["heads"] = encoder.heads;
  j["ffn_mult"] = encoder.ffn_mult;
  j["num_dof"] = num_dof;
  j["init_action_std"] = init_action_std;
  j["obs_spec"] = spec_to_json(obs_spec);
  if (ref_spec) j["ref_spec"] = spec_to_json(*ref_spec);
  return j;
}

MmPolicyConfig MmPolicyConfig::from_json(const Json& j) {
  MmPolicyConfig c;
  c.encoder.d_model = j.at("d_model");
  c.encoder.layers = j.at("layers");
  c.encoder.heads = j.at("heads");
  c.encoder.ffn_mult = j.at("ffn_mult");
  c.num_dof = j.at("num_dof");
  c.init_action_std = j.at("init_action_std");
  c.obs_spec = spec_from_json(j.at("obs_spec"));
  if (j.contains("ref_spec")) c.ref_spec = spec_from_json(j.at("ref_spec"));
  return c;
}

void MmPolicy::init(const MmPolicyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  cfg_ = cfg;
  RngStream rng(seed, "policy.init");
  obs_embed_.init(cfg.obs_spec, cfg.encoder.d_model, rng);
  if (cfg.ref_spec) {
    ref_embed_.emplace();
    ref_embed_->init(*cfg.ref_spec, cfg.encoder.d_model, rng);
  } else {
    ref_embed_.reset();
  }
  cls_ = 0.02 * nn::xavier(1, cfg.encoder.d_model, rng);
  sep_ = 0.02 * nn::xavier(1, cfg.encoder.d_model, rng);
  encoder_.init(cfg.encoder, rng);
  actor_head_.init(cfg.num_dof, cfg.encoder.d_model, rng);
  critic_head_.init(1, cfg.encoder.d_model, rng);
  log_std_ = Mat::Constant(1, cfg.num_dof, std::log(cfg.init_action_std));
}

MmPolicy::Forward MmPolicy::forward(nn::Binder& binder, const Mat& obs,
                                    const Mat* ref, const Eigen::VectorXd* mask,
                                    const TeacherBinding* teacher,
                                    bool want_attention) const {
  Tape& t = binder.tape();
  const Eigen::Index batch = obs.rows();
  if (obs.cols() != cfg_.obs_spec.flat_dim())
    throw std::invalid_argument("policy: observation length mismatch");
  if (ref && !ref_embed_)
    throw std::invalid_argument("policy: reference input without a reference spec");
  if (ref && !mask)
    throw std::invalid_argument("policy: reference input requires a mask");

  auto bindp = [&](Mat& m) { return teacher ? binder.frozen(m) : binder(m); };

  const int so = obs_embed_.seq_len();
  Var obs_tokens = obs_embed_.forward(binder, t.constant(obs));
  // unify: with a teacher binding, embedding internals already bound via
  // `binder`; for frozen-base mode the binder itself must be non-trainable,
  // which the teacher path arranges by passing a constant binder.

  Var cls = bindp(cls_);

  Var tokens;
  Eigen::Index seq = 0;
  if (ref) {
    if (ref->rows() != batch)
      throw std::invalid_argument("policy: ref batch mismatch");
    if (mask->size() != batch)
      throw std::invalid_argument("policy: mask batch mismatch");
    const int sr = ref_embed_->seq_len();
    Var ref_tokens = ref_embed_->forward(binder, t.constant(*ref));
    Var sep = bindp(sep_);
    seq = 1 + so + 1 + sr;
    // gather rows of [cls; obs; sep; ref] into per-sample blocks
    Var pool = t.concat_rows({cls, obs_tokens, sep, ref_tokens});
    const Eigen::Index obs_at = 1;
    const Eigen::Index sep_at = 1 + batch * so;
    const Eigen::Index ref_at = sep_at + 1;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(batch * seq));
    Eigen::Index k = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
      order[static_cast<std::size_t>(k++)] = 0;  // cls
      for (int s = 0; s < so; ++s)
        order[static_cast<std::size_t>(k++)] = obs_at + b * so + s;
      order[static_cast<std::size_t>(k++)] = sep_at;  // sep
      for (int s = 0; s < sr; ++s)
        order[static_cast<std::size_t>(k++)] = ref_at + b * sr + s;
    }
    tokens = t.gather_rows(pool, std::move(order));
  } else {
    seq = 1 + so;
    Var pool = t.concat_rows({cls, obs_tokens});
    std::vector<Eigen::Index> order(static_cast<std::size_t>(batch * seq));
    Eigen::Index k = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
      order[static_cast<std::size_t>(k++)] = 0;
      for (int s = 0; s < so; ++s)
        order[static_cast<std::size_t>(k++)] = 1 + b * so + s;
    }
    tokens = t.gather_rows(pool, std::move(order));
  }

  Mat key_keep = Mat::Ones(batch, seq);
  if (ref) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      if ((*mask)(b) == 0.0)
        key_keep.row(b).segment(1 + so, seq - 1 - so).setZero();
    }
  }

  std::vector<Var> attention;
  Var enc = encoder_.forward(binder, tokens, key_keep,
                             teacher ? teacher->lora : nullptr,
                             teacher ? teacher->trainable : nullptr,
                             want_attention ? &attention : nullptr);

  std::vector<Eigen::Index> cls_rows(static_cast<std::size_t>(batch));
  for (Eigen::Index b = 0; b < batch; ++b)
    cls_rows[static_cast<std::size_t>(b)] = b * seq;
  Var cls_repr = t.gather_rows(enc, std::move(cls_rows));

  Forward out;
  auto actor_bound = teacher ? nn::Linear::Bound{(*teacher->trainable)(actor_head_.w),
                                                 (*teacher->trainable)(actor_head_.b)}
                             : actor_head_.bind(binder);
  out.action_mean = nn::linear(t, cls_repr, actor_bound);
  out.value = nn::linear(t, cls_repr, critic_head_.bind(binder));
  out.log_std = bindp(log_std_);
  out.attention = std::move(attention);
  return out;
}

Eigen::MatrixXd MmPolicy::act_mean(const Mat& obs, const Mat* ref,
                                   const Eigen::VectorXd* mask) const {
  Tape tape;
  nn::Binder binder(tape, /*trainable=*/false);
  return forward(binder, obs, ref, mask).action_mean.value();
}

Eigen::VectorXd MmPolicy::values(const Mat& obs, const Mat* ref,
                                 const Eigen::VectorXd* mask) const {
  Tape tape;
  nn::Binder binder(tape, /*trainable=*/false);
  return forward(binder, obs, ref, mask).value.value().col(0);
}

Eigen::VectorXd MmPolicy::action_std() const {
  return log_std_.row(0).array().exp().transpose();
}

void MmPolicy::visit(const nn::ParamVisitor& fn) {
  obs_embed_.visit("policy.obs_embed", fn);
  if (ref_embed_) ref_embed_->visit("policy.ref_embed", fn);
  fn("policy.cls", cls_);
  fn("policy.sep", sep_);
  encoder_.visit("policy.encoder", fn);
  actor_head_.visit("policy.actor_head", fn);
  critic_head_.visit("policy.critic_head", fn);
  fn("policy.log_std", log_std_);
}

long MmPolicy::param_count() const {
  long n = 0;
  const_cast<MmPolicy*>(this)->visit(
      [&n](const std::string&, Mat& m) { n += m.size(); });
  return n;
}

std::uint64_t MmPolicy::param_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  const_cast<MmPolicy*>(this)->visit([&h](const std::string& name, Mat& m) {
    h = fnv1a(name, h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                               static_cast<std::size_t>(m.size()) * sizeof(double)),
              h);
  });
  return h;
}

std::uint64_t MmPolicy::frozen_base_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  const_cast<MmPolicy*>(this)->visit([&h](const std::string& name, Mat& m) {
    if (name.find("actor_head") != std::string::npos) return;
    h = fnv1a(name, h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                               static_cast<std::size_t>(m.size()) * sizeof(double)),
              h);
  });
  return h;
}

MmPolicy MmPolicy::clone() const { return *this; }

Eigen::MatrixXd lora_apply(const Eigen::MatrixXd& base, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b, double scaling) {
  if (b.cols() != a.rows() || b.rows() != base.rows() || a.cols() != base.cols())
    throw std::invalid_argument("lora_apply: shape mismatch");
  return base + scaling * (b * a);
}

void save_policy(const std::filesystem::path& path, const MmPolicy& policy,
                 std::uint64_t seed, const nn::EncoderLora* adapter,
                 const Json& extra_config) {
  ckpt::Checkpoint c;
  c.seed = seed;
  c.config = {{"kind", "mm_policy"}, {"policy", policy.config().to_json()}};
  if (adapter) {
    c.config["lora_rank"] = adapter->rank;
    c.config["lora_scaling"] =
        adapter->layers.empty() || adapter->layers[0].empty()
            ? 1.0
            : adapter->layers[0][0].scaling;
  }
  if (!extra_config.is_null()) c.config["extra"] = extra_config;
  c.config["config_hash"] = config_hash(c.config);
  const_cast<MmPolicy&>(policy).visit(
      [&](const std::string& name, Mat& m) { c.add(name, m); });
  if (adapter)
    const_cast<nn::EncoderLora*>(adapter)->visit(
        "lora", [&](const std::string& name, Mat& m) { c.add(name, m); });
  ckpt::save_checkpoint(path, c);
}

MmPolicy load_policy(const std::filesystem::path& path,
                     nn::EncoderLora* adapter_out) {
  auto c = ckpt::load_checkpoint(path);
  if (c.config.value("kind", "") != "mm_policy")
    throw std::runtime_error("checkpoint is not a policy");
  MmPolicy policy;
  policy.init(MmPolicyConfig::from_json(c.config.at("policy")), c.seed);
  policy.visit([&](const std::string& name, Mat& m) {
    const Eigen::MatrixXd* blob = c.find(name);
    if (!blob) throw std::runtime_error("checkpoint missing blob " + name);
    if (blob->rows() != m.rows() || blob->cols() != m.cols())
      throw std::runtime_error("checkpoint blob shape mismatch for " + name);
    m = *blob;
  });
  if (adapter_out && c.config.contains("lora_rank")) {
    RngStream rng(c.seed, "lora.load");
    *adapter_out = nn::EncoderLora::for_encoder(
        policy.config().encoder, c.config.at("lora_rank"),
        c.config.at("lora_scaling"), rng);
    adapter_out->visit("lora", [&](const std::string& name, Mat& m) {
      const Eigen::MatrixXd* blob = c.find(name);
      if (!blob) throw std::runtime_error("checkpoint missing blob " + name);
      m = *blob;
    });
  }
  return policy;
}

}  // namespace mimic::policy
