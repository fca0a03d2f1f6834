#include <doctest.h>

#include <filesystem>
#include <random>

#include "mimic/ad/optim.hpp"
#include "mimic/policy/mm_policy.hpp"

using namespace mimic;
using namespace mimic::policy;
using ad::Mat;
using ad::Tape;
using ad::Var;

namespace {

ObservationSpec small_obs_spec(EmbeddingMode mode = EmbeddingMode::Basic) {
  ObservationSpec s;
  s.mode = mode;
  s.basic_seq_len = 4;
  s.groups = {{"imu", 3, 1}, {"joints", 6, 1}, {"command", 2, 1}};
  return s;
}

ObservationSpec small_ref_spec() {
  ObservationSpec s;
  s.mode = EmbeddingMode::Basic;
  s.basic_seq_len = 3;
  s.groups = {{"ref_joints", 6, 1}, {"ref_vel", 3, 1}};
  return s;
}

MmPolicyConfig small_config(bool with_ref = true,
                            EmbeddingMode mode = EmbeddingMode::Basic) {
  MmPolicyConfig c;
  c.encoder.d_model = 16;
  c.encoder.layers = 2;
  c.encoder.heads = 2;
  c.obs_spec = small_obs_spec(mode);
  if (with_ref) c.ref_spec = small_ref_spec();
  c.num_dof = 5;
  return c;
}

Mat random_mat(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("embed_basic: shape, zero-input fixed point, linearity") {
  RngStream rng(3, "test");
  BasicEmbedding emb;
  auto spec = small_obs_spec();
  emb.init(spec, 16, rng);

  Tape t;
  nn::Binder binder(t, false);
  Mat zero = Mat::Zero(2, spec.flat_dim());
  Var tokens = emb.forward(binder, t.constant(zero));
  CHECK(tokens.rows() == 2 * 4);
  CHECK(tokens.cols() == 16);

  // zero input and zero bias: tokens equal the positional embeddings
  bool saw_pos = false;
  emb.visit("e", [&](const std::string& name, Mat& m) {
    if (name == "e.pos") {
      for (int b = 0; b < 2; ++b)
        CHECK((tokens.value().middleRows(4 * b, 4) - m).norm() < 1e-12);
      saw_pos = true;
    }
  });
  CHECK(saw_pos);

  // linearity after removing the offset at zero
  Mat a = random_mat(1, spec.flat_dim(), 1);
  Mat b = random_mat(1, spec.flat_dim(), 2);
  auto embed_one = [&](const Mat& x) {
    Tape t2;
    nn::Binder b2(t2, false);
    return emb.forward(b2, t2.constant(x)).value();
  };
  Mat e0 = embed_one(Mat::Zero(1, spec.flat_dim()));
  Mat lhs = embed_one(a + b) - e0;
  Mat rhs = (embed_one(a) - e0) + (embed_one(b) - e0);
  CHECK((lhs - rhs).norm() < 1e-9);
}

TEST_CASE("embed_grouped_v2: token count, history-1 degeneracy, permutation") {
  RngStream rng(5, "test");
  ObservationSpec spec;
  spec.mode = EmbeddingMode::GroupedV2;
  spec.groups = {{"a", 4, 1}, {"b", 3, 2}};
  GroupedEmbedding emb;
  emb.init(spec, 16, rng);
  CHECK(emb.seq_len() == 2);

  Tape t;
  nn::Binder binder(t, false);
  Mat x = random_mat(3, spec.flat_dim(), 7);
  Var tokens = emb.forward(binder, t.constant(x));
  CHECK(tokens.rows() == 3 * 2);
  CHECK(tokens.cols() == 16);

  // permuting intra-group features together with the weight columns leaves
  // the output unchanged
  GroupedEmbedding twin;
  twin.init(spec, 16, rng);  // fresh params, then overwrite with permuted copies
  std::vector<int> perm = {2, 0, 3, 1};
  std::map<std::string, Mat> source;
  emb.visit("g", [&](const std::string& name, Mat& m) { source[name] = m; });
  twin.visit("g", [&](const std::string& name, Mat& m) {
    Mat src = source.at(name);
    if (name.find(".a.") == std::string::npos) {
      m = src;
      return;
    }
    if (name.ends_with("conv_w") || name.ends_with("conv_b")) {
      for (int j = 0; j < 4; ++j) m.col(j) = src.col(perm[static_cast<std::size_t>(j)]);
    } else if (name.ends_with(".w")) {
      for (int j = 0; j < 4; ++j) m.col(j) = src.col(perm[static_cast<std::size_t>(j)]);
    } else {
      m = src;  // biases of gate/up are per-output, not per-feature
    }
  });
  Mat xp = x;
  for (int j = 0; j < 4; ++j) xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
  Tape t2;
  nn::Binder b2(t2, false);
  Var tokens_p = twin.forward(b2, t2.constant(xp));
  CHECK((tokens.value() - tokens_p.value()).norm() < 1e-9);
}

TEST_CASE("encode: masked envs are bitwise independent of reference content") {
  MmPolicy policy;
  policy.init(small_config(), 17);
  const int B = 8;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 11);
  Mat ref1 = random_mat(B, policy.config().ref_spec->flat_dim(), 12);
  Mat ref2 = random_mat(B, policy.config().ref_spec->flat_dim(), 13);
  Eigen::VectorXd mask(B);
  for (int b = 0; b < B; ++b) mask(b) = b % 2;

  Mat mean1 = policy.act_mean(obs, &ref1, &mask);
  Mat mean2 = policy.act_mean(obs, &ref2, &mask);
  Eigen::VectorXd val1 = policy.values(obs, &ref1, &mask);
  Eigen::VectorXd val2 = policy.values(obs, &ref2, &mask);
  for (int b = 0; b < B; ++b) {
    if (mask(b) == 0.0) {
      CHECK((mean1.row(b) - mean2.row(b)).norm() == 0.0);  // bitwise
      CHECK(val1(b) == val2(b));
    } else {
      CHECK((mean1.row(b) - mean2.row(b)).norm() > 0.0);
    }
  }
}

TEST_CASE("encode: batch row equals the same row of a larger batch") {
  MmPolicy policy;
  policy.init(small_config(), 19);
  const int B = 8;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 21);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 22);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(B);

  Mat full = policy.act_mean(obs, &ref, &mask);
  for (int b = 0; b < B; ++b) {
    Mat obs1 = obs.row(b);
    Mat ref1 = ref.row(b);
    Eigen::VectorXd m1 = Eigen::VectorXd::Ones(1);
    Mat one = policy.act_mean(obs1, &ref1, &m1);
    CHECK((one.row(0) - full.row(b)).norm() < 1e-12);
  }
}

TEST_CASE("encode: attention rows over masked positions carry zero weight") {
  MmPolicy policy;
  policy.init(small_config(), 23);
  const int B = 4;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 31);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 32);
  Eigen::VectorXd mask(B);
  mask << 1, 0, 1, 0;

  Tape t;
  nn::Binder binder(t, false);
  auto fwd = policy.forward(binder, obs, &ref, &mask, nullptr, true);
  REQUIRE(fwd.attention.size() == 2);  // one per layer

  const int so = policy.config().obs_spec.seq_len();
  const int seq = 1 + so + 1 + policy.config().ref_spec->seq_len();
  const int heads = policy.config().encoder.heads;
  for (const auto& attn : fwd.attention) {
    const auto& probs = t.attention_probs(attn);
    REQUIRE(probs.size() == static_cast<std::size_t>(B * heads));
    for (int b = 0; b < B; ++b)
      for (int h = 0; h < heads; ++h) {
        const Mat& p = probs[static_cast<std::size_t>(b * heads + h)];
        const double masked_weight =
            mask(b) == 0.0 ? p.middleCols(1 + so, seq - 1 - so).sum() : -1.0;
        if (mask(b) == 0.0) CHECK(masked_weight == 0.0);
        // every row still sums to one over the kept positions
        for (int i = 0; i < seq; ++i)
          CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
      }
  }
}

TEST_CASE("actor/critic shapes and reference-free equivalence") {
  MmPolicy policy;
  policy.init(small_config(), 29);
  const int B = 6;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 41);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 42);
  Eigen::VectorXd mask_all0 = Eigen::VectorXd::Zero(B);

  Mat mean = policy.act_mean(obs, &ref, &mask_all0);
  Eigen::VectorXd val = policy.values(obs, &ref, &mask_all0);
  CHECK(mean.rows() == B);
  CHECK(mean.cols() == 5);  // (num_envs, num_dof)
  CHECK(val.size() == B);   // (num_envs, 1)

  // all-masked batch equals the reference-free evaluation path bitwise
  Mat mean_free = policy.act_mean(obs, nullptr, nullptr);
  Eigen::VectorXd val_free = policy.values(obs, nullptr, nullptr);
  CHECK((mean - mean_free).norm() < 1e-12);
  CHECK((val - val_free).norm() < 1e-12);
}

TEST_CASE("actor gradients match finite differences on a 2-dof toy config") {
  MmPolicyConfig cfg;
  cfg.encoder.d_model = 8;
  cfg.encoder.layers = 1;
  cfg.encoder.heads = 2;
  cfg.obs_spec.mode = EmbeddingMode::Basic;
  cfg.obs_spec.basic_seq_len = 2;
  cfg.obs_spec.groups = {{"x", 3, 1}};
  cfg.num_dof = 2;
  MmPolicy policy;
  policy.init(cfg, 31);

  Mat obs = random_mat(3, 3, 51);
  auto loss_value = [&]() {
    Tape t;
    nn::Binder b(t, false);
    auto f = policy.forward(b, obs, nullptr, nullptr);
    return f.action_mean.value().array().square().sum() +
           f.value.value().array().square().sum();
  };

  Tape t;
  nn::Binder binder(t, true);
  auto f = policy.forward(binder, obs, nullptr, nullptr);
  Var loss = t.add(t.sum(t.square(f.action_mean)), t.sum(t.square(f.value)));
  t.backward(loss);
  auto grads = binder.grads();
  auto hosts = binder.hosts();

  std::mt19937_64 rng(52);
  std::uniform_int_distribution<std::size_t> pick(0, hosts.size() - 1);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 25) {
    const std::size_t hi = pick(rng);
    Mat& m = *hosts[hi];
    std::uniform_int_distribution<Eigen::Index> pick_el(0, m.size() - 1);
    const Eigen::Index el = pick_el(rng);
    const double orig = m.data()[el];
    m.data()[el] = orig + h;
    const double up = loss_value();
    m.data()[el] = orig - h;
    const double down = loss_value();
    m.data()[el] = orig;
    const double fd = (up - down) / (2 * h);
    const double got = grads[hi].data()[el];
    CHECK(std::abs(got - fd) <= 1e-4 * std::max({1.0, std::abs(got), std::abs(fd)}));
    ++checked;
  }
}

TEST_CASE("rms normalization: unit root-mean-square before the gain") {
  Tape t;
  Mat x = random_mat(5, 8, 61);
  Var y = t.rms_norm_rows(t.constant(x));
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double rms = std::sqrt(y.value().row(i).array().square().mean());
    CHECK(rms == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("lora: fresh adapter is an exact no-op; rank bounds enforced") {
  RngStream rng(7, "lora");
  {
    Mat base = random_mat(6, 6, 71);
    nn::LoraPair pair;
    pair.init(6, 6, 2, 1.5, rng);
    CHECK((lora_apply(base, pair.a, pair.b, pair.scaling) - base).norm() == 0.0);
  }
  {
    nn::LoraPair pair;
    CHECK_NOTHROW(pair.init(4, 6, 3, 1.0, rng));   // rank = min - 1 accepted
    CHECK_THROWS_AS(pair.init(4, 6, 4, 1.0, rng),  // rank = min rejected
                    std::invalid_argument);
  }

  // teacher with a fresh adapter equals the base policy to the bit
  MmPolicy policy;
  policy.init(small_config(), 37);
  RngStream lrng(9, "lora");
  auto adapter = nn::EncoderLora::for_encoder(policy.config().encoder, 2, 1.0, lrng);

  const int B = 4;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 81);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 82);
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(B);

  Mat base_mean = policy.act_mean(obs, &ref, &mask);
  Tape t;
  nn::Binder frozen(t, false);
  nn::Binder trainable(t, true);
  MmPolicy::TeacherBinding tb{&adapter, &trainable};
  auto fwd = policy.forward(frozen, obs, &ref, &mask, &tb);
  CHECK((fwd.action_mean.value() - base_mean).norm() == 0.0);
}

TEST_CASE("lora: adapter updates leave base weights untouched") {
  MmPolicy policy;
  policy.init(small_config(), 41);
  RngStream lrng(11, "lora");
  auto adapter = nn::EncoderLora::for_encoder(policy.config().encoder, 2, 1.0, lrng);

  const std::uint64_t hash_before = policy.frozen_base_hash();

  const int B = 4;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 91);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 92);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(B);

  ad::OptimizerConfig opt;
  opt.learning_rate = 1e-2;
  opt.algorithm = ad::Algorithm::AdaptiveMoment;
  ad::OptimizerState state;
  for (int step = 0; step < 5; ++step) {
    Tape t;
    nn::Binder frozen(t, false);
    nn::Binder trainable(t, true);
    MmPolicy::TeacherBinding tb{&adapter, &trainable};
    auto fwd = policy.forward(frozen, obs, &ref, &mask, &tb);
    Var loss = t.sum(t.square(fwd.action_mean));
    t.backward(loss);
    auto grads = trainable.grads();
    auto hosts = trainable.hosts();
    ad::optimizer_step(hosts, std::move(grads), opt, state);
  }
  CHECK(policy.frozen_base_hash() == hash_before);

  // and the adapter now changes the outputs
  Tape t;
  nn::Binder frozen(t, false);
  nn::Binder trainable(t, true);
  MmPolicy::TeacherBinding tb{&adapter, &trainable};
  auto fwd = policy.forward(frozen, obs, &ref, &mask, &tb);
  CHECK((fwd.action_mean.value() - policy.act_mean(obs, &ref, &mask)).norm() > 0.0);
}

TEST_CASE("sigma positivity and checkpoint round trip with adapter") {
  MmPolicy policy;
  policy.init(small_config(), 43);
  CHECK((policy.action_std().array() > 0.0).all());

  RngStream lrng(13, "lora");
  auto adapter = nn::EncoderLora::for_encoder(policy.config().encoder, 2, 2.0, lrng);
  adapter.layers[0][0].b.setRandom();

  const auto tmp = std::filesystem::temp_directory_path() / "policy_test.ckpt";
  save_policy(tmp, policy, 43, &adapter);
  nn::EncoderLora loaded_adapter;
  MmPolicy loaded = load_policy(tmp, &loaded_adapter);
  std::filesystem::remove(tmp);

  CHECK(loaded.param_hash() == policy.param_hash());
  CHECK((loaded_adapter.layers[0][0].b - adapter.layers[0][0].b).norm() == 0.0);

  const int B = 3;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 93);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 94);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(B);
  CHECK((policy.act_mean(obs, &ref, &mask) - loaded.act_mean(obs, &ref, &mask))
            .norm() == 0.0);
}

TEST_CASE("determinism: identical seeds give identical policies") {
  MmPolicy p1, p2;
  p1.init(small_config(), 47);
  p2.init(small_config(), 47);
  CHECK(p1.param_hash() == p2.param_hash());

  Mat obs = random_mat(2, p1.config().obs_spec.flat_dim(), 95);
  CHECK((p1.act_mean(obs, nullptr, nullptr) - p2.act_mean(obs, nullptr, nullptr))
            .norm() == 0.0);

  MmPolicy p3;
  p3.init(small_config(), 48);
  CHECK(p3.param_hash() != p1.param_hash());
}

TEST_CASE("grouped-v2 policy mode works end to end") {
  MmPolicy policy;
  policy.init(small_config(true, EmbeddingMode::GroupedV2), 53);
  const int B = 3;
  Mat obs = random_mat(B, policy.config().obs_spec.flat_dim(), 96);
  Mat ref = random_mat(B, policy.config().ref_spec->flat_dim(), 97);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(B);
  Mat mean = policy.act_mean(obs, &ref, &mask);
  CHECK(mean.rows() == B);
  CHECK(mean.allFinite());
}
