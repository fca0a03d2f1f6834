#include "mimic/retarget/ik_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mimic/ad/optim.hpp"
#include "mimic/util/checkpoint.hpp"

namespace mimic::retarget {

using ad::Mat;
using ad::Tape;
using ad::Var;
using human::HumanPose;

IkDataset split_dataset(std::vector<HumanPose> frames, std::uint64_t seed) {
  RngStream rng(seed, "ik.split");
  std::shuffle(frames.begin(), frames.end(), rng.engine());
  IkDataset out;
  const std::size_t n_train = frames.size() * 8 / 10;
  out.train.assign(frames.begin(), frames.begin() + static_cast<long>(n_train));
  out.val.assign(frames.begin() + static_cast<long>(n_train), frames.end());
  return out;
}

namespace {

struct BatchLoss {
  Var total;
};

// composite loss over one batch; the three regressor passes (plain,
// disturbed, mirrored) run as one stacked forward
BatchLoss batch_loss(Tape& tape, nn::Binder& binder, const IkRegressor& reg,
                     const IkLossContext& ctx,
                     const std::vector<const HumanPose*>& frames,
                     const IkLossWeights& w, double disturb_weight,
                     RngStream& noise) {
  const int B = static_cast<int>(frames.size());
  const int jn = human::kNumJoints;
  const double noise_std = w.disturb_sigma * 2.0 * M_PI;

  std::vector<HumanPose> plain, disturbed, mirrored;
  std::vector<double> delta_norms;
  for (const auto* f : frames) {
    plain.push_back(*f);
    HumanPose d = *f;
    double nsq = 0.0;
    for (int j = 0; j < jn; ++j)
      for (int c = 0; c < 3; ++c) {
        const double eps = noise.normal(0.0, noise_std);
        d.aa(j, c) += eps;
        nsq += eps * eps;
      }
    disturbed.push_back(std::move(d));
    delta_norms.push_back(std::sqrt(nsq));
    mirrored.push_back(ctx.skel.mirror(*f));
  }

  std::vector<HumanPose> all;
  all.reserve(static_cast<std::size_t>(3 * B));
  for (const auto& v : {plain, disturbed, mirrored})
    all.insert(all.end(), v.begin(), v.end());
  Var tokens = tape.constant(IkRegressor::stack_tokens(all));
  Var q_all = reg.forward(binder, tokens);  // (3B) x J

  Var loss = tape.scalar_const(0.0);
  for (int i = 0; i < B; ++i) {
    Var q = tape.transpose(tape.block(q_all, i, 0, 1, q_all.cols()));
    Var qd = tape.transpose(tape.block(q_all, B + i, 0, 1, q_all.cols()));
    Var qm = tape.transpose(tape.block(q_all, 2 * B + i, 0, 1, q_all.cols()));

    Var kp = robot_keypoints_var(tape, ctx.tree, q);
    Var kpd = robot_keypoints_var(tape, ctx.tree, qd);
    Var kpm = robot_keypoints_var(tape, ctx.tree, qm);

    // distance term against the constant human keypoints
    Eigen::MatrixXd hk = ctx.skel.keypoint_positions(plain[static_cast<std::size_t>(i)],
                                                     ctx.shape);
    Eigen::MatrixXd target(kp.rows(), 3);
    for (Eigen::Index r = 0; r < kp.rows(); ++r)
      target.row(r) = hk.row(ctx.skel.keypoint_index(
          ctx.tree.keypoints.pairs[static_cast<std::size_t>(r)].human));
    Eigen::MatrixXd wsq = ctx.tree.keypoints.pair_weights().array().sqrt().matrix() *
                          Eigen::RowVector3d::Ones();
    Var l_dist = tape.norm2(
        tape.mul(tape.sub(kp, tape.constant(target)), tape.constant(wsq)));

    Var l_limit = loss_limit(tape, ctx.tree, q);
    Var l_dist_ratio = loss_disturb_generic(
        tape, kp, kpd, delta_norms[static_cast<std::size_t>(i)]);

    // mirrored keypoints of q vs keypoints of f(mirror(p))
    std::vector<Eigen::Index> perm;
    for (auto p : ctx.sym.keypoint_perm) perm.push_back(p);
    Mat sign = Mat::Ones(kp.rows(), 3);
    sign.col(ctx.sym.lateral_axis).setConstant(-1.0);
    Var l_sym = tape.norm2(
        tape.sub(tape.mul(tape.gather_rows(kp, perm), tape.constant(sign)), kpm));

    Var l_dof = loss_single_dof(tape, ctx.tree.keypoints.single_dof, q,
                                plain[static_cast<std::size_t>(i)]);

    Var frame = tape.scale(l_dist, tape.scalar_const(w.dist));
    frame = tape.add(frame, tape.scale(l_limit, tape.scalar_const(w.limit)));
    frame = tape.add(frame, tape.scale(l_dist_ratio, tape.scalar_const(disturb_weight)));
    frame = tape.add(frame, tape.scale(l_sym, tape.scalar_const(w.sym)));
    frame = tape.add(frame, tape.scale(l_dof, tape.scalar_const(w.single_dof)));
    loss = tape.add(loss, frame);
  }
  return {tape.scale(loss, tape.scalar_const(1.0 / B))};
}

}  // namespace

double evaluate_loss(const IkRegressor& reg, const IkLossContext& ctx,
                     const std::vector<HumanPose>& frames,
                     const IkLossWeights& weights, double disturb_weight,
                     std::uint64_t noise_seed) {
  if (frames.empty()) return 0.0;
  RngStream noise(noise_seed, "ik.val.noise");
  double total = 0.0;
  const int B = 32;
  for (std::size_t at = 0; at < frames.size(); at += B) {
    std::vector<const HumanPose*> batch;
    for (std::size_t i = at; i < std::min(frames.size(), at + B); ++i)
      batch.push_back(&frames[i]);
    Tape tape;
    nn::Binder binder(tape, /*trainable=*/false);
    auto bl = batch_loss(tape, binder, reg, ctx, batch, weights, disturb_weight,
                         noise);
    total += bl.total.value()(0, 0) * static_cast<double>(batch.size());
  }
  return total / static_cast<double>(frames.size());
}

IkRegressor train_regressor(const IkDataset& dataset,
                            const kin::KinematicTree& tree,
                            const human::Skeleton& skel,
                            const human::ShapeParams& shape,
                            const IkTrainConfig& config, IkTrainLog* log) {
  if (dataset.train.empty())
    throw std::invalid_argument("train_regressor: empty dataset");
  config.weights.validate();

  IkRegressor reg;
  IkRegressorConfig mc = config.model;
  mc.robot_dofs = tree.dof_count;
  reg.init(mc, config.seed);

  const auto sym = kin::build_symmetry_map(tree);
  IkLossContext ctx{tree, skel, shape, sym};

  ad::OptimizerConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.algorithm = ad::Algorithm::AdaptiveMoment;
  ad::OptimizerState state;

  RngStream shuffle_rng(config.seed, "ik.shuffle");
  RngStream noise_rng(config.seed, "ik.noise");

  std::vector<std::size_t> order(dataset.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double progress =
        config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 1.0;
    const double disturb_w = config.weights.disturb_at(progress);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    double epoch_loss = 0.0;
    long counted = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      std::vector<const HumanPose*> batch;
      for (std::size_t i = at;
           i < std::min(order.size(), at + static_cast<std::size_t>(config.batch_size));
           ++i)
        batch.push_back(&dataset.train[order[i]]);

      Tape tape;
      nn::Binder binder(tape, /*trainable=*/true);
      auto bl = batch_loss(tape, binder, reg, ctx, batch, config.weights,
                           disturb_w, noise_rng);
      const double lv = bl.total.value()(0, 0);
      if (!std::isfinite(lv))
        throw std::runtime_error("train_regressor: loss diverged at epoch " +
                                 std::to_string(epoch));
      epoch_loss += lv * static_cast<double>(batch.size());
      counted += static_cast<long>(batch.size());

      tape.backward(bl.total);
      auto grads = binder.grads();
      std::vector<Mat*> hosts = binder.hosts();
      ad::optimizer_step(hosts, std::move(grads), opt, state);
    }
    if (log) {
      log->train_loss.push_back(epoch_loss / static_cast<double>(counted));
      log->val_loss.push_back(evaluate_loss(reg, ctx, dataset.val, config.weights,
                                            disturb_w,
                                            config.seed + 1000 + epoch));
    }
  }
  return reg;
}

motion::MotionSequence retarget_sequence(const IkRegressor& reg,
                                         const kin::KinematicTree& tree,
                                         const motion::HumanMotion& hm,
                                         double alpha) {
  motion::MotionSequence seq;
  seq.name = hm.name;
  seq.rate = hm.rate;
  const Eigen::Index n = hm.size();
  seq.joint_pos.resize(n, tree.dof_count);
  seq.root_pos = alpha * hm.root_pos;
  seq.root_quat = hm.root_quat;

  const int B = 64;
  for (Eigen::Index at = 0; at < n; at += B) {
    const Eigen::Index count = std::min<Eigen::Index>(B, n - at);
    std::vector<HumanPose> chunk(hm.frames.begin() + at,
                                 hm.frames.begin() + at + count);
    Tape tape;
    nn::Binder binder(tape, /*trainable=*/false);
    Var out = reg.forward(binder, tape.constant(IkRegressor::stack_tokens(chunk)));
    for (Eigen::Index i = 0; i < count; ++i)
      seq.joint_pos.row(at + i) =
          tree.clamp_to_limits(out.value().row(i).transpose()).transpose();
  }
  return seq;
}

void save_regressor(const std::filesystem::path& path, const IkRegressor& reg,
                    std::uint64_t seed, const Json& extra_config) {
  ckpt::Checkpoint c;
  c.seed = seed;
  c.config = {{"kind", "ik_regressor"},
              {"d_model", reg.config().d_model},
              {"layers", reg.config().layers},
              {"heads", reg.config().heads},
              {"robot_dofs", reg.config().robot_dofs},
              {"human_joints", reg.config().human_joints}};
  if (!extra_config.is_null()) c.config["extra"] = extra_config;
  c.config["config_hash"] = config_hash(c.config);
  const_cast<IkRegressor&>(reg).visit(
      [&](const std::string& name, Mat& m) { c.add(name, m); });
  ckpt::save_checkpoint(path, c);
}

IkRegressor load_regressor(const std::filesystem::path& path) {
  auto c = ckpt::load_checkpoint(path);
  if (c.config.value("kind", "") != "ik_regressor")
    throw std::runtime_error("checkpoint is not an ik regressor");
  IkRegressorConfig cfg;
  cfg.d_model = c.config.at("d_model");
  cfg.layers = c.config.at("layers");
  cfg.heads = c.config.at("heads");
  cfg.robot_dofs = c.config.at("robot_dofs");
  cfg.human_joints = c.config.at("human_joints");
  IkRegressor reg;
  reg.init(cfg, c.seed);
  reg.visit([&](const std::string& name, Mat& m) {
    const Eigen::MatrixXd* blob = c.find(name);
    if (!blob) throw std::runtime_error("checkpoint missing blob " + name);
    if (blob->rows() != m.rows() || blob->cols() != m.cols())
      throw std::runtime_error("checkpoint blob shape mismatch for " + name);
    m = *blob;
  });
  return reg;
}

}  // namespace mimic::retarget
