#include <doctest.h>

#include <filesystem>
#include <random>

#include "mimic/human/correspondence.hpp"
#include "mimic/retarget/ik_trainer.hpp"

using namespace mimic;
using namespace mimic::retarget;
using ad::Mat;
using ad::Tape;
using ad::Var;
using human::HumanPose;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(MIMIC_FIXTURE_DIR) + "/" + rel;
}

struct Setup {
  kin::KinematicTree tree;
  human::Skeleton skel;
  human::ShapeParams shape = human::ShapeParams::identity();
  kin::SymmetryMap sym;
  std::vector<human::JointCorrespondence> corr;

  Setup() {
    tree = kin::load_robot_model(fixture("robots/planar_biped.xml"));
    tree.keypoints = kin::load_keypoint_map(fixture("maps/biped_keypoints.json"), tree);
    sym = kin::build_symmetry_map(tree);
    corr = human::derive_correspondence(tree, skel);
  }
  IkLossContext ctx() const { return {tree, skel, shape, sym}; }

  Eigen::VectorXd random_q(std::mt19937_64& rng) const {
    Eigen::VectorXd lo = tree.lower_limits(), hi = tree.upper_limits(), q(tree.dof_count);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < tree.dof_count; ++i) q(i) = lo(i) + u(rng) * (hi(i) - lo(i));
    return q;
  }
};

}  // namespace

TEST_CASE("loss_dist: zero on a self-consistent fixture, oracle elsewhere") {
  Setup s;
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd q = s.random_q(rng);
    HumanPose p = human::pose_from_joints(s.corr, q);

    Tape t;
    Var l = loss_dist(t, s.ctx(), t.constant(q), p);
    CHECK(l.value()(0, 0) < 1e-6);  // exact reproduction
    CHECK(l.value()(0, 0) >= 0.0);

    // a different joint vector: compare against a hand-computed oracle
    Eigen::VectorXd q2 = s.random_q(rng);
    Tape t2;
    Var l2 = loss_dist(t2, s.ctx(), t2.constant(q2), p);
    Eigen::MatrixXd rk = kin::keypoint_positions(s.tree, q2);
    Eigen::MatrixXd hk = s.skel.keypoint_positions(p, s.shape);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.tree.keypoints.pairs.size(); ++i) {
      const auto& pair = s.tree.keypoints.pairs[i];
      const Eigen::RowVector3d d =
          rk.row(static_cast<Eigen::Index>(i)) -
          hk.row(s.skel.keypoint_index(pair.human));
      acc += pair.weight * d.squaredNorm();
    }
    CHECK(l2.value()(0, 0) == doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
  }
}

TEST_CASE("loss_limit: zero inside, single-violation readout, loop oracle") {
  Setup s;
  Eigen::VectorXd lo = s.tree.lower_limits(), hi = s.tree.upper_limits();
  {
    Tape t;
    Eigen::VectorXd q = (lo + hi) / 2.0;
    CHECK(loss_limit(t, s.tree, t.constant(q)).value()(0, 0) == 0.0);
  }
  {
    Tape t;
    Eigen::VectorXd q = (lo + hi) / 2.0;
    q(4) = hi(4) + 0.1;
    CHECK(loss_limit(t, s.tree, t.constant(q)).value()(0, 0) ==
          doctest::Approx(0.1).epsilon(1e-9));
  }
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(s.tree.dof_count);
    for (int i = 0; i < s.tree.dof_count; ++i) q(i) = u(rng);
    Tape t;
    double acc = 0.0;
    for (int i = 0; i < s.tree.dof_count; ++i) {
      const double v = std::max(lo(i) - q(i), 0.0) + std::max(q(i) - hi(i), 0.0);
      acc += v * v;
    }
    CHECK(loss_limit(t, s.tree, t.constant(q)).value()(0, 0) ==
          doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
  }
}

TEST_CASE("loss_disturb: null for constant maps, exact gain for scalar maps") {
  Setup s;
  std::mt19937_64 rng(43);
  Eigen::VectorXd q = s.random_q(rng);
  {
    Tape t;
    Var l = loss_disturb(t, s.ctx(), t.constant(q), t.constant(q), 0.37);
    CHECK(l.value()(0, 0) == 0.0);
  }
  {
    // linear map out = c * in on the generic core: ratio is exactly c
    const double c = 2.75;
    Eigen::VectorXd in = Eigen::VectorXd::Random(12);
    Eigen::VectorXd delta = Eigen::VectorXd::Random(12);
    Tape t;
    Var base = t.constant(c * in);
    Var moved = t.constant(c * (in + delta));
    Var l = loss_disturb_generic(t, base, moved, delta.norm());
    CHECK(l.value()(0, 0) == doctest::Approx(c).epsilon(1e-9));
    CHECK(l.value()(0, 0) >= 0.0);
  }
  {
    Tape t;
    CHECK_THROWS_AS(loss_disturb_generic(t, t.scalar_const(0), t.scalar_const(0), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("loss_sym: commuting maps are null; expression is mirror-invariant") {
  Setup s;
  std::mt19937_64 rng(44);
  Eigen::VectorXd q = s.random_q(rng);
  {
    // a regressor that commutes with the reflection by construction
    Tape t;
    Var l = loss_sym(t, s.ctx(), t.constant(q), t.constant(s.sym.mirror_joints(q)));
    CHECK(l.value()(0, 0) < 1e-9);
  }
  {
    // fixed random "regressor" values; evaluation at p and S(p) coincide
    Eigen::VectorXd q_p = s.random_q(rng);
    Eigen::VectorXd q_sp = s.random_q(rng);
    Tape t1, t2;
    Var at_p = loss_sym(t1, s.ctx(), t1.constant(q_p), t1.constant(q_sp));
    Var at_sp = loss_sym(t2, s.ctx(), t2.constant(q_sp), t2.constant(q_p));
    CHECK(at_p.value()(0, 0) == doctest::Approx(at_sp.value()(0, 0)).epsilon(1e-9));

    // two-sided numeric oracle
    Eigen::MatrixXd kp = kin::keypoint_positions(s.tree, q_p);
    Eigen::MatrixXd kpm = kin::keypoint_positions(s.tree, q_sp);
    const double want = (s.sym.mirror_keypoints(kp) - kpm).norm();
    CHECK(at_p.value()(0, 0) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("loss_single_dof: exact, offset and root-sum-square oracle") {
  Setup s;
  std::mt19937_64 rng(45);
  Eigen::VectorXd q = s.random_q(rng);
  HumanPose p = human::pose_from_joints(s.corr, q);
  {
    Tape t;
    CHECK(loss_single_dof(t, s.tree.keypoints.single_dof, t.constant(q), p)
              .value()(0, 0) < 1e-12);
  }
  {
    Eigen::VectorXd q2 = q;
    int knee = -1;
    for (const auto& e : s.tree.keypoints.single_dof)
      if (e.robot_joint == "l_knee") knee = e.dof;
    REQUIRE(knee >= 0);
    q2(knee) += 0.2;
    Tape t;
    CHECK(loss_single_dof(t, s.tree.keypoints.single_dof, t.constant(q2), p)
              .value()(0, 0) == doctest::Approx(0.2).epsilon(1e-9));
  }
  {
    Eigen::VectorXd q3 = q;
    double acc = 0.0;
    for (const auto& e : s.tree.keypoints.single_dof) {
      q3(e.dof) += 0.1 * (e.dof + 1);
      acc += 0.01 * (e.dof + 1) * (e.dof + 1);
    }
    Tape t;
    CHECK(loss_single_dof(t, s.tree.keypoints.single_dof, t.constant(q3), p)
              .value()(0, 0) == doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
  }
  {
    auto bad = s.tree.keypoints.single_dof;
    bad[0].human_joint = "No_Such_Joint";
    Tape t;
    CHECK_THROWS_AS(loss_single_dof(t, bad, t.constant(q), p),
                    std::invalid_argument);
  }
}

TEST_CASE("total loss gradient matches finite differences") {
  Setup s;
  IkRegressorConfig mc;
  mc.d_model = 16;
  mc.layers = 1;
  mc.heads = 2;
  mc.robot_dofs = s.tree.dof_count;
  IkRegressor reg;
  reg.init(mc, 7);

  IkLossWeights w;
  std::mt19937_64 rng(46);
  HumanPose pose = human::pose_from_joints(s.corr, s.random_q(rng));
  HumanPose noisy = pose;
  double dn = 0.0;
  std::normal_distribution<double> g(0.0, w.disturb_sigma * 2 * M_PI);
  for (int j = 0; j < human::kNumJoints; ++j)
    for (int c = 0; c < 3; ++c) {
      const double e = g(rng);
      noisy.aa(j, c) += e;
      dn += e * e;
    }
  dn = std::sqrt(dn);
  HumanPose mirrored = s.skel.mirror(pose);

  // collect analytic gradients once
  Tape t;
  nn::Binder binder(t, true);
  Var q_all = reg.forward(
      binder, t.constant(IkRegressor::stack_tokens({pose, noisy, mirrored})));
  Var q = t.transpose(t.block(q_all, 0, 0, 1, q_all.cols()));
  Var qd = t.transpose(t.block(q_all, 1, 0, 1, q_all.cols()));
  Var qm = t.transpose(t.block(q_all, 2, 0, 1, q_all.cols()));
  Var total = t.scale(loss_dist(t, s.ctx(), q, pose), t.scalar_const(w.dist));
  total = t.add(total, t.scale(loss_limit(t, s.tree, q), t.scalar_const(w.limit)));
  total = t.add(total, t.scale(loss_disturb(t, s.ctx(), q, qd, dn),
                               t.scalar_const(w.disturb_start)));
  total = t.add(total, t.scale(loss_sym(t, s.ctx(), q, qm), t.scalar_const(w.sym)));
  total = t.add(total,
                t.scale(loss_single_dof(t, s.tree.keypoints.single_dof, q, pose),
                        t.scalar_const(w.single_dof)));
  t.backward(total);
  auto grads = binder.grads();
  auto hosts = binder.hosts();

  // probe 20 random parameter coordinates with central differences
  std::uniform_int_distribution<std::size_t> pick_host(0, hosts.size() - 1);
  auto loss_value = [&]() {
    Tape t2;
    nn::Binder b2(t2, false);
    Var qa = reg.forward(
        b2, t2.constant(IkRegressor::stack_tokens({pose, noisy, mirrored})));
    Var q0 = t2.transpose(t2.block(qa, 0, 0, 1, qa.cols()));
    Var q1 = t2.transpose(t2.block(qa, 1, 0, 1, qa.cols()));
    Var q2v = t2.transpose(t2.block(qa, 2, 0, 1, qa.cols()));
    Var tot = t2.scale(loss_dist(t2, s.ctx(), q0, pose), t2.scalar_const(w.dist));
    tot = t2.add(tot, t2.scale(loss_limit(t2, s.tree, q0), t2.scalar_const(w.limit)));
    tot = t2.add(tot, t2.scale(loss_disturb(t2, s.ctx(), q0, q1, dn),
                               t2.scalar_const(w.disturb_start)));
    tot = t2.add(tot, t2.scale(loss_sym(t2, s.ctx(), q0, q2v), t2.scalar_const(w.sym)));
    tot = t2.add(tot,
                 t2.scale(loss_single_dof(t2, s.tree.keypoints.single_dof, q0, pose),
                          t2.scalar_const(w.single_dof)));
    return tot.value()(0, 0);
  };

  int checked = 0;
  const double h = 1e-6;
  while (checked < 20) {
    const std::size_t hi = pick_host(rng);
    Mat& m = *hosts[hi];
    if (m.size() == 0) continue;
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
    CHECK(std::abs(got - fd) <=
          1e-3 * std::max({1.0, std::abs(got), std::abs(fd)}));
    ++checked;
  }
}

TEST_CASE("train_regressor: deterministic curves, checkpoint round trip") {
  Setup s;
  std::mt19937_64 rng(47);
  std::vector<HumanPose> frames;
  for (int i = 0; i < 60; ++i)
    frames.push_back(human::pose_from_joints(s.corr, s.random_q(rng)));

  IkTrainConfig cfg;
  cfg.model.d_model = 16;
  cfg.model.layers = 1;
  cfg.model.heads = 2;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.seed = 9;

  auto ds = split_dataset(frames, cfg.seed);
  CHECK(ds.train.size() == 48);
  CHECK(ds.val.size() == 12);

  IkTrainLog log1, log2;
  auto reg1 = train_regressor(ds, s.tree, s.skel, s.shape, cfg, &log1);
  auto reg2 = train_regressor(ds, s.tree, s.skel, s.shape, cfg, &log2);
  REQUIRE(log1.train_loss.size() == 3);
  for (std::size_t i = 0; i < log1.train_loss.size(); ++i) {
    CHECK(log1.train_loss[i] == log2.train_loss[i]);  // bit-identical
    CHECK(log1.val_loss[i] == log2.val_loss[i]);
  }

  const auto tmp = std::filesystem::temp_directory_path() / "ik_test.ckpt";
  save_regressor(tmp, reg1, cfg.seed);
  auto loaded = load_regressor(tmp);
  HumanPose probe = human::pose_from_joints(s.corr, s.random_q(rng));
  CHECK((reg1.infer(probe) - loaded.infer(probe)).norm() == 0.0);
  std::filesystem::remove(tmp);
}

TEST_CASE("retarget_sequence: length, limits, alpha scaling") {
  Setup s;
  IkRegressorConfig mc;
  mc.d_model = 16;
  mc.layers = 1;
  mc.heads = 2;
  mc.robot_dofs = s.tree.dof_count;
  IkRegressor reg;
  reg.init(mc, 11);

  std::mt19937_64 rng(48);
  motion::HumanMotion hm;
  hm.rate = 50.0;
  hm.root_pos = Eigen::MatrixXd::Random(1, 3);
  hm.root_quat = Eigen::MatrixXd::Zero(1, 4);
  hm.root_quat(0, 0) = 1.0;
  hm.frames.push_back(human::pose_from_joints(s.corr, s.random_q(rng)));

  auto seq = retarget_sequence(reg, s.tree, hm, 0.5);
  CHECK(seq.frames() == 1);
  CHECK((seq.root_pos - 0.5 * hm.root_pos).norm() == 0.0);
  Eigen::VectorXd lo = s.tree.lower_limits(), hi = s.tree.upper_limits();
  for (int i = 0; i < s.tree.dof_count; ++i) {
    CHECK(seq.joint_pos(0, i) >= lo(i) - 1e-12);
    CHECK(seq.joint_pos(0, i) <= hi(i) + 1e-12);
  }

  // param budget at reference configuration
  IkRegressorConfig full;
  full.robot_dofs = s.tree.dof_count;
  IkRegressor big;
  big.init(full, 1);
  CHECK(big.param_count() < 150000);
}
