#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "mimic/human/correspondence.hpp"
#include "mimic/human/skeleton.hpp"

using namespace mimic;
using human::HumanPose;
using human::ShapeParams;
using human::Skeleton;

namespace {

// independent oracle: homogeneous 4x4 chain over the skeleton topology
Eigen::MatrixXd chain_oracle(const Skeleton& skel, const HumanPose& pose,
                             const ShapeParams& shape) {
  const int n = human::kNumJoints;
  std::vector<Eigen::Matrix4d> world(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Eigen::Matrix4d local = Eigen::Matrix4d::Identity();
    Eigen::Vector3d off = skel.rest_offsets().row(j).transpose();
    if (j > 0) off *= shape.beta(j - 1);
    local.topRightCorner<3, 1>() = off;
    const Eigen::Vector3d v = pose.aa.row(j).transpose();
    const double th = v.norm();
    if (th > 0)
      local.topLeftCorner<3, 3>() =
          Eigen::AngleAxisd(th, v / th).toRotationMatrix();
    const int p = skel.parents()[static_cast<std::size_t>(j)];
    world[static_cast<std::size_t>(j)] =
        (p < 0 ? Eigen::Matrix4d::Identity() : world[static_cast<std::size_t>(p)]) *
        local;
  }
  Eigen::MatrixXd out(skel.num_keypoints(), 3);
  for (int k = 0; k < skel.num_keypoints(); ++k) {
    const auto j = static_cast<std::size_t>(
        skel.joint_index(skel.keypoint_names()[static_cast<std::size_t>(k)]));
    Eigen::Vector4d d;
    d << shape.delta.row(k).transpose(), 1.0;
    out.row(k) = (shape.alpha * (world[j] * d).head<3>()).transpose();
  }
  return out;
}

}  // namespace

TEST_CASE("human_fk: identity pose gives the rest skeleton") {
  Skeleton skel;
  auto shape = ShapeParams::identity();
  HumanPose rest;
  Eigen::MatrixXd kp = skel.keypoint_positions(rest, shape);
  // canonical rest keypoints accumulated by hand from the offset table
  CHECK((kp.row(skel.keypoint_index("Pelvis")) - Eigen::RowVector3d(0, 0, 0)).norm() <
        1e-12);
  CHECK((kp.row(skel.keypoint_index("L_Knee")) -
         Eigen::RowVector3d(0, 0.10, -0.46)).norm() < 1e-12);
  CHECK((kp.row(skel.keypoint_index("R_Ankle")) -
         Eigen::RowVector3d(0, -0.10, -0.86)).norm() < 1e-12);
  CHECK((kp.row(skel.keypoint_index("L_Shoulder")) -
         Eigen::RowVector3d(0, 0.20, 0.36)).norm() < 1e-12);
  CHECK((kp.row(skel.keypoint_index("R_Wrist")) -
         Eigen::RowVector3d(0, -0.20, -0.17)).norm() < 1e-12);
}

TEST_CASE("human_fk: alpha doubles every keypoint distance from the root") {
  Skeleton skel;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  HumanPose pose;
  for (int j = 0; j < human::kNumJoints; ++j)
    for (int c = 0; c < 3; ++c) pose.aa(j, c) = dist(rng);
  auto s1 = ShapeParams::identity();
  auto s2 = ShapeParams::identity();
  s2.alpha = 2.0;
  Eigen::MatrixXd kp1 = skel.keypoint_positions(pose, s1);
  Eigen::MatrixXd kp2 = skel.keypoint_positions(pose, s2);
  CHECK((kp2 - 2.0 * kp1).norm() < 1e-12);
}

TEST_CASE("human_fk: random pose matches the matrix-chain oracle") {
  Skeleton skel;
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    HumanPose pose;
    for (int j = 0; j < human::kNumJoints; ++j)
      for (int c = 0; c < 3; ++c) pose.aa(j, c) = dist(rng);
    ShapeParams shape = ShapeParams::identity();
    shape.alpha = 0.7 + 0.6 * dist(rng) * 0.5 + 0.5;
    for (int i = 0; i < shape.beta.size(); ++i)
      shape.beta(i) = 0.8 + 0.2 * (dist(rng) + 1.0) / 2.0;
    for (int k = 0; k < shape.delta.rows(); ++k)
      for (int c = 0; c < 3; ++c) shape.delta(k, c) = 0.05 * dist(rng);

    Eigen::MatrixXd got = skel.keypoint_positions(pose, shape);
    Eigen::MatrixXd want = chain_oracle(skel, pose, shape);
    CHECK((got - want).norm() < 1e-9);

    // differentiable path agrees with the plain path
    ad::Tape tape;
    auto kv = skel.keypoint_positions(tape, tape.leaf(pose.flattened()), shape);
    CHECK((kv.value() - got).norm() < 1e-9);
  }
}

TEST_CASE("human mirror: involution and fixed point") {
  Skeleton skel;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  HumanPose pose;
  for (int j = 0; j < human::kNumJoints; ++j)
    for (int c = 0; c < 3; ++c) pose.aa(j, c) = dist(rng);
  HumanPose twice = skel.mirror(skel.mirror(pose));
  CHECK((twice.aa - pose.aa).norm() == 0.0);

  // a pose with only lateral-axis rotations mirrors to its left/right swap;
  // symmetric such poses are fixed points
  HumanPose sym;
  sym.aa.setZero();
  sym.aa(skel.joint_index("L_Knee"), 1) = 0.4;
  sym.aa(skel.joint_index("R_Knee"), 1) = 0.4;
  CHECK((skel.mirror(sym).aa - sym.aa).norm() < 1e-12);
}

TEST_CASE("correspondence: robot angles land on the right human joints") {
  Skeleton skel;
  auto tree = kin::load_robot_model(std::string(MIMIC_FIXTURE_DIR) +
                                    "/robots/planar_biped.xml");
  auto corr = human::derive_correspondence(tree, skel);
  CHECK(corr.size() == 11);  // all biped dofs correspond
  Eigen::VectorXd q = Eigen::VectorXd::Zero(tree.dof_count);
  int knee_dof = -1;
  for (const auto& link : tree.links)
    if (link.joint.name == "l_knee") knee_dof = link.joint.dof;
  REQUIRE(knee_dof >= 0);
  q(knee_dof) = 0.8;
  auto pose = human::pose_from_joints(corr, q);
  CHECK(pose.aa(skel.joint_index("L_Knee"), 1) == doctest::Approx(0.8));
  CHECK(pose.aa.row(skel.joint_index("R_Knee")).norm() == 0.0);
}
