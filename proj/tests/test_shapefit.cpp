#include <doctest.h>

#include <Eigen/Geometry>

#include "mimic/human/correspondence.hpp"
#include "mimic/shapefit/shape_fit.hpp"

using namespace mimic;
using namespace mimic::shapefit;
using human::ShapeParams;
using human::Skeleton;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(MIMIC_FIXTURE_DIR) + "/" + rel;
}

kin::KinematicTree load(const std::string& robot) {
  auto tree = kin::load_robot_model(fixture("robots/" + robot));
  tree.keypoints = kin::load_keypoint_map(fixture("maps/biped_keypoints.json"), tree);
  return tree;
}

}  // namespace

TEST_CASE("fit_shape: self-fit on the matching biped") {
  auto tree = load("planar_biped.xml");
  Skeleton skel;
  auto pairs = default_pair_set(tree, skel);
  FitConfig cfg;
  cfg.iterations = 400;
  auto res = fit_shape(tree, skel, pairs, ShapeParams::identity(), cfg);
  CHECK(res.residual_max < 1e-6);
  CHECK(res.residual_mean < 1e-6);
  CHECK(res.shape.alpha == doctest::Approx(1.0).epsilon(1e-3));

  // milestones are non-increasing
  for (std::size_t i = 1; i < res.milestones.size(); ++i)
    CHECK(res.milestones[i] <= res.milestones[i - 1] + 1e-12);
}

TEST_CASE("fit_shape: recovers alpha on the half-scale biped") {
  auto tree = load("planar_biped_small.xml");
  Skeleton skel;
  auto pairs = default_pair_set(tree, skel);
  FitConfig cfg;
  cfg.iterations = 2000;
  auto res = fit_shape(tree, skel, pairs, ShapeParams::identity(), cfg);
  CHECK(res.shape.alpha >= 0.49);
  CHECK(res.shape.alpha <= 0.51);
  CHECK(res.residual_mean < 1e-3);
}

TEST_CASE("fit_shape: invariant to a common rotation of both pose sets") {
  auto tree = load("planar_biped.xml");
  Skeleton skel;
  auto pairs = default_pair_set(tree, skel);

  const Eigen::AngleAxisd rot(0.6, Eigen::Vector3d(0.2, 1.0, 0.3).normalized());
  std::vector<PairedPose> moved = pairs;
  for (auto& p : moved) {
    // same rigid rotation enters the human side through the root joint and
    // the robot side through the base pose
    p.pose.aa.row(0) = (rot.angle() * rot.axis()).transpose();
    p.robot_base.rotation = rot.toRotationMatrix();
  }

  FitConfig cfg;
  cfg.iterations = 400;
  auto base = fit_shape(tree, skel, pairs, ShapeParams::identity(), cfg);
  auto turned = fit_shape(tree, skel, moved, ShapeParams::identity(), cfg);
  CHECK(std::abs(base.shape.alpha - turned.shape.alpha) < 1e-6);
  CHECK(std::abs(base.residual_mean - turned.residual_mean) < 1e-9);
}

TEST_CASE("fit_shape: contract violations") {
  auto tree = load("planar_biped.xml");
  Skeleton skel;
  CHECK_THROWS_AS(fit_shape(tree, skel, {}, ShapeParams::identity(), {}),
                  std::invalid_argument);

  auto pairs = default_pair_set(tree, skel);
  pairs[0].robot_q(0) = 100.0;  // far outside limits
  CHECK_THROWS_AS(fit_shape(tree, skel, pairs, ShapeParams::identity(), {}),
                  std::invalid_argument);
}
