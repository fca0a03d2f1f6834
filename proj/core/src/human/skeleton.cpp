#include "mimic/human/skeleton.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

#include "mimic/kin/forward_kinematics.hpp"

namespace mimic::human {

ShapeParams ShapeParams::identity() {
  ShapeParams s;
  s.beta = Eigen::VectorXd::Ones(kNumJoints - 1);
  s.delta = Eigen::MatrixXd::Zero(11, 3);
  return s;
}

void ShapeParams::validate() const {
  if (alpha <= 0.0) throw std::invalid_argument("shape: alpha must be > 0");
  if ((beta.array() <= 0.0).any())
    throw std::invalid_argument("shape: beta entries must be > 0");
}

Eigen::VectorXd HumanPose::flattened() const {
  Eigen::VectorXd v(kNumJoints * 3);
  for (int j = 0; j < kNumJoints; ++j) v.segment<3>(3 * j) = aa.row(j).transpose();
  return v;
}

HumanPose HumanPose::from_flat(const Eigen::VectorXd& v) {
  if (v.size() != kNumJoints * 3)
    throw std::invalid_argument("HumanPose: expected 66 values");
  HumanPose p;
  for (int j = 0; j < kNumJoints; ++j) p.aa.row(j) = v.segment<3>(3 * j).transpose();
  return p;
}

void HumanPose::validate() const {
  if (!aa.allFinite()) throw std::invalid_argument("HumanPose: non-finite entries");
  for (int j = 0; j < kNumJoints; ++j)
    if (aa.row(j).norm() >= 2.0 * M_PI)
      throw std::invalid_argument("HumanPose: rotation magnitude >= 2*pi");
}

Skeleton::Skeleton() {
  struct Entry {
    const char* name;
    int parent;
    double x, y, z;
  };
  // y is the lateral axis (left positive), z up, x forward
  static const Entry kJoints[kNumJoints] = {
      {"Pelvis", -1, 0.0, 0.0, 0.0},
      {"L_Hip", 0, 0.0, 0.10, -0.06},
      {"R_Hip", 0, 0.0, -0.10, -0.06},
      {"Spine1", 0, 0.0, 0.0, 0.10},
      {"L_Knee", 1, 0.0, 0.0, -0.40},
      {"R_Knee", 2, 0.0, 0.0, -0.40},
      {"Spine2", 3, 0.0, 0.0, 0.12},
      {"L_Ankle", 4, 0.0, 0.0, -0.40},
      {"R_Ankle", 5, 0.0, 0.0, -0.40},
      {"Spine3", 6, 0.0, 0.0, 0.12},
      {"L_Foot", 7, 0.12, 0.0, -0.05},
      {"R_Foot", 8, 0.12, 0.0, -0.05},
      {"Neck", 9, 0.0, 0.0, 0.10},
      {"L_Collar", 9, 0.0, 0.08, 0.02},
      {"R_Collar", 9, 0.0, -0.08, 0.02},
      {"Head", 12, 0.0, 0.0, 0.12},
      {"L_Shoulder", 13, 0.0, 0.12, 0.0},
      {"R_Shoulder", 14, 0.0, -0.12, 0.0},
      {"L_Elbow", 16, 0.0, 0.0, -0.28},
      {"R_Elbow", 17, 0.0, 0.0, -0.28},
      {"L_Wrist", 18, 0.0, 0.0, -0.25},
      {"R_Wrist", 19, 0.0, 0.0, -0.25},
  };
  rest_offsets_.resize(kNumJoints, 3);
  for (int j = 0; j < kNumJoints; ++j) {
    joint_names_.emplace_back(kJoints[j].name);
    parents_.push_back(kJoints[j].parent);
    rest_offsets_.row(j) << kJoints[j].x, kJoints[j].y, kJoints[j].z;
  }
  keypoint_names_ = {"Pelvis",     "L_Knee",  "R_Knee",  "L_Ankle",
                     "R_Ankle",    "L_Shoulder", "R_Shoulder", "L_Elbow",
                     "R_Elbow",    "L_Wrist", "R_Wrist"};
  for (const auto& name : keypoint_names_)
    keypoint_joint_.push_back(joint_index(name));

  mirror_perm_.resize(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    std::string n = joint_names_[static_cast<std::size_t>(j)];
    if (n.rfind("L_", 0) == 0) n = "R" + n.substr(1);
    else if (n.rfind("R_", 0) == 0) n = "L" + n.substr(1);
    mirror_perm_[static_cast<std::size_t>(j)] = joint_index(n);
  }
}

int Skeleton::joint_index(const std::string& name) const {
  for (std::size_t i = 0; i < joint_names_.size(); ++i)
    if (joint_names_[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("skeleton: unknown joint '" + name + "'");
}

int Skeleton::keypoint_index(const std::string& name) const {
  for (std::size_t i = 0; i < keypoint_names_.size(); ++i)
    if (keypoint_names_[i] == name) return static_cast<int>(i);
  return -1;
}

Eigen::MatrixXd Skeleton::joint_positions(const HumanPose& pose,
                                          const ShapeParams& shape) const {
  Eigen::MatrixXd pos(kNumJoints, 3);
  std::vector<Eigen::Matrix3d> rot(kNumJoints);
  pos.row(0).setZero();
  {
    const Eigen::Vector3d v = pose.aa.row(0).transpose();
    const double th = v.norm();
    rot[0] = th > 0 ? Eigen::AngleAxisd(th, v / th).toRotationMatrix()
                    : Eigen::Matrix3d::Identity();
  }
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = parents_[static_cast<std::size_t>(j)];
    const Eigen::Vector3d off =
        shape.beta(j - 1) * rest_offsets_.row(j).transpose();
    pos.row(j) = pos.row(p) + (rot[static_cast<std::size_t>(p)] * off).transpose();
    const Eigen::Vector3d v = pose.aa.row(j).transpose();
    const double th = v.norm();
    const Eigen::Matrix3d local =
        th > 0 ? Eigen::AngleAxisd(th, v / th).toRotationMatrix()
               : Eigen::Matrix3d::Identity();
    rot[static_cast<std::size_t>(j)] = rot[static_cast<std::size_t>(p)] * local;
  }
  return pos;
}

Eigen::MatrixXd Skeleton::keypoint_positions(const HumanPose& pose,
                                             const ShapeParams& shape) const {
  // same recursion but keypoints need the joint orientations for delta
  Eigen::MatrixXd pos(kNumJoints, 3);
  std::vector<Eigen::Matrix3d> rot(kNumJoints);
  pos.row(0).setZero();
  {
    const Eigen::Vector3d v = pose.aa.row(0).transpose();
    const double th = v.norm();
    rot[0] = th > 0 ? Eigen::AngleAxisd(th, v / th).toRotationMatrix()
                    : Eigen::Matrix3d::Identity();
  }
  for (int j = 1; j < kNumJoints; ++j) {
    const int p = parents_[static_cast<std::size_t>(j)];
    const Eigen::Vector3d off =
        shape.beta(j - 1) * rest_offsets_.row(j).transpose();
    pos.row(j) = pos.row(p) + (rot[static_cast<std::size_t>(p)] * off).transpose();
    const Eigen::Vector3d v = pose.aa.row(j).transpose();
    const double th = v.norm();
    const Eigen::Matrix3d local =
        th > 0 ? Eigen::AngleAxisd(th, v / th).toRotationMatrix()
               : Eigen::Matrix3d::Identity();
    rot[static_cast<std::size_t>(j)] = rot[static_cast<std::size_t>(p)] * local;
  }
  Eigen::MatrixXd out(num_keypoints(), 3);
  for (int k = 0; k < num_keypoints(); ++k) {
    const int j = keypoint_joint_[static_cast<std::size_t>(k)];
    Eigen::Vector3d kp = pos.row(j).transpose() +
                         rot[static_cast<std::size_t>(j)] *
                             shape.delta.row(k).transpose();
    out.row(k) = (shape.alpha * kp).transpose();
  }
  return out;
}

ad::Var Skeleton::keypoint_positions(ad::Tape& tape, ad::Var pose66, ad::Var alpha,
                                     ad::Var beta, ad::Var delta) const {
  using ad::Var;
  if (pose66.rows() != kNumJoints * 3 || pose66.cols() != 1)
    throw std::invalid_argument("keypoint_positions: pose must be 66x1");
  std::vector<Var> pos(kNumJoints), rot(kNumJoints);
  pos[0] = tape.constant(Eigen::Vector3d::Zero());
  rot[0] = kin::rotation_from_angle_axis(tape, tape.block(pose66, 0, 0, 3, 1));
  for (int j = 1; j < kNumJoints; ++j) {
    const auto p = static_cast<std::size_t>(parents_[static_cast<std::size_t>(j)]);
    Var bj = tape.block(beta, j - 1, 0, 1, 1);
    Var off = tape.scale(
        tape.constant(Eigen::Vector3d(rest_offsets_.row(j).transpose())), bj);
    pos[static_cast<std::size_t>(j)] = tape.add(pos[p], tape.matmul(rot[p], off));
    Var local =
        kin::rotation_from_angle_axis(tape, tape.block(pose66, 3 * j, 0, 3, 1));
    rot[static_cast<std::size_t>(j)] = tape.matmul(rot[p], local);
  }
  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(num_keypoints()));
  for (int k = 0; k < num_keypoints(); ++k) {
    const auto j = static_cast<std::size_t>(keypoint_joint_[static_cast<std::size_t>(k)]);
    Var dk = tape.transpose(tape.block(delta, k, 0, 1, 3));  // 3x1
    Var kp = tape.add(pos[j], tape.matmul(rot[j], dk));
    rows.push_back(tape.transpose(tape.scale(kp, alpha)));
  }
  return tape.concat_rows(rows);
}

ad::Var Skeleton::keypoint_positions(ad::Tape& tape, ad::Var pose66,
                                     const ShapeParams& shape) const {
  return keypoint_positions(tape, pose66,
                            tape.scalar_const(shape.alpha),
                            tape.constant(shape.beta),
                            tape.constant(shape.delta));
}

HumanPose Skeleton::mirror(const HumanPose& pose) const {
  HumanPose out;
  for (int j = 0; j < kNumJoints; ++j) {
    const int m = mirror_perm_[static_cast<std::size_t>(j)];
    const Eigen::Vector3d v = pose.aa.row(m).transpose();
    // reflection about the x-z plane: R' = S R S with S = diag(1,-1,1)
    out.aa.row(j) << -v.x(), v.y(), -v.z();
  }
  return out;
}

}  // namespace mimic::human
