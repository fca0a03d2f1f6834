#include "mimic/kin/symmetry.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace mimic::kin {

namespace {
// "l_hip" <-> "r_hip", "L_Knee" <-> "R_Knee"; other names map to themselves
std::string side_swapped(const std::string& name) {
  if (name.size() >= 2 && name[1] == '_') {
    if (name[0] == 'l') return "r" + name.substr(1);
    if (name[0] == 'r') return "l" + name.substr(1);
    if (name[0] == 'L') return "R" + name.substr(1);
    if (name[0] == 'R') return "L" + name.substr(1);
  }
  return name;
}
}  // namespace

Eigen::VectorXd SymmetryMap::mirror_joints(const Eigen::VectorXd& q) const {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i)
    out(i) = joint_sign(i) * q(joint_perm[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::MatrixXd SymmetryMap::mirror_keypoints(const Eigen::MatrixXd& pts) const {
  Eigen::MatrixXd out(pts.rows(), pts.cols());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    out.row(i) = pts.row(keypoint_perm[static_cast<std::size_t>(i)]);
    out(i, lateral_axis) = -out(i, lateral_axis);
  }
  return out;
}

SymmetryMap build_symmetry_map(const KinematicTree& tree) {
  SymmetryMap map;
  map.joint_perm.resize(static_cast<std::size_t>(tree.dof_count));
  map.joint_sign.resize(tree.dof_count);

  std::map<std::string, int> dof_by_joint;
  for (const auto& link : tree.links)
    if (link.joint.dof >= 0) dof_by_joint[link.joint.name] = link.joint.dof;

  for (const auto& link : tree.links) {
    if (link.joint.dof < 0) continue;
    const int d = link.joint.dof;
    const std::string partner = side_swapped(link.joint.name);
    auto it = dof_by_joint.find(partner);
    if (it == dof_by_joint.end())
      throw std::runtime_error("symmetry map: joint '" + link.joint.name +
                               "' has no mirror partner '" + partner + "'");
    map.joint_perm[static_cast<std::size_t>(d)] = it->second;
    const double lat = std::abs(link.joint.axis(map.lateral_axis));
    map.joint_sign(d) = lat > 0.5 ? 1.0 : -1.0;
  }

  std::map<std::string, int> pair_by_human;
  for (std::size_t i = 0; i < tree.keypoints.pairs.size(); ++i)
    pair_by_human[tree.keypoints.pairs[i].human] = static_cast<int>(i);
  map.keypoint_perm.resize(tree.keypoints.pairs.size());
  for (std::size_t i = 0; i < tree.keypoints.pairs.size(); ++i) {
    const std::string partner = side_swapped(tree.keypoints.pairs[i].human);
    auto it = pair_by_human.find(partner);
    if (it == pair_by_human.end())
      throw std::runtime_error("symmetry map: keypoint '" +
                               tree.keypoints.pairs[i].human +
                               "' has no mirror partner");
    map.keypoint_perm[i] = it->second;
  }
  return map;
}

}  // namespace mimic::kin
