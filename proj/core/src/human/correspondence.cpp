#include "mimic/human/correspondence.hpp"

namespace mimic::human {

namespace {
std::string human_name_for(const std::string& robot_joint) {
  if (robot_joint == "torso") return "Spine1";
  std::string out;
  bool cap = true;
  for (char c : robot_joint) {
    if (c == '_') {
      out += '_';
      cap = true;
    } else {
      out += cap ? static_cast<char>(std::toupper(c)) : c;
      cap = false;
    }
  }
  return out;  // "l_hip" -> "L_Hip"
}
}  // namespace

std::vector<JointCorrespondence> derive_correspondence(
    const kin::KinematicTree& tree, const Skeleton& skel) {
  std::vector<JointCorrespondence> out;
  for (const auto& link : tree.links) {
    if (link.joint.dof < 0) continue;
    const std::string hname = human_name_for(link.joint.name);
    int hj = -1;
    for (std::size_t i = 0; i < skel.joint_names().size(); ++i)
      if (skel.joint_names()[i] == hname) hj = static_cast<int>(i);
    if (hj < 0) continue;
    out.push_back({link.joint.dof, hj, link.joint.axis});
  }
  return out;
}

HumanPose pose_from_joints(const std::vector<JointCorrespondence>& corr,
                           const Eigen::VectorXd& q) {
  HumanPose pose;
  for (const auto& c : corr)
    pose.aa.row(c.human_joint) = (q(c.robot_dof) * c.axis).transpose();
  return pose;
}

}  // namespace mimic::human
