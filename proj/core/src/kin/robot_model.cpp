#include "mimic/kin/robot_model.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mimic/util/json_io.hpp"

namespace mimic::kin {

namespace pt = boost::property_tree;

namespace {

Eigen::Vector3d parse_vec3(const std::string& s, const std::string& where) {
  std::istringstream in(s);
  Eigen::Vector3d v;
  if (!(in >> v.x() >> v.y() >> v.z()))
    throw ParseError("malformed 3-vector '" + s + "' in " + where);
  return v;
}

Eigen::Matrix3d rpy_to_rot(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

struct RawJoint {
  std::string name;
  std::string parent;
  std::string child;
  Joint data;
};

}  // namespace

int KinematicTree::link_index(const std::string& name) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].name == name) return static_cast<int>(i);
  return -1;
}

Eigen::VectorXd KinematicTree::lower_limits() const {
  Eigen::VectorXd lo(dof_count);
  for (const auto& l : links)
    if (l.joint.dof >= 0) lo(l.joint.dof) = l.joint.lower;
  return lo;
}

Eigen::VectorXd KinematicTree::upper_limits() const {
  Eigen::VectorXd hi(dof_count);
  for (const auto& l : links)
    if (l.joint.dof >= 0) hi(l.joint.dof) = l.joint.upper;
  return hi;
}

Eigen::VectorXd KinematicTree::clamp_to_limits(const Eigen::VectorXd& q) const {
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

double KinematicTree::reach() const {
  // accumulate |origin| down every chain; longest root-to-leaf path
  std::vector<double> depth(links.size(), 0.0);
  double best = 0.0;
  for (std::size_t i = 1; i < links.size(); ++i) {
    depth[i] = depth[static_cast<std::size_t>(links[i].parent)] +
               links[i].joint.origin_xyz.norm();
    best = std::max(best, depth[i]);
  }
  return best;
}

KinematicTree parse_robot_model(const std::string& document) {
  pt::ptree tree;
  std::istringstream in(document);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed robot description: ") + e.what());
  }

  auto robot = tree.get_child_optional("robot");
  if (!robot) throw ParseError("missing <robot> root element");

  std::set<std::string> link_names;
  std::vector<std::string> link_order;
  std::vector<RawJoint> joints;

  for (const auto& [key, node] : *robot) {
    if (key == "link") {
      auto name = node.get_optional<std::string>("<xmlattr>.name");
      if (!name) throw ParseError("link element without a name attribute");
      if (!link_names.insert(*name).second)
        throw ParseError("duplicate link '" + *name + "'");
      link_order.push_back(*name);
    } else if (key == "joint") {
      RawJoint rj;
      rj.name = node.get<std::string>("<xmlattr>.name", "");
      if (rj.name.empty()) throw ParseError("joint element without a name attribute");
      const std::string type = node.get<std::string>("<xmlattr>.type", "");
      if (type == "revolute")
        rj.data.type = JointType::Revolute;
      else if (type == "fixed")
        rj.data.type = JointType::Fixed;
      else
        throw ParseError("joint '" + rj.name + "': unsupported type '" + type +
                         "' (only revolute and fixed)");
      rj.parent = node.get<std::string>("parent.<xmlattr>.link", "");
      rj.child = node.get<std::string>("child.<xmlattr>.link", "");
      if (rj.parent.empty() || rj.child.empty())
        throw ParseError("joint '" + rj.name + "': missing parent or child link");
      if (auto origin = node.get_child_optional("origin")) {
        if (auto xyz = origin->get_optional<std::string>("<xmlattr>.xyz"))
          rj.data.origin_xyz = parse_vec3(*xyz, "joint '" + rj.name + "'");
        if (auto rpy = origin->get_optional<std::string>("<xmlattr>.rpy"))
          rj.data.origin_rot =
              rpy_to_rot(parse_vec3(*rpy, "joint '" + rj.name + "'"));
      }
      if (rj.data.type == JointType::Revolute) {
        auto axis = node.get_optional<std::string>("axis.<xmlattr>.xyz");
        if (!axis) throw ParseError("joint '" + rj.name + "': missing axis");
        rj.data.axis = parse_vec3(*axis, "joint '" + rj.name + "'").normalized();
        auto limit = node.get_child_optional("limit");
        if (!limit)
          throw ParseError("joint '" + rj.name + "': revolute joint without limits");
        auto lower = limit->get_optional<double>("<xmlattr>.lower");
        auto upper = limit->get_optional<double>("<xmlattr>.upper");
        if (!lower || !upper)
          throw ParseError("joint '" + rj.name +
                           "': limit element missing lower or upper attribute");
        rj.data.lower = *lower;
        rj.data.upper = *upper;
        if (rj.data.lower > rj.data.upper)
          throw ParseError("joint '" + rj.name + "': lower limit exceeds upper");
      }
      rj.data.name = rj.name;
      joints.push_back(std::move(rj));
    }
  }

  if (link_order.empty()) throw ParseError("robot description declares no links");

  // resolve parentage
  std::map<std::string, const RawJoint*> joint_of_child;
  for (const auto& j : joints) {
    if (!link_names.count(j.parent))
      throw ParseError("joint '" + j.name + "': parent link '" + j.parent +
                       "' does not exist");
    if (!link_names.count(j.child))
      throw ParseError("joint '" + j.name + "': child link '" + j.child +
                       "' does not exist");
    if (joint_of_child.count(j.child))
      throw ParseError("link '" + j.child + "' has more than one parent joint");
    joint_of_child[j.child] = &j;
  }

  std::vector<std::string> roots;
  for (const auto& name : link_order)
    if (!joint_of_child.count(name)) roots.push_back(name);
  if (roots.size() != 1)
    throw ParseError(roots.empty()
                         ? "no root link (cyclic parentage)"
                         : "multiple root links: '" + roots[0] + "', '" + roots[1] + "'");

  std::map<std::string, std::vector<std::string>> children;
  for (const auto& j : joints) children[j.parent].push_back(j.child);
  for (auto& [_, c] : children) std::sort(c.begin(), c.end());

  // depth-first with name-sorted children; deterministic joint ordering
  KinematicTree out;
  std::vector<std::string> stack{roots[0]};
  std::set<std::string> visited;
  while (!stack.empty()) {
    const std::string name = stack.back();
    stack.pop_back();
    if (!visited.insert(name).second)
      throw ParseError("cyclic parentage at link '" + name + "'");
    Link link;
    link.name = name;
    if (auto it = joint_of_child.find(name); it != joint_of_child.end()) {
      link.joint = it->second->data;
      link.parent = out.link_index(it->second->parent);
      if (link.joint.type == JointType::Revolute) {
        link.joint.dof = out.dof_count++;
        out.dof_to_link.push_back(static_cast<int>(out.links.size()));
      }
    }
    out.links.push_back(std::move(link));
    if (auto it = children.find(name); it != children.end())
      for (auto c = it->second.rbegin(); c != it->second.rend(); ++c)
        stack.push_back(*c);
  }

  if (visited.size() != link_names.size()) {
    for (const auto& name : link_order)
      if (!visited.count(name))
        throw ParseError("link '" + name + "' unreachable from root (cyclic parentage)");
  }
  return out;
}

KinematicTree load_robot_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open robot model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_robot_model(buf.str());
}

namespace {

// ".*_Knee" + ".*_shin" expand over sides (L,R) / (l,r); plain names pass through
std::vector<KeypointPair> expand_entry(const KeypointMap::Entry& e) {
  std::vector<KeypointPair> out;
  const std::string prefix = ".*";
  const bool human_pat = e.human_pattern.rfind(prefix, 0) == 0;
  const bool robot_pat = e.robot_pattern.rfind(prefix, 0) == 0;
  if (human_pat != robot_pat)
    throw ParseError("keypoint entry '" + e.human_pattern +
                     "': both sides must be patterns or both plain names");
  if (!human_pat) {
    out.push_back({e.human_pattern, e.robot_pattern, -1, e.weight});
    return out;
  }
  const std::string hsuf = e.human_pattern.substr(prefix.size());
  const std::string rsuf = e.robot_pattern.substr(prefix.size());
  out.push_back({"L" + hsuf, "l" + rsuf, -1, e.weight});
  out.push_back({"R" + hsuf, "r" + rsuf, -1, e.weight});
  return out;
}

}  // namespace

Eigen::VectorXd KeypointMap::pair_weights() const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = pairs[i].weight;
  return w;
}

KeypointMap parse_keypoint_map(const std::string& json_text,
                               const KinematicTree& tree) {
  Json j = Json::parse(json_text);
  KeypointMap map;
  for (const auto& item : j.at("keypoints")) {
    KeypointMap::Entry e;
    e.human_pattern = item.at("human").get<std::string>();
    e.robot_pattern = item.at("robot").get<std::string>();
    e.weight = item.value("weight", 1.0);
    if (e.weight < 0.0)
      throw ParseError("keypoint '" + e.human_pattern + "': negative weight");
    map.entries.push_back(e);
    for (auto pair : expand_entry(e)) {
      pair.link = tree.link_index(pair.robot);
      if (pair.link < 0)
        throw ParseError("keypoint '" + pair.human + "': robot link '" +
                         pair.robot + "' does not exist");
      map.pairs.push_back(std::move(pair));
    }
  }
  if (map.pairs.empty()) throw ParseError("keypoint map is empty");

  if (j.contains("single_dof")) {
    for (const auto& item : j.at("single_dof")) {
      SingleDofEntry e;
      e.robot_joint = item.at("robot").get<std::string>();
      e.human_joint = item.at("human").get<std::string>();
      e.axis = item.value("axis", 1);
      for (const auto& link : tree.links)
        if (link.joint.name == e.robot_joint) e.dof = link.joint.dof;
      if (e.dof < 0)
        throw ParseError("single_dof: unknown robot joint '" + e.robot_joint + "'");
      map.single_dof.push_back(std::move(e));
    }
  }
  return map;
}

KeypointMap load_keypoint_map(const std::filesystem::path& path,
                              const KinematicTree& tree) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open keypoint map " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_keypoint_map(buf.str(), tree);
}

}  // namespace mimic::kin
