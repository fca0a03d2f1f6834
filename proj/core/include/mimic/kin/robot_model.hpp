#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimic::kin {

enum class JointType { Revolute, Fixed };

struct Joint {
  std::string name;
  JointType type = JointType::Fixed;
  Eigen::Vector3d origin_xyz = Eigen::Vector3d::Zero();
  Eigen::Matrix3d origin_rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double lower = 0.0;
  double upper = 0.0;
  int dof = -1;  // index into the joint vector, -1 for fixed joints
};

struct Link {
  std::string name;
  int parent = -1;  // index into links, -1 for the root
  Joint joint;      // joint connecting parent -> this link (unused on root)
};

/// One concrete keypoint correspondence after pattern expansion.
struct KeypointPair {
  std::string human;   // e.g. "L_Knee"
  std::string robot;   // robot link name
  int link = -1;
  double weight = 1.0;
};

/// Robot joints with a single valid degree of freedom (knees), tied to the
/// matching component of the source human joint angle.
struct SingleDofEntry {
  std::string robot_joint;
  std::string human_joint;
  int axis = 1;   // angle-axis component carrying the rotation
  int dof = -1;   // resolved robot dof index
};

/// Logical keypoint map (pelvis, knees, ankles, ...), mirroring the
/// user-provided name-mapping file. `.*` patterns expand to left/right.
struct KeypointMap {
  struct Entry {
    std::string human_pattern;
    std::string robot_pattern;
    double weight = 1.0;
  };
  std::vector<Entry> entries;       // as written in the file
  std::vector<KeypointPair> pairs;  // expanded and resolved
  std::vector<SingleDofEntry> single_dof;

  std::size_t size() const { return entries.size(); }
  Eigen::VectorXd pair_weights() const;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class KinematicTree {
 public:
  std::vector<Link> links;  // topological order, root first
  int dof_count = 0;
  std::vector<int> dof_to_link;  // link driven by each dof
  KeypointMap keypoints;

  int link_index(const std::string& name) const;  // -1 when absent
  const Link& root() const { return links.front(); }

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;

  /// Element-wise clamp into [lower, upper]; idempotent.
  Eigen::VectorXd clamp_to_limits(const Eigen::VectorXd& q) const;

  /// Longest root-to-keypoint chain length at zero pose, a scale reference.
  double reach() const;
};

/// Parse an XML robot description (link/joint elements, URDF-style schema
/// documented in the README). Joints are ordered by a depth-first traversal
/// with children sorted by name. Prismatic or other joint types are rejected.
KinematicTree parse_robot_model(const std::string& document);
KinematicTree load_robot_model(const std::filesystem::path& path);

/// Load and resolve a keypoint-map JSON against the tree.
KeypointMap load_keypoint_map(const std::filesystem::path& path,
                              const KinematicTree& tree);
KeypointMap parse_keypoint_map(const std::string& json_text,
                               const KinematicTree& tree);

}  // namespace mimic::kin
