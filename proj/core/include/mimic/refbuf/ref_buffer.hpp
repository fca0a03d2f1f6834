#pragma once

#include "mimic/motion/dataset.hpp"
#include "mimic/util/rng.hpp"

namespace mimic::refbuf {

/// Reference state served for one environment at one timestep. When the
/// mask is 0 the content is zeroed; consumers must not rely on it.
struct ReferenceState {
  Eigen::VectorXd row;      // packed channel row (zeroed when unavailable)
  const motion::StoredSequence* seq = nullptr;
  bool available = false;

  Eigen::VectorXd term(const std::string& name) const;
};

/// Absolute root pose reconstructed from differential channels.
struct AbsoluteRoot {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  Eigen::Vector4d orientation = {1, 0, 0, 0};  // yaw composed with ref roll/pitch
};

struct CommandRanges {
  Eigen::Vector2d vx{-1.0, 1.0};
  Eigen::Vector2d vy{0.0, 0.0};
  Eigen::Vector2d wz{0.0, 0.0};
};

/// Indexed store of expert sequences with per-environment cursors, cyclic
/// lookup, cached differential-to-absolute integration and availability
/// masks. Loaded data is immutable; per-env records are independent.
class RefDataBuffer {
 public:
  explicit RefDataBuffer(motion::Dataset dataset, int num_envs);

  static RefDataBuffer load(const std::filesystem::path& dataset_dir,
                            int num_envs);

  int num_envs() const { return static_cast<int>(envs_.size()); }
  const motion::Dataset& dataset() const { return data_; }

  /// Sequence frame for local step t: start + t, wrapped through the cycle
  /// when one exists; unavailable past the end otherwise.
  ReferenceState query(int env, int t) const;
  bool available(int env, int t) const;

  /// Integrates stored velocities from the cached frame up to t, anchored
  /// at the env's reset-time world anchor. Amortized O(1) per step for
  /// monotone queries; a reset re-integrates from the start frame.
  AbsoluteRoot integrate_absolute(int env, int t);

  /// Samples a sequence and start frame uniformly, records the world
  /// anchor, and invalidates the integration cache.
  void reset_env(int env, RngStream& rng, const Eigen::Vector3d& spawn_pos,
                 double spawn_yaw);
  /// Deterministic assignment (tests, evaluation).
  void assign(int env, int seq_id, int start_frame,
              const Eigen::Vector3d& spawn_pos, double spawn_yaw);

  /// Concatenates the configured terms in spec order; mask 1 iff the
  /// reference is available at t. Unknown terms are rejected.
  std::pair<Eigen::VectorXd, double> reference_observation(
      int env, int t, const std::vector<std::string>& spec) const;
  int observation_dim(const std::vector<std::string>& spec) const;

  /// Reference root velocities when available, otherwise a uniform sample
  /// from the configured command ranges.
  Eigen::Vector3d command_from_reference(int env, int t,
                                         const CommandRanges& ranges,
                                         RngStream& rng) const;

  int assigned_sequence(int env) const { return envs_[static_cast<std::size_t>(env)].seq_id; }
  int start_frame(int env) const { return envs_[static_cast<std::size_t>(env)].start; }

  /// Total integration steps performed (monotone-sweep cost instrumentation).
  long integration_steps() const { return integration_steps_; }

 private:
  struct EnvCursor {
    int seq_id = 0;
    int start = 0;
    Eigen::Vector3d anchor_pos = Eigen::Vector3d::Zero();
    double anchor_yaw = 0.0;
    // integration cache
    int cached_t = -1;
    Eigen::Vector2d cached_xy = Eigen::Vector2d::Zero();
    double cached_yaw = 0.0;
  };

  // frame index for local step t, or -1 when unavailable
  Eigen::Index frame_index(const EnvCursor& c, int t) const;
  void integrate_one(const motion::StoredSequence& seq, EnvCursor& c, int t);

  motion::Dataset data_;
  std::vector<EnvCursor> envs_;
  mutable long integration_steps_ = 0;
};

}  // namespace mimic::refbuf
