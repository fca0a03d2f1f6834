#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mimic/motion/motion_sequence.hpp"

namespace mimic::motion {

struct ChannelSpec {
  std::string name;
  int dim = 0;
  int offset = 0;  // column offset inside the packed array
};

/// One packaged sequence: frames x total_dim array of reference channels.
/// Root position and yaw are not stored; only differential quantities and
/// gravity-relative values survive packaging.
struct StoredSequence {
  std::string name;
  double rate = 50.0;
  Eigen::MatrixXd data;  // frames x total_dim
  std::vector<ChannelSpec> channels;
  std::optional<std::pair<int, int>> cycle;

  Eigen::Index frames() const { return data.rows(); }
  const ChannelSpec* channel(const std::string& name) const;
  Eigen::VectorXd slice(Eigen::Index frame, const ChannelSpec& ch) const {
    return data.row(frame).segment(ch.offset, ch.dim).transpose();
  }
};

struct Dataset {
  std::vector<StoredSequence> sequences;
  std::uint64_t seed = 0;
  std::string config_hash;

  Eigen::Index total_frames() const;
};

/// Packs augmented sequences into a dataset directory: manifest.json plus
/// one binary array per sequence.
void build_dataset(const std::filesystem::path& dir,
                   const std::vector<MotionSequence>& sequences,
                   std::uint64_t seed, const std::string& config_hash);

/// Loads and verifies a dataset directory (checksums, declared shapes).
Dataset load_dataset(const std::filesystem::path& dir);

/// The packed channel layout of an augmented sequence.
std::vector<ChannelSpec> packed_channels(const MotionSequence& seq);
Eigen::MatrixXd pack_channels(const MotionSequence& seq);

}  // namespace mimic::motion
