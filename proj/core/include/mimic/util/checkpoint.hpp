#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mimic/util/json_io.hpp"

namespace mimic::ckpt {

/// Versioned binary checkpoint: config echo as JSON plus named float64
/// blobs, each CRC-checked. Written atomically (temp file + rename).
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint64_t seed = 0;
  Json config;  // echo of the producing configuration
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blobs;

  void add(const std::string& name, const Eigen::MatrixXd& m) {
    blobs.emplace_back(name, m);
  }
  const Eigen::MatrixXd* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32(const unsigned char* data, std::size_t len);

}  // namespace mimic::ckpt
