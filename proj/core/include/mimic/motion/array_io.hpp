#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace mimic::motion {

/// Binary array file: magic, version, shape header, CRC, then row-major
/// little-endian float32 payload.
void save_array(const std::filesystem::path& path, const Eigen::MatrixXf& data);
Eigen::MatrixXf load_array(const std::filesystem::path& path);

}  // namespace mimic::motion
