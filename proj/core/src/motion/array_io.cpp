#include "mimic/motion/array_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "mimic/util/checkpoint.hpp"

namespace mimic::motion {

namespace {
constexpr char kMagic[8] = {'M', 'I', 'M', 'I', 'C', 'A', 'R', 'R'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_array(const std::filesystem::path& path, const Eigen::MatrixXf& data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("array: cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&kVersion), 4);
    const std::uint32_t rank = 2;
    out.write(reinterpret_cast<const char*>(&rank), 4);
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(data.rows()),
                                   static_cast<std::uint64_t>(data.cols())};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    std::vector<float> row_major(static_cast<std::size_t>(data.size()));
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      for (Eigen::Index j = 0; j < data.cols(); ++j) row_major[k++] = data(i, j);
    const auto* bytes = reinterpret_cast<const unsigned char*>(row_major.data());
    const std::uint32_t crc =
        ckpt::crc32(bytes, row_major.size() * sizeof(float));
    out.write(reinterpret_cast<const char*>(&crc), 4);
    out.write(reinterpret_cast<const char*>(bytes),
              static_cast<std::streamsize>(row_major.size() * sizeof(float)));
  }
  std::filesystem::rename(tmp, path);
}

Eigen::MatrixXf load_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("array: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("array: bad header in " + path.string());
  std::uint32_t version = 0, rank = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&rank), 4);
  if (version != kVersion)
    throw std::runtime_error("array: version mismatch in " + path.string());
  if (rank != 2) throw std::runtime_error("array: unsupported rank in " + path.string());
  std::uint64_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  std::uint32_t want_crc = 0;
  in.read(reinterpret_cast<char*>(&want_crc), 4);
  if (!in) throw std::runtime_error("array: truncated header in " + path.string());
  std::vector<float> row_major(dims[0] * dims[1]);
  in.read(reinterpret_cast<char*>(row_major.data()),
          static_cast<std::streamsize>(row_major.size() * sizeof(float)));
  if (!in) throw std::runtime_error("array: truncated payload in " + path.string());
  const auto got_crc = ckpt::crc32(
      reinterpret_cast<const unsigned char*>(row_major.data()),
      row_major.size() * sizeof(float));
  if (got_crc != want_crc)
    throw std::runtime_error("array: checksum mismatch in " + path.string());
  Eigen::MatrixXf data(dims[0], dims[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) = row_major[k++];
  return data;
}

}  // namespace mimic::motion
