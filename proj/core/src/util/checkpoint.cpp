#include "mimic/util/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mimic::ckpt {

namespace {

constexpr char kMagic[8] = {'M', 'I', 'M', 'C', 'K', 'P', 'T', '1'};

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated while reading " + what);
  return v;
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
  static const auto table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

const Eigen::MatrixXd* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : blobs)
    if (n == name) return &m;
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    write_pod(out, c.version);
    write_pod(out, c.seed);
    const std::string cfg = c.config.dump();
    write_pod(out, static_cast<std::uint32_t>(cfg.size()));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_pod(out, static_cast<std::uint32_t>(c.blobs.size()));
    for (const auto& [name, m] : c.blobs) {
      write_pod(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_pod(out, static_cast<std::uint64_t>(m.rows()));
      write_pod(out, static_cast<std::uint64_t>(m.cols()));
      std::vector<double> row_major(static_cast<std::size_t>(m.size()));
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) row_major[k++] = m(i, j);
      const auto* bytes = reinterpret_cast<const unsigned char*>(row_major.data());
      const std::size_t nbytes = row_major.size() * sizeof(double);
      write_pod(out, crc32(bytes, nbytes));
      out.write(reinterpret_cast<const char*>(bytes),
                static_cast<std::streamsize>(nbytes));
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  Checkpoint c;
  c.version = read_pod<std::uint32_t>(in, "version");
  if (c.version != 1)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(c.version));
  c.seed = read_pod<std::uint64_t>(in, "seed");
  const auto cfg_len = read_pod<std::uint32_t>(in, "config length");
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), cfg_len);
  if (!in) throw std::runtime_error("checkpoint: truncated config");
  c.config = Json::parse(cfg);
  const auto count = read_pod<std::uint32_t>(in, "blob count");
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto name_len = read_pod<std::uint32_t>(in, "name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint64_t>(in, "rows");
    const auto cols = read_pod<std::uint64_t>(in, "cols");
    const auto want_crc = read_pod<std::uint32_t>(in, "crc");
    std::vector<double> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in)
      throw std::runtime_error("checkpoint: truncated blob '" + name + "'");
    const auto got_crc = crc32(reinterpret_cast<const unsigned char*>(data.data()),
                               data.size() * sizeof(double));
    if (got_crc != want_crc)
      throw std::runtime_error("checkpoint: checksum mismatch in blob '" + name +
                               "'");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = data[k++];
    c.blobs.emplace_back(std::move(name), std::move(m));
  }
  return c;
}

}  // namespace mimic::ckpt
