#include "mimic/motion/dataset.hpp"

#include <stdexcept>

#include "mimic/motion/array_io.hpp"
#include "mimic/util/json_io.hpp"

namespace mimic::motion {

const ChannelSpec* StoredSequence::channel(const std::string& cname) const {
  for (const auto& c : channels)
    if (c.name == cname) return &c;
  return nullptr;
}

Eigen::Index Dataset::total_frames() const {
  Eigen::Index n = 0;
  for (const auto& s : sequences) n += s.frames();
  return n;
}

std::vector<ChannelSpec> packed_channels(const MotionSequence& seq) {
  if (!seq.augmented())
    throw std::invalid_argument("dataset: sequence must be augmented first");
  std::vector<ChannelSpec> out;
  int offset = 0;
  auto push = [&](const std::string& name, int dim) {
    out.push_back({name, dim, offset});
    offset += dim;
  };
  push("joint_pos", static_cast<int>(seq.joint_pos.cols()));
  push("joint_vel", static_cast<int>(seq.joint_vel.cols()));
  push("root_lin_vel", 3);
  push("root_ang_vel", 3);
  push("gravity", 3);
  push("root_height", 1);
  push("contacts", static_cast<int>(seq.contacts.cols()));
  push("contact_phase", static_cast<int>(seq.contact_phase.cols()));
  return out;
}

Eigen::MatrixXd pack_channels(const MotionSequence& seq) {
  const auto channels = packed_channels(seq);
  const int total = channels.back().offset + channels.back().dim;
  Eigen::MatrixXd data(seq.frames(), total);
  data << seq.joint_pos, seq.joint_vel, seq.root_lin_vel_b, seq.root_ang_vel_b,
      seq.gravity_b, seq.root_height, seq.contacts, seq.contact_phase;
  return data;
}

void build_dataset(const std::filesystem::path& dir,
                   const std::vector<MotionSequence>& sequences,
                   std::uint64_t seed, const std::string& config_hash) {
  if (sequences.empty()) throw std::invalid_argument("build_dataset: no sequences");
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["config_hash"] = config_hash;
  manifest["sequences"] = Json::array();

  int index = 0;
  for (const auto& seq : sequences) {
    seq.validate();
    const auto channels = packed_channels(seq);
    char file[32];
    std::snprintf(file, sizeof file, "seq_%03d.bin", index);
    save_array(dir / file, pack_channels(seq).cast<float>());

    Json entry;
    entry["name"] = seq.name.empty() ? std::string(file) : seq.name;
    entry["file"] = file;
    entry["rate"] = seq.rate;
    entry["frames"] = seq.frames();
    entry["channels"] = Json::array();
    for (const auto& c : channels)
      entry["channels"].push_back({{"name", c.name}, {"dim", c.dim}});
    if (seq.cycle)
      entry["cycle"] = {seq.cycle->first, seq.cycle->second};
    else
      entry["cycle"] = nullptr;
    manifest["sequences"].push_back(std::move(entry));
    ++index;
  }
  save_json(dir / "manifest.json", manifest);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  Json manifest = load_json(manifest_path);
  if (manifest.value("version", 0) != 1)
    throw std::runtime_error("dataset: unsupported manifest version in " +
                             manifest_path.string());
  Dataset out;
  out.seed = manifest.value("seed", 0ull);
  out.config_hash = manifest.value("config_hash", "");
  for (const auto& entry : manifest.at("sequences")) {
    StoredSequence s;
    s.name = entry.at("name").get<std::string>();
    s.rate = entry.at("rate").get<double>();
    const std::string file = entry.at("file").get<std::string>();
    Eigen::MatrixXf raw = load_array(dir / file);
    s.data = raw.cast<double>();
    int offset = 0;
    for (const auto& c : entry.at("channels")) {
      ChannelSpec ch;
      ch.name = c.at("name").get<std::string>();
      ch.dim = c.at("dim").get<int>();
      ch.offset = offset;
      offset += ch.dim;
      s.channels.push_back(std::move(ch));
    }
    if (offset != s.data.cols())
      throw std::runtime_error("dataset: channel dims do not match array in " +
                               file);
    const auto frames = entry.at("frames").get<Eigen::Index>();
    if (frames != s.data.rows())
      throw std::runtime_error("dataset: frame count mismatch in " + file);
    if (!entry.at("cycle").is_null()) {
      s.cycle = {entry.at("cycle")[0].get<int>(), entry.at("cycle")[1].get<int>()};
      if (s.cycle->first < 0 || s.cycle->second <= s.cycle->first ||
          s.cycle->second >= frames)
        throw std::runtime_error("dataset: invalid cycle indices in " + file);
    }
    out.sequences.push_back(std::move(s));
  }
  if (out.sequences.empty()) throw std::runtime_error("dataset: empty manifest");
  return out;
}

}  // namespace mimic::motion
