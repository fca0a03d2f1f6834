#include "mimic/refbuf/ref_buffer.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic::refbuf {

using motion::StoredSequence;

Eigen::VectorXd ReferenceState::term(const std::string& name) const {
  if (!seq) throw std::runtime_error("reference state: no sequence bound");
  const motion::ChannelSpec* ch = seq->channel(name);
  if (!ch) throw std::invalid_argument("reference state: unknown term '" + name + "'");
  return row.segment(ch->offset, ch->dim);
}

RefDataBuffer::RefDataBuffer(motion::Dataset dataset, int num_envs)
    : data_(std::move(dataset)), envs_(static_cast<std::size_t>(num_envs)) {
  if (data_.sequences.empty())
    throw std::invalid_argument("ref buffer: empty dataset");
  for (auto& e : envs_) e.seq_id = 0;
}

RefDataBuffer RefDataBuffer::load(const std::filesystem::path& dir, int num_envs) {
  return RefDataBuffer(motion::load_dataset(dir), num_envs);
}

Eigen::Index RefDataBuffer::frame_index(const EnvCursor& c, int t) const {
  const auto& seq = data_.sequences[static_cast<std::size_t>(c.seq_id)];
  const Eigen::Index idx = c.start + t;
  if (idx < seq.frames()) return idx;
  if (seq.cycle) {
    const auto [i, j] = *seq.cycle;
    return i + (idx - i) % (j - i);
  }
  return -1;
}

bool RefDataBuffer::available(int env, int t) const {
  return frame_index(envs_[static_cast<std::size_t>(env)], t) >= 0;
}

ReferenceState RefDataBuffer::query(int env, int t) const {
  const EnvCursor& c = envs_[static_cast<std::size_t>(env)];
  const auto& seq = data_.sequences[static_cast<std::size_t>(c.seq_id)];
  ReferenceState out;
  out.seq = &seq;
  const Eigen::Index idx = frame_index(c, t);
  if (idx < 0) {
    out.available = false;
    out.row = Eigen::VectorXd::Zero(seq.data.cols());
  } else {
    out.available = true;
    out.row = seq.data.row(idx).transpose();
  }
  return out;
}

void RefDataBuffer::integrate_one(const StoredSequence& seq, EnvCursor& c, int t) {
  // one semi-implicit Euler step from local step t to t+1 at the native rate
  const Eigen::Index idx = frame_index(c, t);
  if (idx < 0) return;  // no reference; absolute state freezes
  const double dt = 1.0 / seq.rate;
  const auto* lin = seq.channel("root_lin_vel");
  const auto* ang = seq.channel("root_ang_vel");
  const Eigen::VectorXd v = seq.slice(idx, *lin);
  const Eigen::VectorXd w = seq.slice(idx, *ang);
  c.cached_yaw += w(2) * dt;
  const double cy = std::cos(c.cached_yaw), sy = std::sin(c.cached_yaw);
  c.cached_xy.x() += (cy * v(0) - sy * v(1)) * dt;
  c.cached_xy.y() += (sy * v(0) + cy * v(1)) * dt;
  ++integration_steps_;
}

AbsoluteRoot RefDataBuffer::integrate_absolute(int env, int t) {
  EnvCursor& c = envs_[static_cast<std::size_t>(env)];
  const auto& seq = data_.sequences[static_cast<std::size_t>(c.seq_id)];
  if (t < c.cached_t) {
    // non-monotone query: re-integrate from the start frame (worst case O(N))
    c.cached_t = 0;
    c.cached_xy.setZero();
    c.cached_yaw = 0.0;
  }
  if (c.cached_t < 0) {
    c.cached_t = 0;
    c.cached_xy.setZero();
    c.cached_yaw = 0.0;
  }
  while (c.cached_t < t) {
    integrate_one(seq, c, c.cached_t);
    ++c.cached_t;
  }

  AbsoluteRoot out;
  const double yaw = c.anchor_yaw + c.cached_yaw;
  const double ca = std::cos(c.anchor_yaw), sa = std::sin(c.anchor_yaw);
  out.position.x() = c.anchor_pos.x() + ca * c.cached_xy.x() - sa * c.cached_xy.y();
  out.position.y() = c.anchor_pos.y() + sa * c.cached_xy.x() + ca * c.cached_xy.y();
  out.yaw = yaw;

  const Eigen::Index idx = frame_index(c, t);
  double pitch = 0.0, roll = 0.0, height = 0.0;
  if (idx >= 0) {
    if (const auto* h = seq.channel("root_height")) height = seq.slice(idx, *h)(0);
    if (const auto* g = seq.channel("gravity")) {
      const Eigen::VectorXd gb = seq.slice(idx, *g);
      // body-frame gravity (0,0,-1) rotated by roll/pitch
      pitch = std::atan2(-gb(0), -gb(2));
      roll = std::atan2(gb(1), -gb(2));
    }
  }
  out.position.z() = height;
  const Eigen::Vector4d qyaw{std::cos(yaw / 2), 0, 0, std::sin(yaw / 2)};
  const Eigen::Vector4d qpitch{std::cos(pitch / 2), 0, std::sin(pitch / 2), 0};
  const Eigen::Vector4d qroll{std::cos(roll / 2), std::sin(roll / 2), 0, 0};
  out.orientation = motion::quat_multiply(qyaw, motion::quat_multiply(qpitch, qroll));
  return out;
}

void RefDataBuffer::reset_env(int env, RngStream& rng,
                              const Eigen::Vector3d& spawn_pos, double spawn_yaw) {
  const int seq_id = static_cast<int>(rng.index(data_.sequences.size()));
  const auto frames =
      data_.sequences[static_cast<std::size_t>(seq_id)].frames();
  const int start = static_cast<int>(rng.index(static_cast<std::uint64_t>(frames)));
  assign(env, seq_id, start, spawn_pos, spawn_yaw);
}

void RefDataBuffer::assign(int env, int seq_id, int start_frame,
                           const Eigen::Vector3d& spawn_pos, double spawn_yaw) {
  if (seq_id < 0 || seq_id >= static_cast<int>(data_.sequences.size()))
    throw std::invalid_argument("ref buffer: invalid sequence id");
  EnvCursor& c = envs_[static_cast<std::size_t>(env)];
  c.seq_id = seq_id;
  c.start = start_frame;
  c.anchor_pos = spawn_pos;
  c.anchor_yaw = spawn_yaw;
  c.cached_t = -1;
  c.cached_xy.setZero();
  c.cached_yaw = 0.0;
}

int RefDataBuffer::observation_dim(const std::vector<std::string>& spec) const {
  const auto& seq = data_.sequences.front();
  int dim = 0;
  for (const auto& name : spec) {
    const auto* ch = seq.channel(name);
    if (!ch)
      throw std::invalid_argument("ref buffer: unknown observation term '" +
                                  name + "'");
    dim += ch->dim;
  }
  return dim;
}

std::pair<Eigen::VectorXd, double> RefDataBuffer::reference_observation(
    int env, int t, const std::vector<std::string>& spec) const {
  const ReferenceState state = query(env, t);
  Eigen::VectorXd obs(observation_dim(spec));
  Eigen::Index at = 0;
  for (const auto& name : spec) {
    const auto* ch = state.seq->channel(name);
    if (!ch)
      throw std::invalid_argument("ref buffer: unknown observation term '" +
                                  name + "'");
    obs.segment(at, ch->dim) = state.row.segment(ch->offset, ch->dim);
    at += ch->dim;
  }
  return {obs, state.available ? 1.0 : 0.0};
}

Eigen::Vector3d RefDataBuffer::command_from_reference(int env, int t,
                                                      const CommandRanges& ranges,
                                                      RngStream& rng) const {
  const ReferenceState state = query(env, t);
  if (state.available) {
    const Eigen::VectorXd lin = state.term("root_lin_vel");
    const Eigen::VectorXd ang = state.term("root_ang_vel");
    return {lin(0), lin(1), ang(2)};
  }
  return {rng.uniform(ranges.vx(0), ranges.vx(1)),
          rng.uniform(ranges.vy(0), ranges.vy(1)),
          rng.uniform(ranges.wz(0), ranges.wz(1))};
}

}  // namespace mimic::refbuf
