#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mimic {

/// All project randomness flows from one master seed through named
/// sub-streams, so adding a consumer never perturbs unrelated draws.
class RngStream {
 public:
  RngStream() : engine_(0) {}
  RngStream(std::uint64_t master_seed, std::string_view name);

  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  /// Uniform integer in [0, n)
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// FNV-1a over bytes; used for sub-stream derivation and artifact hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ull);

}  // namespace mimic
