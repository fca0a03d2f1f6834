#include "mimic/util/rng.hpp"

namespace mimic {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view name)
    : engine_(fnv1a(name) ^ (master_seed * 0x9e3779b97f4a7c15ull)) {}

double RngStream::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(engine_);
}

double RngStream::normal(double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(engine_);
}

std::uint64_t RngStream::index(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
  return d(engine_);
}

}  // namespace mimic
