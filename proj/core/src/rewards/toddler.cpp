#include "mimic/rewards/toddler.hpp"

#include <algorithm>
#include <cmath>

namespace mimic::rewards {

double toddler_force(double h, double h_dot, double ref_h,
                     const ToddlerConfig& config) {
  config.validate();
  if (config.h_max <= 0.0 || config.spring_k <= 0.0) return 0.0;  // annealed away
  const double threshold = ref_h + config.offset;
  if (h >= threshold) return 0.0;  // active only below the reference band
  const double depth = std::clamp(h - threshold, -config.h_max, 0.0);
  double f = -config.spring_k * depth - config.damping_c * h_dot;
  f = std::clamp(f, -config.force_cap, config.force_cap);
  return f;
}

ToddlerConfig toddler_anneal(const ToddlerConfig& config, double progress) {
  ToddlerConfig out = config;
  const double s = std::clamp(1.0 - progress, 0.0, 1.0);
  out.spring_k = config.spring_k * s;
  out.h_max = config.h_max * s;
  return out;
}

}  // namespace mimic::rewards
