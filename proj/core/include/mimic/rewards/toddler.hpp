#pragma once

#include <stdexcept>

namespace mimic::rewards {

/// Annealed vertical spring-damper assistance. The force engages only when
/// the base drops below the reference height plus the offset, and its
/// magnitude is capped.
struct ToddlerConfig {
  double spring_k = 2000.0;   // N/m
  double damping_c = 150.0;   // N s/m
  double offset = 0.0;        // m
  double h_max = 0.3;         // m, clamp depth
  double force_cap = 730.0;   // N

  void validate() const {
    if (spring_k < 0 || damping_c < 0 || h_max < 0)
      throw std::invalid_argument("toddler: parameters must be >= 0");
    if (spring_k * h_max > force_cap + 1e-9)
      throw std::invalid_argument("toddler: k * h_max must not exceed the cap");
  }
};

/// Vertical assistive force for base height h, rate h_dot, reference ref_h.
double toddler_force(double h, double h_dot, double ref_h,
                     const ToddlerConfig& config);

/// Scales k and h_max by (1 - progress); the force vanishes at progress 1.
ToddlerConfig toddler_anneal(const ToddlerConfig& config, double progress);

}  // namespace mimic::rewards
