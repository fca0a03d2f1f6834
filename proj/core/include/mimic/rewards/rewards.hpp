#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace mimic::rewards {

/// Exponential tracking reward: w * exp(-||s - ref||^2 / (2 sigma^2)).
double exp_tracking_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& ref,
                           double weight, double sigma);

/// Quadratic deviation penalties, always <= 0.
double l2_deviation_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& ref,
                           double weight);
double l2_rate_reward(const Eigen::VectorXd& s_rate,
                      const Eigen::VectorXd& ref_rate, double weight);

/// w * (count of feet whose binary contact equals the reference's).
double contact_match_reward(const Eigen::VectorXd& contacts,
                            const Eigen::VectorXd& ref_contacts, double weight);

/// Per-term sigma schedule: advances one level when the normalized reward
/// stays at or above the threshold for a whole dwell window; never retreats.
struct CurriculumTerm {
  std::string name;
  double weight = 1.0;
  std::vector<double> sigma_levels;  // strictly decreasing, positive
  int level = 0;
  double advance_threshold = 0.7;
  int dwell = 50;

  int streak = 0;  // consecutive qualifying updates

  double sigma() const { return sigma_levels[static_cast<std::size_t>(level)]; }
  bool at_last_level() const {
    return level + 1 >= static_cast<int>(sigma_levels.size());
  }
  void validate() const;
};

/// Feeds one interval's normalized reward (range [0,1]); advances the term
/// when the dwell window is fully above the threshold.
void curriculum_update(CurriculumTerm& term, double normalized_reward);

/// Imitation-aware termination: trips when the gravity alignment or root
/// height deviates from the reference beyond the spec.
struct TerminationSpec {
  double max_gravity_angle = 0.5;  // rad
  double max_height_dev = 0.3;     // m

  void validate() const;
};

bool imitation_termination(const Eigen::Vector3d& gravity_b,
                           const Eigen::Vector3d& ref_gravity_b, double height,
                           double ref_height, const TerminationSpec& spec);

}  // namespace mimic::rewards
