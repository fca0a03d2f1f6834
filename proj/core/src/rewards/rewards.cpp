#include "mimic/rewards/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic::rewards {

double exp_tracking_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& ref,
                           double weight, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("exp reward: sigma must be > 0");
  return weight * std::exp(-(s - ref).squaredNorm() / (2.0 * sigma * sigma));
}

double l2_deviation_reward(const Eigen::VectorXd& s, const Eigen::VectorXd& ref,
                           double weight) {
  return -weight * (s - ref).squaredNorm();
}

double l2_rate_reward(const Eigen::VectorXd& s_rate,
                      const Eigen::VectorXd& ref_rate, double weight) {
  return -weight * (s_rate - ref_rate).squaredNorm();
}

double contact_match_reward(const Eigen::VectorXd& contacts,
                            const Eigen::VectorXd& ref_contacts, double weight) {
  if (contacts.size() != ref_contacts.size())
    throw std::invalid_argument("contact reward: foot count mismatch");
  double matches = 0.0;
  for (Eigen::Index i = 0; i < contacts.size(); ++i) {
    const bool a = contacts(i) != 0.0, b = ref_contacts(i) != 0.0;
    if (a == b) matches += 1.0;  // NOT (a XOR b)
  }
  return weight * matches;
}

void CurriculumTerm::validate() const {
  if (sigma_levels.empty())
    throw std::invalid_argument("curriculum: no sigma levels");
  for (std::size_t i = 0; i < sigma_levels.size(); ++i) {
    if (sigma_levels[i] <= 0.0)
      throw std::invalid_argument("curriculum: sigma levels must be positive");
    if (i > 0 && sigma_levels[i] >= sigma_levels[i - 1])
      throw std::invalid_argument("curriculum: sigma levels must decrease");
  }
  if (level < 0 || level >= static_cast<int>(sigma_levels.size()))
    throw std::invalid_argument("curriculum: level out of range");
  if (advance_threshold <= 0.0 || advance_threshold >= 1.0)
    throw std::invalid_argument("curriculum: threshold must lie in (0,1)");
  if (dwell <= 0) throw std::invalid_argument("curriculum: dwell must be positive");
}

void curriculum_update(CurriculumTerm& term, double normalized_reward) {
  term.validate();
  if (normalized_reward >= term.advance_threshold) {
    ++term.streak;
  } else {
    term.streak = 0;
  }
  if (term.streak >= term.dwell && !term.at_last_level()) {
    ++term.level;  // never retreats, clamps at the last level
    term.streak = 0;
  }
}

void TerminationSpec::validate() const {
  if (max_gravity_angle <= 0.0 || max_height_dev <= 0.0)
    throw std::invalid_argument("termination: thresholds must be positive");
}

bool imitation_termination(const Eigen::Vector3d& gravity_b,
                           const Eigen::Vector3d& ref_gravity_b, double height,
                           double ref_height, const TerminationSpec& spec) {
  spec.validate();
  const double cosang =
      gravity_b.normalized().dot(ref_gravity_b.normalized());
  const double angle = std::acos(std::min(1.0, std::max(-1.0, cosang)));
  if (angle > spec.max_gravity_angle) return true;
  return std::abs(height - ref_height) > spec.max_height_dev;
}

}  // namespace mimic::rewards
