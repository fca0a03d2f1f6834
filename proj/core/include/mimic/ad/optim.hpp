#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace mimic::ad {

enum class Algorithm { PlainGradient, AdaptiveMoment };

struct OptimizerConfig {
  double learning_rate = 1e-4;
  Algorithm algorithm = Algorithm::PlainGradient;
  std::optional<double> gradient_clip_norm;
  // adaptive-moment constants
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Per-parameter first/second moment buffers plus the step counter.
struct OptimizerState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;
};

/// In-place first-order update. Plain-gradient mode computes exactly
/// params -= lr * grads; clipping (global norm across all grads) is applied
/// before the step when configured. Shapes of params and grads must agree.
void optimizer_step(std::vector<Eigen::MatrixXd*> params,
                    std::vector<Eigen::MatrixXd> grads,
                    const OptimizerConfig& config, OptimizerState& state);

/// Central finite differences (f(x+h) - f(x-h)) / 2h per coordinate.
/// The independent oracle for every gradient test in the project.
Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h);

}  // namespace mimic::ad
