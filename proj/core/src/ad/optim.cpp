#include "mimic/ad/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mimic::ad {

void OptimizerConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
  if (gradient_clip_norm && *gradient_clip_norm <= 0.0)
    throw std::invalid_argument("gradient_clip_norm must be > 0 when set");
}

void optimizer_step(std::vector<Eigen::MatrixXd*> params,
                    std::vector<Eigen::MatrixXd> grads,
                    const OptimizerConfig& config, OptimizerState& state) {
  config.validate();
  if (params.size() != grads.size())
    throw std::invalid_argument("optimizer_step: params/grads count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols())
      throw std::invalid_argument("optimizer_step: shape mismatch");
  }

  if (config.gradient_clip_norm) {
    double sq = 0.0;
    for (const auto& g : grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > *config.gradient_clip_norm && norm > 0.0) {
      const double s = *config.gradient_clip_norm / norm;
      for (auto& g : grads) g *= s;
    }
  }

  switch (config.algorithm) {
    case Algorithm::PlainGradient:
      for (std::size_t i = 0; i < params.size(); ++i)
        *params[i] -= config.learning_rate * grads[i];
      break;
    case Algorithm::AdaptiveMoment: {
      if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        for (const auto* p : params) {
          state.m.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
          state.v.emplace_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        }
        state.step = 0;
      }
      ++state.step;
      const double b1 = config.beta1, b2 = config.beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = b2 * state.v[i].array().matrix() +
                     (1.0 - b2) * grads[i].array().square().matrix();
        Eigen::ArrayXXd mhat = state.m[i].array() / c1;
        Eigen::ArrayXXd vhat = state.v[i].array() / c2;
        params[i]->array() -= config.learning_rate * mhat / (vhat.sqrt() + config.eps);
      }
      break;
    }
  }
}

Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_difference: h must be > 0");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

}  // namespace mimic::ad
