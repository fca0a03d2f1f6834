#include <cmath>
#include <stdexcept>

#include "mimic/post/postprocess.hpp"

namespace mimic::post {

void FilterConfig::validate() const {
  if (target_rate <= 0) throw std::invalid_argument("filter: target_rate <= 0");
  if (cutoff() <= 0 || cutoff() >= target_rate / 2.0)
    throw std::invalid_argument("filter: cutoff must lie below Nyquist");
  if (butterworth_order != 2)
    throw std::invalid_argument("filter: only the second-order section is built");
  if (std::abs(causal_weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("filter: causal weights must sum to 1");
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// bilinear transform of the analog second-order Butterworth prototype
Biquad design_lowpass(double cutoff_hz, double rate) {
  const double c = 1.0 / std::tan(M_PI * cutoff_hz / rate);
  const double c2 = c * c;
  const double sq2c = std::sqrt(2.0) * c;
  const double a0 = 1.0 + sq2c + c2;
  Biquad q;
  q.b0 = 1.0 / a0;
  q.b1 = 2.0 / a0;
  q.b2 = 1.0 / a0;
  q.a1 = 2.0 * (1.0 - c2) / a0;
  q.a2 = (1.0 - sq2c + c2) / a0;
  return q;
}

// direct form II transposed with steady-state initial conditions, so a
// constant input passes through with unit gain from the first sample
Eigen::VectorXd run(const Biquad& q, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  const double dc = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
  const double x0 = x(0);
  const double y0 = dc * x0;
  double z1 = y0 - q.b0 * x0;
  double z2 = q.b2 * x0 - q.a2 * y0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double out = q.b0 * x(i) + z1;
    z1 = q.b1 * x(i) - q.a1 * out + z2;
    z2 = q.b2 * x(i) - q.a2 * out;
    y(i) = out;
  }
  return y;
}

}  // namespace

Eigen::VectorXd butterworth_lowpass(const Eigen::VectorXd& signal,
                                    const FilterConfig& config, bool zero_phase) {
  config.validate();
  if (signal.size() <= config.butterworth_order)
    throw std::invalid_argument("filter: signal shorter than the filter order");
  const Biquad q = design_lowpass(config.cutoff(), config.target_rate);
  Eigen::VectorXd y = run(q, signal);
  if (zero_phase) y = run(q, y.reverse().eval()).reverse().eval();
  return y;
}

Eigen::MatrixXd butterworth_lowpass(const Eigen::MatrixXd& signals,
                                    const FilterConfig& config, bool zero_phase) {
  Eigen::MatrixXd out(signals.rows(), signals.cols());
  for (Eigen::Index c = 0; c < signals.cols(); ++c)
    out.col(c) = butterworth_lowpass(Eigen::VectorXd(signals.col(c)), config,
                                     zero_phase);
  return out;
}

motion::MotionSequence smooth(const motion::MotionSequence& seq,
                              const FilterConfig& config) {
  motion::MotionSequence out = seq;
  out.joint_pos = butterworth_lowpass(seq.joint_pos, config);
  out.root_pos = butterworth_lowpass(seq.root_pos, config);
  // orientations stay untouched; filtering quaternion components would
  // leave the unit sphere
  return out;
}

Eigen::VectorXd causal_ma_262(const Eigen::VectorXd& x,
                              const Eigen::Vector3d& w) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    double acc = w(2) * x(t);
    double norm = w(2);
    if (t >= 1) {
      acc += w(1) * x(t - 1);
      norm += w(1);
    }
    if (t >= 2) {
      acc += w(0) * x(t - 2);
      norm += w(0);
    }
    y(t) = acc / norm;
  }
  return y;
}

}  // namespace mimic::post
