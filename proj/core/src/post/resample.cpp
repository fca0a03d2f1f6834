#include <cmath>
#include <stdexcept>

#include "mimic/post/postprocess.hpp"

namespace mimic::post {

using motion::MotionSequence;

MotionSequence resample(const MotionSequence& seq, double f_tgt) {
  if (f_tgt <= 0.0) throw std::invalid_argument("resample: f_tgt must be > 0");
  if (seq.frames() < 2) throw std::invalid_argument("resample: need >= 2 frames");

  const Eigen::Index n = seq.frames();
  const double duration = static_cast<double>(n - 1) / seq.rate;
  const Eigen::Index m = static_cast<Eigen::Index>(std::floor(duration * f_tgt + 1e-9)) + 1;

  MotionSequence out;
  out.name = seq.name;
  out.rate = f_tgt;
  out.joint_pos.resize(m, seq.joint_pos.cols());
  out.root_pos.resize(m, 3);
  out.root_quat.resize(m, 4);

  for (Eigen::Index k = 0; k < m; ++k) {
    const double src = (static_cast<double>(k) / f_tgt) * seq.rate;
    const double snapped = std::round(src);
    Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(src));
    double t = src - static_cast<double>(i0);
    if (std::abs(src - snapped) < 1e-9 || i0 >= n - 1) {
      // lands on a source sample (or the tail frame): copy verbatim
      i0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(snapped), n - 1);
      out.joint_pos.row(k) = seq.joint_pos.row(i0);
      out.root_pos.row(k) = seq.root_pos.row(i0);
      out.root_quat.row(k) = seq.root_quat.row(i0);
      continue;
    }
    const Eigen::Index i1 = i0 + 1;
    out.joint_pos.row(k) = (1 - t) * seq.joint_pos.row(i0) + t * seq.joint_pos.row(i1);
    out.root_pos.row(k) = (1 - t) * seq.root_pos.row(i0) + t * seq.root_pos.row(i1);
    out.root_quat.row(k) = motion::quat_slerp(seq.root_quat.row(i0).transpose(),
                                              seq.root_quat.row(i1).transpose(), t)
                               .transpose();
  }
  out.cycle.reset();  // indices refer to the old rate
  return out;
}

}  // namespace mimic::post
