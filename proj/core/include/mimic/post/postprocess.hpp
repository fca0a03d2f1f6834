#pragma once

#include <optional>

#include "mimic/kin/robot_model.hpp"
#include "mimic/motion/motion_sequence.hpp"

namespace mimic::post {

struct FilterConfig {
  double target_rate = 50.0;              // Hz
  int butterworth_order = 2;
  double cutoff_hz = 0.0;                 // 0 -> 0.1 * target_rate
  Eigen::Vector3d causal_weights{0.2, 0.6, 0.2};

  double cutoff() const { return cutoff_hz > 0 ? cutoff_hz : 0.1 * target_rate; }
  void validate() const;
};

/// SLERP/linear resampling to the target rate. Scalar channels interpolate
/// linearly, orientations spherically; augmented channels are dropped (they
/// are recomputed by augment_references after filtering).
motion::MotionSequence resample(const motion::MotionSequence& seq, double f_tgt);

/// Second-order Butterworth low-pass. Zero-phase mode runs forward-backward
/// and preserves length; the causal mode is the streaming single pass.
Eigen::VectorXd butterworth_lowpass(const Eigen::VectorXd& signal,
                                    const FilterConfig& config,
                                    bool zero_phase = true);
/// Column-wise application.
Eigen::MatrixXd butterworth_lowpass(const Eigen::MatrixXd& signals,
                                    const FilterConfig& config,
                                    bool zero_phase = true);
/// Smooths joint positions and root trajectory of a sequence in place.
motion::MotionSequence smooth(const motion::MotionSequence& seq,
                              const FilterConfig& config);

/// Streaming 2:6:2 moving average: y_t = .2 x_{t-2} + .6 x_{t-1} + .2 x_t,
/// with the first two outputs renormalizing the available weights.
Eigen::VectorXd causal_ma_262(const Eigen::VectorXd& stream,
                              const Eigen::Vector3d& weights = {0.2, 0.6, 0.2});

struct ContactConfig {
  double vel_thresh = 0.05;                 // m/s
  std::optional<double> height_thresh;      // default: min foot height + 5 cm
};

/// Per-foot contact flags (n x feet). Feet are the keypoint-map entries
/// whose human name carries "Ankle".
Eigen::MatrixXd detect_contacts(const motion::MotionSequence& seq,
                                const kin::KinematicTree& tree,
                                const ContactConfig& config = {});

/// Cosine-sine phase per foot: the phase advances 0..pi over each contact
/// segment and pi..2pi over each swing segment, linearly per frame.
Eigen::MatrixXd encode_phase(const Eigen::MatrixXd& flags);

/// Fills in all augmented channels: robot-frame root velocities, projected
/// gravity, joint velocities, height, contacts and phase.
motion::MotionSequence augment_references(const motion::MotionSequence& seq,
                                          const kin::KinematicTree& tree,
                                          const ContactConfig& contact = {});

/// First (smallest i, then smallest j) frame pair at least 0.2*n apart with
/// ||q_i - q_j|| <= eps, located with a KD-tree radius search plus
/// start-distance pruning; empty when no pair qualifies.
std::optional<std::pair<int, int>> extract_cycle(const Eigen::MatrixXd& joints,
                                                 double eps);

}  // namespace mimic::post
