#pragma once

#include <filesystem>

#include "mimic/motion/motion_sequence.hpp"
#include "mimic/retarget/ik_losses.hpp"
#include "mimic/retarget/ik_regressor.hpp"
#include "mimic/util/json_io.hpp"

namespace mimic::retarget {

/// Frame-wise training corpus with disjoint splits.
struct IkDataset {
  std::vector<human::HumanPose> train;
  std::vector<human::HumanPose> val;
  std::vector<human::HumanPose> test;
};

/// Seeded shuffle then 80:20 train/validation split.
IkDataset split_dataset(std::vector<human::HumanPose> frames, std::uint64_t seed);

struct IkTrainConfig {
  IkRegressorConfig model;
  IkLossWeights weights;
  int epochs = 100;
  double learning_rate = 1e-4;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct IkTrainLog {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
};

/// Trains the regressor on the composite objective. The disturbance weight
/// anneals linearly from its start to end value over the epochs. Aborts
/// with the epoch index if the loss turns non-finite.
IkRegressor train_regressor(const IkDataset& dataset,
                            const kin::KinematicTree& tree,
                            const human::Skeleton& skel,
                            const human::ShapeParams& shape,
                            const IkTrainConfig& config, IkTrainLog* log);

/// Mean total loss over a set of frames at fixed weights (no training).
double evaluate_loss(const IkRegressor& reg, const IkLossContext& ctx,
                     const std::vector<human::HumanPose>& frames,
                     const IkLossWeights& weights, double disturb_weight,
                     std::uint64_t noise_seed);

/// Applies a trained regressor to a human stream: per-frame joint vectors
/// clamped to limits, root translation scaled by the fitted alpha, root
/// orientation passed through.
motion::MotionSequence retarget_sequence(const IkRegressor& reg,
                                         const kin::KinematicTree& tree,
                                         const motion::HumanMotion& human_motion,
                                         double alpha);

/// Checkpoint round-trip with an embedded config echo.
void save_regressor(const std::filesystem::path& path, const IkRegressor& reg,
                    std::uint64_t seed, const Json& extra_config = {});
IkRegressor load_regressor(const std::filesystem::path& path);

}  // namespace mimic::retarget
