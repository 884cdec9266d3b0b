#pragma once

#include <vector>

#include "fwmpc/learning/dataset.hpp"
#include "fwmpc/learning/mlp.hpp"
#include "fwmpc/learning/train.hpp"
#include "fwmpc/nmpc/nmpc.hpp"
#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/trajgen/trajectory.hpp"
#include "fwmpc/tube/tube.hpp"

namespace fwmpc {

struct DaggerOptions {
  int n_demos = 10;       // on-policy demonstrations to aggregate
  int max_retries = 5;    // re-seeds allowed when a demo crashes without labels
  TrainConfig fine_tune;  // per-demo retraining (warm-started)
  SimConfig sim;          // environment for the student rollouts
  uint64_t seed = 1;

  DaggerOptions() {
    fine_tune.max_epochs = 120;
    fine_tune.patience = 25;
    fine_tune.learning_rate = 3e-4;
    fine_tune.warm_start = true;
  }
};

struct DaggerResult {
  std::vector<PolicyNet> policies;   // [0] = the input policy, [i] = after demo i
  std::vector<TrainReport> reports;  // one per demo
  std::vector<int> labels_per_demo;
  Dataset aggregated;                // expert-labeled on-policy visits only
};

// On-policy fine-tuning. The initial (augmented) dataset is deliberately left
// behind: the current policy flies the maneuver in the full simulator, the
// tracking expert labels every state the student visits at the controller
// rate (in the aligned frame), labels are aggregated across demonstrations
// and the network is retrained warm-started after each one. A demo that
// crashes before producing a single label is discarded and resampled with a
// fresh disturbance seed.
DaggerResult run_dagger(const PolicyNet& start, const ReferenceTrajectory& ref, const Tube& tube,
                        const NmpcConfig& nmpc_cfg, const RobotParams& params,
                        const DaggerOptions& opt);

}  // namespace fwmpc
