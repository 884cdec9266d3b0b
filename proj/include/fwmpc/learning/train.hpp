#pragma once

#include <vector>

#include "fwmpc/learning/dataset.hpp"
#include "fwmpc/learning/mlp.hpp"

namespace fwmpc {

struct TrainConfig {
  int max_epochs = 300;
  int patience = 40;       // epochs without validation improvement before stopping
  int batch_size = 512;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double val_fraction = 0.1;
  uint64_t seed = 1;
  bool warm_start = false;  // keep the provided weights and normalization

  void validate() const;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_mse = 0.0;  // denormalized, per output component
  double final_train_mse = 0.0;
  bool stopped_early = false;
  std::vector<double> val_history;
};

// Minimizes the mean squared error of the normalized outputs with Adam.
// The split and the normalization statistics come from the training portion
// only; the best-validation weights are restored on exit. Bitwise
// deterministic for a fixed dataset, config and seed. Throws on a non-finite
// loss, naming the epoch.
TrainReport train_policy(const Dataset& data, const TrainConfig& cfg, PolicyNet* net);

}  // namespace fwmpc
