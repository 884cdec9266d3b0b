#pragma once

#include <cstdint>
#include <vector>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Two-hidden-layer tanh network mapping the 14-dim policy input
// [p, v, q_aligned, w_aligned, t/T] to [thrust, tau_x', tau_y'] in the
// aligned frame. Inputs and outputs are affinely normalized; the stored
// statistics make the net self-contained.
struct PolicyNet {
  int hidden = 128;
  MatX w1, w2, w3;  // hidden x 14, hidden x hidden, 3 x hidden
  VecX b1, b2;      // hidden
  Vec3 b3 = Vec3::Zero();

  PolicyInVec in_mean = PolicyInVec::Zero();
  PolicyInVec in_std = PolicyInVec::Ones();
  Vec3 out_mean = Vec3::Zero();
  Vec3 out_std = Vec3::Ones();

  uint64_t config_hash = 0;
  uint64_t seed = 0;
  double val_mse = -1.0;  // denormalized, per output component

  static PolicyNet create(int hidden, uint64_t seed);  // Xavier-uniform init

  Vec3 forward(const PolicyInVec& x) const;
  // columns are samples; returns 3 x n
  MatX forward_batch(const MatX& x) const;
  // scalar-loop evaluation that counts every multiply-accumulate
  Vec3 forward_counted(const PolicyInVec& x, long* macs) const;
  // multiply-accumulates per evaluation implied by the layer sizes
  long mac_count() const { return static_cast<long>(hidden) * hidden + 17L * hidden; }

  void validate() const;
  uint64_t weight_hash() const;
};

}  // namespace fwmpc
