#pragma once

#include <cstdint>
#include <vector>

#include "fwmpc/nmpc/nmpc.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

// Nominal closed-loop pass of the tracking controller along a reference at
// the reference rate, with the input-sensitivity gain recorded at every step.
struct ExpertDemo {
  ReferenceTrajectory ref;
  std::vector<RobotState> states;  // ref.size() entries
  std::vector<CmdVec> inputs;      // ref.size() - 1 entries
  std::vector<GainMat> gains;      // ref.size() - 1 entries
  std::vector<uint8_t> converged;  // solver status per step
  uint64_t config_hash = 0;
  uint64_t seed = 0;

  int steps() const { return static_cast<int>(inputs.size()); }
  void validate() const;
};

struct DemoOptions {
  bool record_gains = true;
  bool require_convergence = false;  // throw if any solve fails to converge
};

ExpertDemo record_expert_demo(const ReferenceTrajectory& ref, const NmpcConfig& nmpc_cfg,
                              const RobotParams& params, const DemoOptions& opt = {});

}  // namespace fwmpc
