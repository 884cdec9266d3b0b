#pragma once

#include "fwmpc/learning/dataset.hpp"
#include "fwmpc/nmpc/demo.hpp"
#include "fwmpc/tube/tube.hpp"

namespace fwmpc {

struct AugmentOptions {
  int n_per_step = 100;
  uint64_t seed = 1;
  bool include_demo_pairs = true;
};

// Builds an imitation dataset from one expert demonstration: the visited
// pairs themselves plus, per step, states sampled uniformly in the tube
// cross-section (in alternative-state coordinates, mapped back to full states
// at the reference heading) labeled with the tangential predictor
// u = u_demo + K (x - x_demo), clipped to the controller input set.
Dataset augment_demo(const ExpertDemo& demo, const Tube& tube, const CmdBounds& input_bounds,
                     const AugmentOptions& opt);

}  // namespace fwmpc
