#pragma once

#include <cstdint>

#include "fwmpc/core/types.hpp"
#include "fwmpc/dynamics/dynamics.hpp"
#include "fwmpc/nmpc/nmpc.hpp"
#include "fwmpc/trajgen/trajectory.hpp"
#include "fwmpc/util/rng.hpp"

namespace fwmpc {

// Bounded random-walk wrench process. Forces act in the world frame, torques
// on the body. The walk starts at the bias (zero by default); each step adds
// Gaussian increments and is kept inside [bias - bound, bias + bound] either
// by clipping or by reflecting at the walls.
struct DisturbanceSet {
  Vec3 force_bound = Vec3::Constant(6.0e-4);    // N
  Vec3 torque_bound = Vec3::Constant(1.2e-6);   // N*m
  Vec3 force_step = Vec3::Constant(1.5e-4);     // N per step_period
  Vec3 torque_step = Vec3::Constant(3.0e-7);    // N*m per step_period
  Vec3 force_bias = Vec3::Zero();               // constant offset (e.g. wind)
  double step_period = 0.05;                    // s over which one nominal increment accrues

  void validate() const;
};

enum class WalkBoundMode { kClip, kReflect };

class RandomWalkDisturbance {
 public:
  // dt: interval between step() calls. Increments are scaled by
  // sqrt(dt / step_period) so the diffusion rate is sampling-independent;
  // dt <= 0 means one nominal increment per call.
  RandomWalkDisturbance(const DisturbanceSet& set, WalkBoundMode mode, Rng rng, double dt = -1.0);
  Wrench step();
  const Wrench& current() const { return w_; }

 private:
  double bounded(double v, double lo, double hi) const;
  DisturbanceSet set_;
  WalkBoundMode mode_;
  Rng rng_;
  Wrench w_;
  double scale_ = 1.0;
};

// Axis-aligned, time-invariant tube: componentwise bounds on the deviation of
// the alternative state and of the applied input from the nominal trajectory,
// taken over closed-loop rollouts of the tracking controller under sampled
// disturbances.
struct Tube {
  AltStateVec dx = AltStateVec::Zero();
  CmdVec du = CmdVec::Zero();
  int n_rollouts = 0;
  uint64_t trajectory_hash = 0;
  uint64_t config_hash = 0;
  uint64_t seed = 0;

  void validate() const;
};

// Rollout-time sanity box on the full state; rollouts leaving it abort tube
// construction with an error naming the violated component.
struct StateBounds {
  Vec3 p_lo = Vec3(-2.0, -2.0, -0.5);
  Vec3 p_hi = Vec3(2.0, 2.0, 2.0);
  double v_max = 5.0;
  double w_max = 80.0;

  void check(const RobotState& s, int step) const;  // throws on violation
};

struct TubeBuildOptions {
  int n_rollouts = 200;
  uint64_t seed = 1;
  WalkBoundMode bound_mode = WalkBoundMode::kClip;
  StateBounds state_bounds;
  int n_threads = 0;  // 0: hardware concurrency. Deviation maxima merge order-free.
};

// Runs n_rollouts perturbed closed-loop episodes of the tracking controller
// along ref and records the componentwise maximum deviations.
Tube construct_tube(const ReferenceTrajectory& ref, const NmpcConfig& nmpc_cfg,
                    const RobotParams& params, const DisturbanceSet& dset,
                    const TubeBuildOptions& opt);

// True when the state's alternative-state deviation from the reference at
// sample idx lies inside the tube, componentwise. margin (optional) receives
// the smallest slack (negative when outside).
bool in_tube(const RobotState& s, int idx, const ReferenceTrajectory& ref, const Tube& tube,
             double* margin = nullptr);

}  // namespace fwmpc
