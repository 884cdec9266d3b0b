#pragma once

#include <string>
#include <vector>

#include "fwmpc/learning/augment.hpp"
#include "fwmpc/learning/dagger.hpp"
#include "fwmpc/learning/train.hpp"
#include "fwmpc/nmpc/nmpc.hpp"
#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/trajgen/trajopt.hpp"
#include "fwmpc/tube/tube.hpp"

namespace fwmpc {

// Full stack configuration, loaded from one JSON file. Fields missing from
// the file keep their compiled-in defaults; the file's byte hash becomes the
// provenance config_hash stamped onto every artifact produced with it.
struct StackConfig {
  RobotParams robot;
  ConstraintSets sets;
  NmpcConfig nmpc;          // input_bounds wired to sets.u_mpc
  DisturbanceSet disturbance;
  TubeBuildOptions tube;
  AugmentOptions augment;
  TrainConfig train;
  int policy_hidden = 128;
  DaggerOptions dagger;     // dagger.sim mirrors sim below
  SimConfig sim;
  TrajOptConfig trajopt;
  uint64_t config_hash = 0;
};

StackConfig load_stack_config(const std::string& path);

// One maneuver recipe: smooth waypoint interpolation, a plain hover hold, or
// an optimized flip.
struct ScenarioPreset {
  std::string name;
  std::string type = "waypoints";  // waypoints | hover | flip
  double dt = 0.005;
  double yaw = 0.0;

  std::vector<Vec3> points;            // waypoints
  std::vector<double> segment_times;   // per segment, s
  double pad_before = 0.0;
  double pad_after = 0.0;

  double duration = 1.0;               // hover hold length
  Vec3 hover_point = Vec3(0, 0, 0.3);  // hover / flip anchor

  int n_flips = 1;
  double spin_s = 0.5;
  double settle_s = 0.6;
  double pad_s = 0.4;

  double window_t0 = -1.0;  // metrics window; negative = full span
  double window_t1 = -1.0;
  uint64_t file_hash = 0;
};

ScenarioPreset load_scenario(const std::string& path);

// Metrics window for a scenario, clamped to the trajectory span.
void scenario_window(const ScenarioPreset& sc, const ReferenceTrajectory& ref, double* t0,
                     double* t1);

// Produces the reference for a scenario and stamps provenance on it. The
// trajectory itself is deterministic; the seed is recorded for bookkeeping.
ReferenceTrajectory build_reference(const ScenarioPreset& sc, const StackConfig& stack,
                                    uint64_t seed);

}  // namespace fwmpc
