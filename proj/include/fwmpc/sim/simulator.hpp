#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fwmpc/actuation/actuation.hpp"
#include "fwmpc/core/types.hpp"
#include "fwmpc/estimator/ukf.hpp"
#include "fwmpc/sim/actuator_chain.hpp"
#include "fwmpc/sim/controllers.hpp"
#include "fwmpc/sim/fallback.hpp"
#include "fwmpc/trajgen/trajectory.hpp"
#include "fwmpc/tube/tube.hpp"

namespace fwmpc {

enum class SimMode : int {
  kTracking = 0,
  kAttitudeRecovery = 1,
  kPositionRecovery = 2,
  kLanded = 3,
};

const char* sim_mode_name(SimMode m);

struct SensorModel {
  double rate_hz = 400.0;
  double period_jitter = 0.2;               // uniform fraction of the nominal period
  Vec3 pos_noise = Vec3::Constant(5e-4);    // m, std dev
  Vec3 att_noise = Vec3::Constant(1.5e-3);  // MRP units, std dev
};

struct SimConfig {
  double dt = 1e-3;
  double controller_rate_hz = 1000.0;  // sweepable: 1000/500/330/200/100/50
  double voltage_rate_hz = 330.0;      // amplitude latch, flapping-cycle locked
  double cutoff_hz = 40.0;             // actuator force lag
  double delay_s = 5e-3;               // transport delay
  bool bypass_filter = false;
  bool disturbances_on = true;

  SensorModel sensor;
  DisturbanceSet disturbance;
  WalkBoundMode walk_mode = WalkBoundMode::kReflect;
  UkfConfig ukf;
  FallbackGains fallback;
  CmdBounds cmd_bounds;  // plant-side feasible set, used by the recovery laws

  // Tube-exit grace and the hand-off angular rate are not pinned by any
  // measurement; these defaults are plausible guesses.
  double tube_grace_s = 0.05;
  double omega_fallback = 3.0;  // rad/s
  double ground_z = 0.0;

  AllocationMode allocation = AllocationMode::kCorrected;
  // The plant's actual calibration is the nominal one scaled per actuator;
  // the controller and allocator always use the nominal curves.
  std::array<double, 4> true_cal_scale{1.0, 1.0, 1.0, 1.0};

  uint64_t seed = 0;

  void validate() const;
};

uint64_t sim_config_hash(const SimConfig& cfg);

// One record per sim step.
struct SimStep {
  double t = 0.0;
  RobotState truth;
  UkfState estimate;
  Command command;                 // latest controller output, held between evals
  std::array<double, 4> f_cmd{};   // allocator request
  std::array<double, 4> v_amp{};   // latched drive amplitudes
  std::array<double, 4> f_sat{};   // force at the saturated amplitude (true curve)
  std::array<double, 4> f_fil{};   // after actuator lag
  std::array<double, 4> f_eff{};   // after transport delay; acts on the plant
  Wrench disturbance;
  bool in_tube = true;
  SimMode mode = SimMode::kTracking;
};

struct SimTrace {
  double dt = 0.0;
  std::vector<SimStep> steps;

  uint64_t config_hash = 0;
  uint64_t trajectory_hash = 0;
  uint64_t seed = 0;

  bool aborted = false;    // plant state went non-finite; trace holds the prefix
  bool breached = false;   // tube monitor engaged the recovery chain
  bool landed = false;
  bool completed = false;  // reached the end of the reference still tracking
  double touchdown_tilt_deg = -1.0;

  uint64_t content_hash() const;
};

// Multi-rate closed loop: UKF prediction every step, pose updates on a
// jittered sensor clock, controller evaluations and amplitude latching on
// their own clocks, actuator chain and disturbed rigid-body plant at dt.
SimTrace run_closed_loop(const SimConfig& cfg, const RobotParams& params,
                         const ReferenceTrajectory& ref, const Tube& tube,
                         FlightController& controller);

}  // namespace fwmpc
