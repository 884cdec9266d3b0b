#pragma once

#include "fwmpc/core/types.hpp"

namespace fwmpc {

struct FallbackGains {
  double att_kp = 1.2e-4;   // torque per unit rotation error
  double att_kd = 3.5e-6;   // torque per rad/s
  double pos_kp = 12.0;     // accel per m
  double pos_kd = 7.0;      // accel per m/s
  double max_accel = 6.0;   // m/s^2 (commanded, beyond gravity compensation)
  double descent_rate = 0.3;  // m/s while landing
};

// Upright recovery: drives the body z axis to vertical with a PD law on the
// tilt error; thrust holds weight against the current tilt, with the
// projection floored so an inverted robot is not commanded infinite thrust.
Command attitude_fallback(const RobotState& s, const RobotParams& params,
                          const FallbackGains& gains, const CmdBounds& bounds);

// Slow descent toward the ground below the hold point.
Command position_fallback(const RobotState& s, const Vec3& hold_xy_z, const RobotParams& params,
                          const FallbackGains& gains, const CmdBounds& bounds);

}  // namespace fwmpc
