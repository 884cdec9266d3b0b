#pragma once

#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

struct MetricsReport {
  double rms_lateral_error = 0.0;       // m, horizontal plane
  double rms_altitude_error = 0.0;      // m
  double max_speed = 0.0;               // m/s
  double mean_speed = 0.0;              // m/s
  double max_acceleration = 0.0;        // m/s^2
  double max_body_deviation_deg = 0.0;  // angle between body z and world z
  double max_angular_speed_dps = 0.0;
  bool tube_breach = false;  // safety monitor engaged inside the window
  double window_t0 = 0.0;
  double window_t1 = 0.0;
};

// Flight metrics over the maneuver window [t0, t1]. Position errors compare
// the true positions against the reference interpolated linearly between its
// grid points; speed and acceleration come from central differences of the
// true positions after a 5-sample moving average; angles from the true
// attitude. Throws when the window is empty or outside the trace.
MetricsReport compute_metrics(const SimTrace& trace, const ReferenceTrajectory& ref, double t0,
                              double t1);

}  // namespace fwmpc
