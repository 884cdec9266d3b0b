#pragma once

#include "fwmpc/core/types.hpp"
#include "fwmpc/trajgen/min_snap.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

struct FlatnessOptions {
  double dt = 0.005;        // reference grid step
  double yaw = 0.0;         // constant heading of the body x axis
  double pad_before = 0.0;  // hover hold prepended, s
  double pad_after = 0.0;   // hover hold appended, s
  int frame_substeps = 8;   // attitude ODE substeps per dt (even, >= 2)
};

// Thrust direction and magnitude demanded by the flat outputs: the net force
// m a + m g e3 + c_d v must point along body z with magnitude F.
struct FlatForce {
  double F;
  Vec3 z_axis;
  Vec3 z_axis_rate;
  Vec3 z_axis_accel;
};
FlatForce flat_force(const Vec3& v, const Vec3& a, const Vec3& j, const Vec3& s,
                     const RobotParams& params);

// Converts a smooth position trajectory into a dynamically consistent
// state/input reference. The attitude follows the demanded thrust direction
// with zero body-z rotation rate (exact for the symmetric inertia used here);
// inputs are sampled at interval midpoints so a zero-order hold tracks the
// states closely. Throws if the demanded thrust ever drops near zero.
ReferenceTrajectory flat_to_reference(const PiecewisePolynomial& poly, const RobotParams& params,
                                      const FlatnessOptions& opt = {});

// Feasibility check against a reference input box; throws std::runtime_error
// describing the worst violation when any input leaves the box.
void check_reference_feasible(const ReferenceTrajectory& ref, const CmdBounds& bounds);

}  // namespace fwmpc
