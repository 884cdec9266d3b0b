#pragma once

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Rotation that carries the attitude R onto its yaw-free match: the returned
// M satisfies M * R = T where T shares R's body-z axis and has its body-x
// axis yawed to lie in the plane spanned by body-z and the reference heading
// r1. Throws when body-z is parallel to r1 (alignment undefined).
Mat3 frame_align(const Mat3& R, const Vec3& r1);

// Alternative state x' = [p, v, theta, w'] with theta the angles between the
// body-z axis and the world axes (invariant to the alignment) and w' the body
// rate expressed in the aligned frame: w' = (M R)^T R w.
AltStateVec to_alternative_state(const RobotState& s, const Mat3& R_match);

// Convenience: aligns s against the heading r1 first.
AltStateVec to_alternative_state(const RobotState& s, const Vec3& r1);

}  // namespace fwmpc
