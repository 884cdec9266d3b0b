#pragma once

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Frame-aligned policy interface: the network sees the attitude and body rate
// re-expressed at the reference heading (yaw removed), and emits torques in
// that aligned frame; they are rotated back to the true body frame before use.

struct PolicyFrame {
  Mat3 R;  // true attitude
  Mat3 M;  // alignment rotation, M * R is the yaw-free match
};

PolicyFrame make_policy_frame(const RobotState& s, const Vec3& r1_ref);

// [p, v, q_aligned (scalar part >= 0), w_aligned, t / t_total]
PolicyInVec encode_policy_input(const RobotState& s, const PolicyFrame& f, double t,
                                double t_total);

// Network target for a commanded input at this state.
Vec3 aligned_target_from_command(const CmdVec& u, const PolicyFrame& f);

// Inverse map: network output back to a body-frame command.
CmdVec command_from_aligned_output(const Vec3& y, const PolicyFrame& f);

}  // namespace fwmpc
