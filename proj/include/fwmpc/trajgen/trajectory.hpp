#pragma once

#include <cstdint>
#include <vector>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Time-gridded reference: states, feedforward inputs and the reference body-x
// direction used for yaw-free frame alignment. inputs and body_x have the same
// length as states; the final input is a duplicate of the one before it so
// index clamping is harmless.
struct ReferenceTrajectory {
  double dt = 0.0;
  std::vector<RobotState> states;
  std::vector<Command> inputs;
  std::vector<Vec3> body_x;

  uint64_t config_hash = 0;
  uint64_t seed = 0;

  int size() const { return static_cast<int>(states.size()); }
  double duration() const { return dt * (size() - 1); }

  const RobotState& state_at(int i) const { return states[clamp_index(i)]; }
  const Command& input_at(int i) const { return inputs[clamp_index(i)]; }
  const Vec3& body_x_at(int i) const { return body_x[clamp_index(i)]; }
  int index_at_time(double t) const;

  int clamp_index(int i) const;
  void validate() const;  // throws std::invalid_argument on malformed content
  uint64_t content_hash() const;
};

}  // namespace fwmpc
