#include "fwmpc/trajgen/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/util/hash.hpp"

namespace fwmpc {

int ReferenceTrajectory::clamp_index(int i) const {
  const int n = size();
  if (n == 0) throw std::invalid_argument("ReferenceTrajectory: empty");
  if (i < 0) return 0;
  if (i >= n) return n - 1;
  return i;
}

int ReferenceTrajectory::index_at_time(double t) const {
  return clamp_index(static_cast<int>(std::floor(t / dt + 1e-9)));
}

void ReferenceTrajectory::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("ReferenceTrajectory: dt must be positive");
  if (states.size() < 2) throw std::invalid_argument("ReferenceTrajectory: needs at least 2 samples");
  if (inputs.size() != states.size() || body_x.size() != states.size()) {
    throw std::invalid_argument("ReferenceTrajectory: input/body_x length mismatch");
  }
  for (size_t i = 0; i < states.size(); ++i) {
    if (!states[i].is_finite() || !states[i].q.allFinite()) {
      throw std::invalid_argument("ReferenceTrajectory: non-finite state");
    }
    if (std::abs(states[i].q.norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("ReferenceTrajectory: non-unit quaternion");
    }
    if (!body_x[i].allFinite() || std::abs(body_x[i].norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("ReferenceTrajectory: body_x must be a unit vector");
    }
    if (!std::isfinite(inputs[i].thrust) || !std::isfinite(inputs[i].tau_x) ||
        !std::isfinite(inputs[i].tau_y)) {
      throw std::invalid_argument("ReferenceTrajectory: non-finite input");
    }
  }
}

uint64_t ReferenceTrajectory::content_hash() const {
  HashAccumulator h;
  h.add(dt);
  h.add(static_cast<uint64_t>(states.size()));
  for (int i = 0; i < size(); ++i) {
    h.add_matrix(states[i].to_vector());
    h.add_matrix(inputs[i].to_vector());
    h.add_matrix(body_x[i]);
  }
  return h.value();
}

}  // namespace fwmpc
