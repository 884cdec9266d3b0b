#pragma once

#include <memory>
#include <string>

#include "fwmpc/learning/mlp.hpp"
#include "fwmpc/nmpc/nmpc.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

// Closed-loop policy interface for the simulator. Implementations receive the
// estimated kinematic state and the current reference index.
class FlightController {
 public:
  virtual ~FlightController() = default;
  virtual Command command(double t, const RobotState& estimate, int ref_idx) = 0;
  virtual std::string name() const = 0;
  virtual void reset() {}
};

// Receding-horizon tracking controller, evaluated in the yaw-aligned frame so
// that heading drift does not disturb it (matching how its derivatives train
// the network policy).
class ExpertController : public FlightController {
 public:
  ExpertController(const NmpcConfig& cfg, const RobotParams& params,
                   const ReferenceTrajectory& ref);
  Command command(double t, const RobotState& estimate, int ref_idx) override;
  std::string name() const override { return "expert"; }
  void reset() override { solver_.reset(); }
  const NmpcSolution& last_solution() const { return solver_.solution(); }
  NmpcSolver& solver() { return solver_; }

 private:
  NmpcSolver solver_;
  const ReferenceTrajectory& ref_;
};

// Learned policy wrapper: aligns the state, evaluates the network, maps the
// output back to a body-frame command and clips it to the input set.
class PolicyController : public FlightController {
 public:
  PolicyController(PolicyNet net, const ReferenceTrajectory& ref, const CmdBounds& bounds);
  Command command(double t, const RobotState& estimate, int ref_idx) override;
  std::string name() const override { return "policy"; }
  const PolicyNet& net() const { return net_; }

 private:
  PolicyNet net_;
  const ReferenceTrajectory& ref_;
  CmdBounds bounds_;
  double t_total_;
};

}  // namespace fwmpc
