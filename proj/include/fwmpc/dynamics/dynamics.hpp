#pragma once

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// External disturbance expressed in the world frame (force) and body frame
// (torque), applied additively to the rigid-body equations.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

// Continuous-time derivative of [p v q w]. Thrust acts along body z, gravity
// along -world z, translational drag is linear in v, rotational drag is
// quadratic in w. Throws on non-finite input or quaternion norm off by >1e-6.
StateVec state_derivative(const StateVec& x, const CmdVec& u, const RobotParams& params,
                          const Wrench& wrench = {});

// Jacobians of state_derivative with respect to x and u.
void state_derivative_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                                StateMat* A, StateInputMat* B, const Wrench& wrench = {});

// One classical RK4 step of length dt with zero-order-hold input; the
// quaternion is renormalized afterwards. dt must be positive.
StateVec rk4_step(const StateVec& x, const CmdVec& u, const RobotParams& params, double dt,
                  const Wrench& wrench = {});

// RK4 step that also returns the discrete jacobians d(x+)/dx and d(x+)/du,
// including the effect of the final quaternion renormalization.
StateVec rk4_step_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                            double dt, StateMat* A, StateInputMat* B, const Wrench& wrench = {});

// n_substeps chained RK4 steps of length dt/n_substeps.
StateVec integrate(const StateVec& x, const CmdVec& u, const RobotParams& params, double dt,
                   int n_substeps = 1, const Wrench& wrench = {});

StateVec integrate_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                             double dt, int n_substeps, StateMat* A, StateInputMat* B,
                             const Wrench& wrench = {});

inline RobotState step_state(const RobotState& s, const Command& u, const RobotParams& params,
                             double dt, int n_substeps = 1, const Wrench& wrench = {}) {
  return RobotState::from_vector(integrate(s.to_vector(), u.to_vector(), params, dt, n_substeps, wrench));
}

}  // namespace fwmpc
