#pragma once

#include <vector>

#include "fwmpc/core/types.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

// Reference-generation boxes, strictly nested inside the controller's
// feasible sets so the tracking layer keeps authority in reserve.
struct StateBox {
  Vec3 p_lo = Vec3(-2.0, -2.0, -0.5);
  Vec3 p_hi = Vec3(2.0, 2.0, 2.0);
  double v_max = 5.0;
  double w_max = 80.0;

  bool contains(const StateVec& x, double tol = 0.0) const;
};

struct ConstraintSets {
  CmdBounds u_ref{CmdVec(5e-4, -4e-5, -4e-5), CmdVec(1.25e-2, 4e-5, 4e-5)};
  CmdBounds u_mpc;  // controller defaults
  StateBox x_ref;
  StateBox x_mpc{Vec3(-2.5, -2.5, -0.6), Vec3(2.5, 2.5, 2.5), 6.0, 100.0};

  // throws unless the reference sets sit strictly inside the controller sets
  void validate() const;
  // smallest componentwise input gap, normalized by the mpc box width
  double input_margin() const;
};

// Equality on selected blocks of the 12-dim error [p v mrp w] at one grid
// index (index 0 is the fixed initial state and cannot carry a waypoint).
struct TrajWaypoint {
  int index = 0;
  RobotState target;
  bool constrain_pos = true;
  bool constrain_vel = false;
  bool constrain_att = false;
  bool constrain_rate = false;
};

struct TrajOptConfig {
  double dt = 0.01;
  int substeps = 1;
  double yaw = 0.0;  // heading used for body_x_ref

  // quadratic pull; by default measured against the zero/identity state
  // (positions toward the origin), the literal reading of the objective.
  // anchor_to_start instead measures deviation from the fixed initial state.
  ErrVec q_state = (ErrVec() << 1, 1, 1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 1e-4, 1e-4, 1e-4).finished();
  CmdVec r_input = CmdVec(1e2, 1e6, 1e6);  // on the deviation from hover thrust
  bool anchor_to_start = false;

  int max_outer = 30;
  int max_inner = 80;
  double waypoint_tolerance = 1e-4;
  double kkt_tolerance = 1e-6;
  double defect_tolerance = 1e-8;
  double penalty_initial = 1e4;
  double penalty_growth = 5.0;
  double penalty_max = 1e12;
  int max_active_set_cycles = 16;
  double levenberg_max = 1e8;

  void validate() const;
};

struct TrajOptResult {
  ReferenceTrajectory ref;
  double objective = 0.0;  // horizon duration plus the quadratic terms
  double waypoint_residual = 0.0;
  double kkt_residual = 0.0;
  double defect_residual = 0.0;
  int outer_iterations = 0;
};

// Fixed-grid trajectory optimization: multiple-shooting Gauss-Newton SQP over
// n_steps intervals starting from `start`, with waypoint equalities handled
// by an augmented Lagrangian and the reference input box enforced exactly.
// Optional initial guesses (sizes n_steps+1 / n_steps) steer the local
// solution, e.g. a kinematic spin for flips. Throws on non-convergence with
// the residuals in the message.
TrajOptResult optimize_trajectory(const RobotState& start, int n_steps,
                                  const std::vector<TrajWaypoint>& waypoints,
                                  const ConstraintSets& sets, const RobotParams& params,
                                  const TrajOptConfig& cfg,
                                  const std::vector<StateVec>* x_guess = nullptr,
                                  const std::vector<CmdVec>* u_guess = nullptr);

// Aerobatic preset: n_flips full rolls about the body x axis at a hover
// point, each spun over spin_s seconds, with hover pads on both sides and
// settle_s of hover between consecutive flips.
TrajOptResult roll_flip_reference(const Vec3& hover_point, int n_flips, double spin_s,
                                  double settle_s, double pad_s, const ConstraintSets& sets,
                                  const RobotParams& params, const TrajOptConfig& cfg);

}  // namespace fwmpc
