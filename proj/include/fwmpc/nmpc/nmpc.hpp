#pragma once

#include <array>
#include <vector>

#include "fwmpc/core/types.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

// Diagonal weights on the 12-dim tracking error [dp dv mrp dw], the input
// deviation, and the terminal error.
struct NmpcWeights {
  ErrVec q;
  CmdVec r;
  ErrVec p;

  static NmpcWeights defaults();
  void validate() const;
};

enum class SensitivityMethod { kRiccati, kFiniteDifference };

struct NmpcConfig {
  int horizon = 100;
  double dt = 0.05;
  int substeps = 2;
  NmpcWeights weights = NmpcWeights::defaults();
  CmdBounds input_bounds;  // feasible input set for the controller

  int max_iterations = 30;
  double kkt_tolerance = 1e-6;   // scaled stationarity
  double defect_tolerance = 1e-8;
  // Control-stationarity exit for closed-loop use. Under a persistent
  // disturbance the tracking residual stays finite and Gauss-Newton settles at
  // a linear rate, so the stationarity measure drains for dozens of iterations
  // after the applied input has stopped moving. When > 0, also declare
  // convergence once the accepted step moves every input by less than this
  // fraction of its range and the defect is below step_defect_tolerance.
  double step_tolerance = 0.0;
  double step_defect_tolerance = 1e-4;
  int max_active_set_cycles = 16;
  double levenberg_initial = 0.0;
  double levenberg_max = 1e8;
  SensitivityMethod sensitivity = SensitivityMethod::kRiccati;
  double fd_step = 1e-5;

  void validate() const;
};

struct NmpcSolution {
  std::vector<StateVec> states;       // horizon+1
  std::vector<CmdVec> inputs;         // horizon
  std::vector<std::array<int, 3>> active;  // -1 lower, 0 free, +1 upper
  double cost = 0.0;
  double kkt_residual = 0.0;
  double defect_residual = 0.0;
  int iterations = 0;
  int riccati_sweeps = 0;
  bool converged = false;

  CmdVec u0() const { return inputs.front(); }
};

// Gauss-Newton SQP tracking controller on a multiple-shooting transcription
// with a Riccati sweep and a stagewise input-box active set. Instances keep
// the previous solution as a warm start, shifted when the reference window
// advances.
class NmpcSolver {
 public:
  NmpcSolver(const NmpcConfig& cfg, const RobotParams& params);

  // Track `ref` starting at sample base_idx. cfg.dt must be an integer
  // multiple of ref.dt; the window is held at the final sample past the end.
  const NmpcSolution& solve(const StateVec& x0, const ReferenceTrajectory& ref, int base_idx);

  // d u0* / d x0 with the converged active set held fixed (rows of active
  // components are zero). With kFiniteDifference, central differences of
  // warm-started re-solves are used instead.
  GainMat input_state_sensitivity(const StateVec& x0, const ReferenceTrajectory& ref,
                                  int base_idx);

  void reset();
  const NmpcSolution& solution() const { return sol_; }
  const NmpcConfig& config() const { return cfg_; }

 private:
  struct Stage {
    StateMat A;
    StateInputMat B;
    StateVec d;                          // shooting defect f(x_i,u_i) - x_{i+1}
    Eigen::Matrix<double, 13, 13> Hx;    // Gauss-Newton state hessian
    StateVec gx;                         // state gradient
    CmdVec gu;                           // input gradient (R part added in sweep)
    // backward-pass products kept for multiplier sign checks
    Mat3 Quu;
    GainMat Qux;
    CmdVec qu;
    CmdVec k;
    GainMat K;
  };

  void resize_workspace();
  int ref_stride(const ReferenceTrajectory& ref) const;
  const RobotState& ref_state(const ReferenceTrajectory& ref, int base, int i) const;
  CmdVec ref_input(const ReferenceTrajectory& ref, int base, int i) const;

  double total_cost(const ReferenceTrajectory& ref, int base,
                    const std::vector<StateVec>& X, const std::vector<CmdVec>& U) const;
  void linearize(const ReferenceTrajectory& ref, int base);
  bool backward_pass(double levenberg);  // false if a stage hessian is indefinite
  void forward_pass();
  // updates active flags from the current QP solution; returns true when stable
  bool refresh_active_set();
  void shift_warm_start(int shift, const ReferenceTrajectory& ref, int base_idx);

  NmpcConfig cfg_;
  RobotParams params_;
  NmpcSolution sol_;

  std::vector<Stage> stages_;
  Eigen::Matrix<double, 13, 13> S_term_;
  StateVec s_term_;
  std::vector<StateVec> dX_;
  std::vector<CmdVec> dU_;
  std::vector<std::pair<double, double>> filter_;  // (cost, l1 defect) of visited iterates
  double theta_cap_ = 0.0;
  bool warm_ = false;
  int warm_base_ = 0;
};

}  // namespace fwmpc
