#include "fwmpc/nmpc/demo.hpp"

#include <stdexcept>

#include "fwmpc/dynamics/dynamics.hpp"

namespace fwmpc {

void ExpertDemo::validate() const {
  const int n = static_cast<int>(states.size());
  if (n != ref.size() || static_cast<int>(inputs.size()) != n - 1) {
    throw std::invalid_argument("ExpertDemo: length mismatch with reference");
  }
  if (!gains.empty() && gains.size() != inputs.size()) {
    throw std::invalid_argument("ExpertDemo: gain count mismatch");
  }
}

ExpertDemo record_expert_demo(const ReferenceTrajectory& ref, const NmpcConfig& nmpc_cfg,
                              const RobotParams& params, const DemoOptions& opt) {
  ref.validate();
  ExpertDemo demo;
  demo.ref = ref;
  demo.config_hash = ref.config_hash;
  demo.seed = ref.seed;

  const int K = ref.size() - 1;
  demo.states.reserve(K + 1);
  demo.inputs.reserve(K);
  if (opt.record_gains) demo.gains.reserve(K);
  demo.converged.reserve(K);

  NmpcSolver solver(nmpc_cfg, params);
  RobotState x = ref.state_at(0);

  for (int k = 0; k < K; ++k) {
    demo.states.push_back(x);
    const NmpcSolution& sol = solver.solve(x.to_vector(), ref, k);
    if (opt.require_convergence && !sol.converged) {
      throw std::runtime_error("record_expert_demo: solver failed to converge at step " +
                               std::to_string(k));
    }
    demo.converged.push_back(sol.converged ? 1 : 0);
    demo.inputs.push_back(sol.u0());
    if (opt.record_gains) {
      demo.gains.push_back(solver.input_state_sensitivity(x.to_vector(), ref, k));
    }
    x = RobotState::from_vector(rk4_step(x.to_vector(), sol.u0(), params, ref.dt));
  }
  demo.states.push_back(x);
  demo.validate();
  return demo;
}

}  // namespace fwmpc
