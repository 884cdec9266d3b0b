#include "fwmpc/sim/controllers.hpp"

#include "fwmpc/core/quat.hpp"
#include "fwmpc/learning/policy_frame.hpp"

namespace fwmpc {

ExpertController::ExpertController(const NmpcConfig& cfg, const RobotParams& params,
                                   const ReferenceTrajectory& ref)
    : solver_(cfg, params), ref_(ref) {}

Command ExpertController::command(double t, const RobotState& estimate, int ref_idx) {
  (void)t;
  const PolicyFrame f = make_policy_frame(estimate, ref_.body_x_at(ref_idx));
  // solve from the yaw-aligned twin of the estimate
  const Mat3 T = f.M * f.R;
  RobotState aligned = estimate;
  aligned.q = rotmat_to_quat(T);
  aligned.w = T.transpose() * (f.R * estimate.w);
  const NmpcSolution& sol = solver_.solve(aligned.to_vector(), ref_, ref_idx);
  const CmdVec u = sol.u0();
  return Command::from_vector(command_from_aligned_output(Vec3(u(0), u(1), u(2)), f));
}

PolicyController::PolicyController(PolicyNet net, const ReferenceTrajectory& ref,
                                   const CmdBounds& bounds)
    : net_(std::move(net)), ref_(ref), bounds_(bounds), t_total_(ref.duration()) {
  net_.validate();
}

Command PolicyController::command(double t, const RobotState& estimate, int ref_idx) {
  const PolicyFrame f = make_policy_frame(estimate, ref_.body_x_at(ref_idx));
  const PolicyInVec in = encode_policy_input(estimate, f, t, t_total_);
  const Vec3 y = net_.forward(in);
  return Command::from_vector(bounds_.clip(command_from_aligned_output(y, f)));
}

}  // namespace fwmpc
