#include "fwmpc/learning/dagger.hpp"

#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/learning/policy_frame.hpp"
#include "fwmpc/sim/controllers.hpp"
#include "fwmpc/util/rng.hpp"

namespace fwmpc {

namespace {

// Student policy that asks the expert for a label at every evaluation while
// the maneuver is still running.
class CollectingController : public FlightController {
 public:
  CollectingController(const PolicyNet& net, const ReferenceTrajectory& ref,
                       const NmpcConfig& nmpc_cfg, const RobotParams& params,
                       const CmdBounds& bounds, Dataset* out)
      : student_(net, ref, bounds), expert_(nmpc_cfg, params), ref_(ref), out_(out) {}

  Command command(double t, const RobotState& estimate, int ref_idx) override {
    if (ref_idx < ref_.size() - 1) {
      const PolicyFrame f = make_policy_frame(estimate, ref_.body_x_at(ref_idx));
      const Mat3 T = f.M * f.R;
      RobotState aligned = estimate;
      aligned.q = rotmat_to_quat(T);
      aligned.w = T.transpose() * (f.R * estimate.w);
      const NmpcSolution& sol = expert_.solve(aligned.to_vector(), ref_, ref_idx);
      const CmdVec u = sol.u0();  // already in the aligned frame
      out_->push_back(encode_policy_input(estimate, f, t, ref_.duration()),
                      Vec3(u(0), u(1), u(2)), PairTag::kAggregated);
    }
    return student_.command(t, estimate, ref_idx);
  }

  std::string name() const override { return "dagger-student"; }
  void reset() override { expert_.reset(); }

 private:
  PolicyController student_;
  NmpcSolver expert_;
  const ReferenceTrajectory& ref_;
  Dataset* out_;
};

}  // namespace

DaggerResult run_dagger(const PolicyNet& start, const ReferenceTrajectory& ref, const Tube& tube,
                        const NmpcConfig& nmpc_cfg, const RobotParams& params,
                        const DaggerOptions& opt) {
  if (opt.n_demos < 1) throw std::invalid_argument("run_dagger: n_demos must be >= 1");

  DaggerResult res;
  res.policies.push_back(start);

  PolicyNet net = start;
  for (int i = 0; i < opt.n_demos; ++i) {
    Dataset visits;
    for (int attempt = 0;; ++attempt) {
      visits = Dataset();
      CollectingController student(net, ref, nmpc_cfg, params, opt.sim.cmd_bounds, &visits);
      SimConfig sim = opt.sim;
      sim.seed = Rng::derive(opt.seed, 0x64616767ull,
                             static_cast<uint64_t>(i) * 16 + static_cast<uint64_t>(attempt))
                     .next_u64();
      run_closed_loop(sim, params, ref, tube, student);
      if (visits.size() > 0) break;
      if (attempt + 1 >= opt.max_retries) {
        throw std::runtime_error("run_dagger: demo produced no labels after retries");
      }
    }

    res.labels_per_demo.push_back(visits.size());
    res.aggregated.append(visits);

    TrainConfig tc = opt.fine_tune;
    tc.warm_start = true;
    tc.seed = Rng::derive(opt.seed, 0x64677472ull, static_cast<uint64_t>(i)).next_u64();
    res.reports.push_back(train_policy(res.aggregated, tc, &net));
    res.policies.push_back(net);
  }
  return res;
}

}  // namespace fwmpc
