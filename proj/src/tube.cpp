#include "fwmpc/tube/tube.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/tube/frame.hpp"

namespace fwmpc {

void DisturbanceSet::validate() const {
  if (!(force_bound.array() >= 0).all() || !(torque_bound.array() >= 0).all()) {
    throw std::invalid_argument("DisturbanceSet: bounds must be non-negative");
  }
  if (!(force_step.array() >= 0).all() || !(torque_step.array() >= 0).all()) {
    throw std::invalid_argument("DisturbanceSet: steps must be non-negative");
  }
  if (!(step_period > 0.0)) throw std::invalid_argument("DisturbanceSet: step_period must be positive");
}

RandomWalkDisturbance::RandomWalkDisturbance(const DisturbanceSet& set, WalkBoundMode mode, Rng rng,
                                             double dt)
    : set_(set), mode_(mode), rng_(rng) {
  set_.validate();
  w_.force = set_.force_bias;
  w_.torque.setZero();
  scale_ = dt > 0.0 ? std::sqrt(dt / set_.step_period) : 1.0;
}

double RandomWalkDisturbance::bounded(double v, double lo, double hi) const {
  if (hi <= lo) return lo;
  if (mode_ == WalkBoundMode::kClip) return std::min(std::max(v, lo), hi);
  // reflect, repeatedly in case of a large jump
  for (int i = 0; i < 64 && (v < lo || v > hi); ++i) {
    if (v > hi) v = 2.0 * hi - v;
    if (v < lo) v = 2.0 * lo - v;
  }
  return std::min(std::max(v, lo), hi);
}

Wrench RandomWalkDisturbance::step() {
  for (int j = 0; j < 3; ++j) {
    const double f = w_.force(j) + scale_ * set_.force_step(j) * rng_.normal();
    w_.force(j) = bounded(f, set_.force_bias(j) - set_.force_bound(j),
                          set_.force_bias(j) + set_.force_bound(j));
    const double t = w_.torque(j) + scale_ * set_.torque_step(j) * rng_.normal();
    w_.torque(j) = bounded(t, -set_.torque_bound(j), set_.torque_bound(j));
  }
  return w_;
}

void Tube::validate() const {
  if (!(dx.array() >= 0).all() || !(du.array() >= 0).all() || !dx.allFinite() || !du.allFinite()) {
    throw std::invalid_argument("Tube: half-widths must be non-negative and finite");
  }
  if (n_rollouts < 1) throw std::invalid_argument("Tube: needs at least one rollout");
}

void StateBounds::check(const RobotState& s, int step) const {
  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << "tube rollout left the state box at step " << step << ": " << what;
    throw std::runtime_error(msg.str());
  };
  for (int j = 0; j < 3; ++j) {
    if (s.p(j) < p_lo(j) || s.p(j) > p_hi(j)) fail("position component " + std::to_string(j));
  }
  if (s.v.norm() > v_max) fail("velocity magnitude");
  if (s.w.norm() > w_max) fail("angular rate magnitude");
  if (!s.is_finite()) fail("non-finite state");
}

namespace {

AltStateVec reference_alt_state(const ReferenceTrajectory& ref, int idx) {
  // the reference is its own alignment target, so R_match is the identity
  return to_alternative_state(ref.state_at(idx), Mat3(Mat3::Identity()));
}

}  // namespace

Tube construct_tube(const ReferenceTrajectory& ref, const NmpcConfig& nmpc_cfg,
                    const RobotParams& params, const DisturbanceSet& dset,
                    const TubeBuildOptions& opt) {
  ref.validate();
  dset.validate();
  if (opt.n_rollouts < 1) throw std::invalid_argument("construct_tube: n_rollouts must be >= 1");

  const int K = ref.size() - 1;
  Tube tube;
  tube.n_rollouts = opt.n_rollouts;
  tube.trajectory_hash = ref.content_hash();
  tube.seed = opt.seed;

  std::vector<AltStateVec> ref_alt(K + 1);
  for (int k = 0; k <= K; ++k) ref_alt[k] = reference_alt_state(ref, k);

  // one rollout; returns its componentwise deviation maxima
  auto rollout = [&](int r, AltStateVec* dx, CmdVec* du) {
    RandomWalkDisturbance walk(dset, opt.bound_mode, Rng::derive(opt.seed, 0x74756265ull, r), ref.dt);
    NmpcSolver solver(nmpc_cfg, params);
    RobotState x = ref.state_at(0);

    for (int k = 0; k < K; ++k) {
      opt.state_bounds.check(x, k);
      const NmpcSolution& sol = solver.solve(x.to_vector(), ref, k);
      const CmdVec u = sol.u0();
      if (!nmpc_cfg.input_bounds.contains(u, 1e-12)) {
        throw std::runtime_error("construct_tube: controller output left the input set at step " +
                                 std::to_string(k));
      }

      const Mat3 M = frame_align(quat_to_rotmat(x.q), ref.body_x_at(k));
      *dx = dx->cwiseMax((to_alternative_state(x, M) - ref_alt[k]).cwiseAbs());
      *du = du->cwiseMax((u - ref.input_at(k).to_vector()).cwiseAbs());

      const Wrench w = walk.step();
      x = RobotState::from_vector(rk4_step(x.to_vector(), u, params, ref.dt, w));
    }
    opt.state_bounds.check(x, K);
    const Mat3 M = frame_align(quat_to_rotmat(x.q), ref.body_x_at(K));
    *dx = dx->cwiseMax((to_alternative_state(x, M) - ref_alt[K]).cwiseAbs());
  };

  // rollouts are independent (per-rollout rng streams) and max() commutes, so
  // fan out across threads without affecting the result
  int n_threads = opt.n_threads > 0 ? opt.n_threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, opt.n_rollouts));

  std::atomic<int> next{0};
  std::mutex merge_mtx;
  std::exception_ptr first_error;
  auto worker = [&] {
    AltStateVec dx = AltStateVec::Zero();
    CmdVec du = CmdVec::Zero();
    try {
      for (int r = next.fetch_add(1); r < opt.n_rollouts; r = next.fetch_add(1)) {
        rollout(r, &dx, &du);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(merge_mtx);
      if (!first_error) first_error = std::current_exception();
      return;
    }
    std::lock_guard<std::mutex> lock(merge_mtx);
    tube.dx = tube.dx.cwiseMax(dx);
    tube.du = tube.du.cwiseMax(du);
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  tube.validate();
  return tube;
}

bool in_tube(const RobotState& s, int idx, const ReferenceTrajectory& ref, const Tube& tube,
             double* margin) {
  const Mat3 M = frame_align(quat_to_rotmat(s.q), ref.body_x_at(idx));
  const AltStateVec dev = (to_alternative_state(s, M) - reference_alt_state(ref, idx)).cwiseAbs();
  const AltStateVec slack = tube.dx - dev;
  if (margin) *margin = slack.minCoeff();
  return (slack.array() >= -1e-12).all();
}

}  // namespace fwmpc
