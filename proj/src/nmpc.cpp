#include "fwmpc/nmpc/nmpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/dynamics/dynamics.hpp"

namespace fwmpc {

namespace {

// 12-dim tracking error [dp dv mrp dw] and its jacobian wrt the raw state.
ErrVec tracking_error(const StateVec& x, const RobotState& ref) {
  ErrVec e;
  e.segment<3>(0) = x.segment<3>(0) - ref.p;
  e.segment<3>(3) = x.segment<3>(3) - ref.v;
  e.segment<3>(6) = attitude_error_mrp(x.segment<4>(6).eval(), ref.q);
  e.segment<3>(9) = x.segment<3>(10) - ref.w;
  return e;
}

Eigen::Matrix<double, 12, 13> tracking_error_jacobian(const StateVec& x, const RobotState& ref) {
  Eigen::Matrix<double, 12, 13> E = Eigen::Matrix<double, 12, 13>::Zero();
  E.block<3, 3>(0, 0).setIdentity();
  E.block<3, 3>(3, 3).setIdentity();
  E.block<3, 4>(6, 6) = attitude_error_mrp_jacobian(x.segment<4>(6).eval(), ref.q);
  E.block<3, 3>(9, 10).setIdentity();
  return E;
}

}  // namespace

NmpcWeights NmpcWeights::defaults() {
  NmpcWeights w;
  w.q << 400, 400, 400, 20, 20, 20, 60, 60, 60, 0.05, 0.05, 0.05;
  w.r << 2e4, 2e9, 2e9;
  w.p = 10.0 * w.q;
  return w;
}

void NmpcWeights::validate() const {
  if (!(q.array() > 0).all() || !(r.array() > 0).all() || !(p.array() > 0).all()) {
    throw std::invalid_argument("NmpcWeights: weights must be positive");
  }
}

void NmpcConfig::validate() const {
  if (horizon < 2) throw std::invalid_argument("NmpcConfig: horizon must be >= 2");
  if (!(dt > 0)) throw std::invalid_argument("NmpcConfig: dt must be positive");
  if (substeps < 1) throw std::invalid_argument("NmpcConfig: substeps must be >= 1");
  weights.validate();
  input_bounds.validate();
  if (max_iterations < 1) throw std::invalid_argument("NmpcConfig: max_iterations must be >= 1");
  if (!(fd_step > 0)) throw std::invalid_argument("NmpcConfig: fd_step must be positive");
}

NmpcSolver::NmpcSolver(const NmpcConfig& cfg, const RobotParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  params_.validate();
  resize_workspace();
}

void NmpcSolver::resize_workspace() {
  const int N = cfg_.horizon;
  stages_.resize(N);
  dX_.assign(N + 1, StateVec::Zero());
  dU_.assign(N, CmdVec::Zero());
  sol_.states.assign(N + 1, StateVec::Zero());
  sol_.inputs.assign(N, CmdVec::Zero());
  sol_.active.assign(N, {0, 0, 0});
  warm_ = false;
}

void NmpcSolver::reset() { warm_ = false; }

int NmpcSolver::ref_stride(const ReferenceTrajectory& ref) const {
  const double s = cfg_.dt / ref.dt;
  const int stride = static_cast<int>(std::lround(s));
  if (stride < 1 || std::abs(s - stride) > 1e-6) {
    throw std::invalid_argument("NmpcSolver: controller dt must be an integer multiple of the reference dt");
  }
  return stride;
}

const RobotState& NmpcSolver::ref_state(const ReferenceTrajectory& ref, int base, int i) const {
  return ref.state_at(base + i * ref_stride(ref));
}

CmdVec NmpcSolver::ref_input(const ReferenceTrajectory& ref, int base, int i) const {
  return ref.input_at(base + i * ref_stride(ref)).to_vector();
}

double NmpcSolver::total_cost(const ReferenceTrajectory& ref, int base,
                              const std::vector<StateVec>& X, const std::vector<CmdVec>& U) const {
  const int N = cfg_.horizon;
  double J = 0.0;
  for (int i = 1; i < N; ++i) {
    const ErrVec e = tracking_error(X[i], ref_state(ref, base, i));
    J += 0.5 * e.dot(cfg_.weights.q.cwiseProduct(e));
  }
  const ErrVec eN = tracking_error(X[N], ref_state(ref, base, N));
  J += 0.5 * eN.dot(cfg_.weights.p.cwiseProduct(eN));
  for (int i = 0; i < N; ++i) {
    const CmdVec du = U[i] - ref_input(ref, base, i);
    J += 0.5 * du.dot(cfg_.weights.r.cwiseProduct(du));
  }
  return J;
}

void NmpcSolver::linearize(const ReferenceTrajectory& ref, int base) {
  const int N = cfg_.horizon;
  for (int i = 0; i < N; ++i) {
    Stage& st = stages_[i];
    const StateVec xn = integrate_jacobians(sol_.states[i], sol_.inputs[i], params_, cfg_.dt,
                                            cfg_.substeps, &st.A, &st.B);
    st.d = xn - sol_.states[i + 1];
    if (i >= 1) {
      const RobotState& xr = ref_state(ref, base, i);
      const ErrVec e = tracking_error(sol_.states[i], xr);
      const auto E = tracking_error_jacobian(sol_.states[i], xr);
      st.Hx = E.transpose() * cfg_.weights.q.asDiagonal() * E;
      st.gx = E.transpose() * cfg_.weights.q.cwiseProduct(e);
    } else {
      st.Hx.setZero();
      st.gx.setZero();
    }
    st.gu = cfg_.weights.r.cwiseProduct(sol_.inputs[i] - ref_input(ref, base, i));
  }
  const RobotState& xrN = ref_state(ref, base, N);
  const ErrVec eN = tracking_error(sol_.states[N], xrN);
  const auto EN = tracking_error_jacobian(sol_.states[N], xrN);
  S_term_ = EN.transpose() * cfg_.weights.p.asDiagonal() * EN;
  s_term_ = EN.transpose() * cfg_.weights.p.cwiseProduct(eN);
}

bool NmpcSolver::backward_pass(double levenberg) {
  const int N = cfg_.horizon;
  Eigen::Matrix<double, 13, 13> S = S_term_;
  StateVec s = s_term_;

  for (int i = N - 1; i >= 0; --i) {
    Stage& st = stages_[i];
    const StateVec sv = s + S * st.d;
    const StateVec qx = st.gx + st.A.transpose() * sv;
    st.qu = st.gu + st.B.transpose() * sv;
    const Eigen::Matrix<double, 13, 13> Qxx = st.Hx + st.A.transpose() * S * st.A;
    st.Quu = Mat3(cfg_.weights.r.asDiagonal()) + st.B.transpose() * S * st.B +
             levenberg * Mat3::Identity();
    st.Qux = st.B.transpose() * S * st.A;

    // fixed components step exactly to their bound
    CmdVec du_fix = CmdVec::Zero();
    int free_idx[3];
    int nf = 0;
    for (int j = 0; j < 3; ++j) {
      if (sol_.active[i][j] < 0) {
        du_fix(j) = cfg_.input_bounds.lo(j) - sol_.inputs[i](j);
      } else if (sol_.active[i][j] > 0) {
        du_fix(j) = cfg_.input_bounds.hi(j) - sol_.inputs[i](j);
      } else {
        free_idx[nf++] = j;
      }
    }

    st.k = du_fix;
    st.K.setZero();
    if (nf > 0) {
      Eigen::Matrix3d Qf = Eigen::Matrix3d::Zero();
      Eigen::Vector3d rf = Eigen::Vector3d::Zero();
      Eigen::Matrix<double, 3, 13> Gf = Eigen::Matrix<double, 3, 13>::Zero();
      for (int a = 0; a < nf; ++a) {
        const int ja = free_idx[a];
        rf(a) = st.qu(ja) + st.Quu.row(ja).dot(du_fix);
        Gf.row(a) = st.Qux.row(ja);
        for (int b = 0; b < nf; ++b) Qf(a, b) = st.Quu(ja, free_idx[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> lltd(Eigen::MatrixXd(Qf.topLeftCorner(nf, nf)));
      if (lltd.info() != Eigen::Success) return false;
      const Eigen::VectorXd kf = -lltd.solve(rf.head(nf));
      const Eigen::MatrixXd Kf = -lltd.solve(Gf.topRows(nf));
      for (int a = 0; a < nf; ++a) {
        st.k(free_idx[a]) = kf(a);
        st.K.row(free_idx[a]) = Kf.row(a);
      }
    }

    const Eigen::Matrix<double, 13, 13> KtQuuK = st.K.transpose() * st.Quu * st.K;
    S = Qxx + KtQuuK + st.K.transpose() * st.Qux + st.Qux.transpose() * st.K;
    S = 0.5 * (S + S.transpose()).eval();
    s = qx + st.K.transpose() * st.qu + st.K.transpose() * (st.Quu * st.k) +
        st.Qux.transpose() * st.k;
  }
  return true;
}

void NmpcSolver::forward_pass() {
  const int N = cfg_.horizon;
  dX_[0].setZero();
  for (int i = 0; i < N; ++i) {
    dU_[i] = stages_[i].k + stages_[i].K * dX_[i];
    dX_[i + 1] = stages_[i].A * dX_[i] + stages_[i].B * dU_[i] + stages_[i].d;
  }
}

bool NmpcSolver::refresh_active_set() {
  const int N = cfg_.horizon;
  const double tol = 1e-12;
  bool stable = true;
  for (int i = 0; i < N; ++i) {
    Stage& st = stages_[i];
    const CmdVec u_new = sol_.inputs[i] + dU_[i];
    const CmdVec grad = st.Quu * dU_[i] + st.Qux * dX_[i] + st.qu;
    for (int j = 0; j < 3; ++j) {
      int want = sol_.active[i][j];
      if (sol_.active[i][j] == 0) {
        if (u_new(j) > cfg_.input_bounds.hi(j) + tol) want = +1;
        if (u_new(j) < cfg_.input_bounds.lo(j) - tol) want = -1;
      } else if (sol_.active[i][j] > 0) {
        if (grad(j) > 1e-14) want = 0;  // multiplier has the wrong sign
      } else {
        if (grad(j) < -1e-14) want = 0;
      }
      if (want != sol_.active[i][j]) {
        sol_.active[i][j] = want;
        stable = false;
      }
    }
  }
  return stable;
}

void NmpcSolver::shift_warm_start(int shift, const ReferenceTrajectory& ref, int base_idx) {
  const int N = cfg_.horizon;
  if (shift <= 0) return;
  if (shift >= N) {
    warm_ = false;
    return;
  }
  for (int i = 0; i + shift <= N; ++i) sol_.states[i] = sol_.states[i + shift];
  for (int i = 0; i + shift < N; ++i) {
    sol_.inputs[i] = sol_.inputs[i + shift];
    sol_.active[i] = sol_.active[i + shift];
  }
  for (int i = N - shift; i < N; ++i) {
    sol_.inputs[i] = cfg_.input_bounds.clip(ref_input(ref, base_idx, i));
    sol_.active[i] = {0, 0, 0};
    sol_.states[i + 1] = integrate(sol_.states[i], sol_.inputs[i], params_, cfg_.dt, cfg_.substeps);
  }
}

const NmpcSolution& NmpcSolver::solve(const StateVec& x0_in, const ReferenceTrajectory& ref,
                                      int base_idx) {
  ref.validate();
  const int stride = ref_stride(ref);
  const int N = cfg_.horizon;
  if (!x0_in.allFinite()) throw std::invalid_argument("NmpcSolver: non-finite initial state");

  StateVec x0 = x0_in;
  const double qn = x0.segment<4>(6).norm();
  if (qn < 1e-6) throw std::invalid_argument("NmpcSolver: degenerate initial quaternion");
  x0.segment<4>(6) /= qn;

  if (warm_) {
    const int shift = (base_idx - warm_base_) / stride;
    if (base_idx < warm_base_) {
      warm_ = false;
    } else {
      shift_warm_start(shift, ref, base_idx);
      if (shift > 0) warm_base_ += shift * stride;
    }
  }

  if (!warm_) {
    // cold start on the reference itself: the platform is open-loop unstable, so
    // rolling the reference inputs forward diverges across the horizon. Multiple
    // shooting tolerates the resulting defects.
    sol_.states[0] = x0;
    for (int i = 0; i < N; ++i) {
      sol_.inputs[i] = cfg_.input_bounds.clip(ref_input(ref, base_idx, i));
      sol_.active[i] = {0, 0, 0};
      sol_.states[i + 1] = ref_state(ref, base_idx, i + 1).to_vector();
    }
    warm_base_ = base_idx;
  } else {
    sol_.states[0] = x0;
  }

  double levenberg = cfg_.levenberg_initial;
  double cost = total_cost(ref, base_idx, sol_.states, sol_.inputs);
  sol_.converged = false;
  sol_.iterations = 0;
  sol_.riccati_sweeps = 0;
  filter_.clear();
  double step = std::numeric_limits<double>::infinity();  // last accepted scaled input step

  std::vector<StateVec> Xt(N + 1);
  std::vector<CmdVec> Ut(N);

  for (int iter = 0; iter < cfg_.max_iterations; ++iter) {
    sol_.iterations = iter + 1;
    linearize(ref, base_idx);

    // defect residual of the current iterate
    double defect = 0.0;
    for (int i = 0; i < N; ++i) defect = std::max(defect, stages_[i].d.cwiseAbs().maxCoeff());

    bool bw_ok = false;
    for (int tries = 0; tries < 40; ++tries) {
      bool stable = false;
      int cycles = 0;
      while (!stable && cycles < cfg_.max_active_set_cycles) {
        ++sol_.riccati_sweeps;
        if (!backward_pass(levenberg)) break;
        forward_pass();
        stable = refresh_active_set();
        ++cycles;
        bw_ok = true;
      }
      if (bw_ok) break;
      levenberg = std::max(levenberg * 10.0, 1e-8);
      if (levenberg > cfg_.levenberg_max) {
        throw std::runtime_error("NmpcSolver: stage hessian remained indefinite at maximum damping");
      }
    }

    // scaled stationarity over free components
    double kkt = 0.0;
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (sol_.active[i][j] != 0) continue;
        const double range = cfg_.input_bounds.hi(j) - cfg_.input_bounds.lo(j);
        kkt = std::max(kkt, std::abs(stages_[i].qu(j)) / (cfg_.weights.r(j) * range));
      }
    }
    sol_.kkt_residual = kkt;
    sol_.defect_residual = defect;

    if (kkt < cfg_.kkt_tolerance && defect < cfg_.defect_tolerance) {
      sol_.converged = true;
      break;
    }
    if (cfg_.step_tolerance > 0.0 && step < cfg_.step_tolerance &&
        defect < cfg_.step_defect_tolerance) {
      sol_.converged = true;
      break;
    }

    // filter line search: accept a candidate that sufficiently improves either
    // the cost or the total defect against every iterate seen so far. An l1
    // merit blocks here -- a feasible-but-far iterate needs a long step whose
    // defect growth is quadratic in alpha, and any exact penalty weight large
    // enough to be safe rejects it.
    double defect1 = 0.0;
    for (int i = 0; i < N; ++i) defect1 += stages_[i].d.cwiseAbs().sum();
    if (filter_.empty()) theta_cap_ = std::max(1e3, 10.0 * defect1);
    filter_.push_back({cost, defect1});

    constexpr double kGamma = 1e-5;
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1.0 / 128.0; alpha *= 0.5) {
      Xt[0] = sol_.states[0];
      for (int i = 0; i < N; ++i) {
        Ut[i] = cfg_.input_bounds.clip(sol_.inputs[i] + alpha * dU_[i]);
        if (i >= 1) {
          Xt[i] = sol_.states[i] + alpha * dX_[i];
          Xt[i].segment<4>(6).normalize();
        }
      }
      Xt[N] = sol_.states[N] + alpha * dX_[N];
      Xt[N].segment<4>(6).normalize();

      double d1 = 0.0;
      for (int i = 0; i < N; ++i) {
        const StateVec xn = integrate(Xt[i], Ut[i], params_, cfg_.dt, cfg_.substeps);
        d1 += (xn - Xt[i + 1]).cwiseAbs().sum();
      }
      const double Jt = total_cost(ref, base_idx, Xt, Ut);

      bool ok = std::isfinite(Jt) && std::isfinite(d1) && d1 <= theta_cap_;
      for (size_t k = 0; ok && k < filter_.size(); ++k) {
        ok = Jt <= filter_[k].first - kGamma * d1 || d1 <= (1.0 - kGamma) * filter_[k].second;
      }
      if (ok) {
        step = 0.0;
        for (int i = 0; i < N; ++i) {
          for (int j = 0; j < 3; ++j) {
            const double range = cfg_.input_bounds.hi(j) - cfg_.input_bounds.lo(j);
            step = std::max(step, alpha * std::abs(dU_[i](j)) / range);
          }
        }
        sol_.states.swap(Xt);
        sol_.inputs.swap(Ut);
        cost = Jt;
        accepted = true;
        break;
      }
    }

    if (accepted) {
      levenberg = levenberg > 1e-9 ? levenberg * 0.25 : 0.0;
    } else {
      step = std::numeric_limits<double>::infinity();
      levenberg = std::max(levenberg * 10.0, 1e-6);
      if (levenberg > cfg_.levenberg_max) break;
    }
  }

  sol_.cost = cost;
  warm_ = true;
  return sol_;
}

GainMat NmpcSolver::input_state_sensitivity(const StateVec& x0, const ReferenceTrajectory& ref,
                                            int base_idx) {
  if (cfg_.sensitivity == SensitivityMethod::kRiccati) {
    solve(x0, ref, base_idx);
    linearize(ref, base_idx);
    if (!backward_pass(0.0)) {
      throw std::runtime_error(
          "NmpcSolver: singular stage hessian while extracting the input sensitivity");
    }
    return stages_[0].K;
  }

  // central differences of warm re-solves around the converged solution
  solve(x0, ref, base_idx);
  GainMat K;
  const double h = cfg_.fd_step;
  for (int j = 0; j < kStateDim; ++j) {
    NmpcSolver plus(*this);
    NmpcSolver minus(*this);
    StateVec xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    const CmdVec up = plus.solve(xp, ref, base_idx).u0();
    const CmdVec um = minus.solve(xm, ref, base_idx).u0();
    K.col(j) = (up - um) / (2.0 * h);
  }
  return K;
}

}  // namespace fwmpc
