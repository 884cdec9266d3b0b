#include "fwmpc/trajgen/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/dynamics/dynamics.hpp"

namespace fwmpc {

namespace {

ErrVec err12(const StateVec& x, const RobotState& ref) {
  ErrVec e;
  e.segment<3>(0) = x.segment<3>(0) - ref.p;
  e.segment<3>(3) = x.segment<3>(3) - ref.v;
  e.segment<3>(6) = attitude_error_mrp(x.segment<4>(6).eval(), ref.q);
  e.segment<3>(9) = x.segment<3>(10) - ref.w;
  return e;
}

Eigen::Matrix<double, 12, 13> err12_jacobian(const StateVec& x, const RobotState& ref) {
  Eigen::Matrix<double, 12, 13> E = Eigen::Matrix<double, 12, 13>::Zero();
  E.block<3, 3>(0, 0).setIdentity();
  E.block<3, 3>(3, 3).setIdentity();
  E.block<3, 4>(6, 6) = attitude_error_mrp_jacobian(x.segment<4>(6).eval(), ref.q);
  E.block<3, 3>(9, 10).setIdentity();
  return E;
}

ErrVec waypoint_mask(const TrajWaypoint& wp) {
  ErrVec m = ErrVec::Zero();
  if (wp.constrain_pos) m.segment<3>(0).setOnes();
  if (wp.constrain_vel) m.segment<3>(3).setOnes();
  if (wp.constrain_att) m.segment<3>(6).setOnes();
  if (wp.constrain_rate) m.segment<3>(9).setOnes();
  return m;
}

// Augmented-Lagrangian Gauss-Newton SQP on a fixed grid. Mirrors the tracking
// controller's multiple-shooting transcription, with stage cost terms that
// vary per index (waypoint penalties) instead of a moving reference window.
class TrajOptSolver {
 public:
  TrajOptSolver(const RobotState& start, int n_steps, const std::vector<TrajWaypoint>& waypoints,
                const ConstraintSets& sets, const RobotParams& params, const TrajOptConfig& cfg)
      : cfg_(cfg), sets_(sets), params_(params), wps_(waypoints), T_(n_steps) {
    cfg_.validate();
    sets_.validate();
    params_.validate();
    if (T_ < 2) throw std::invalid_argument("optimize_trajectory: needs at least 2 steps");
    for (const auto& wp : wps_) {
      if (wp.index < 1 || wp.index > T_) {
        throw std::invalid_argument("optimize_trajectory: waypoint index outside (0, n_steps]");
      }
      if (!(wp.constrain_pos || wp.constrain_vel || wp.constrain_att || wp.constrain_rate)) {
        throw std::invalid_argument("optimize_trajectory: waypoint constrains nothing");
      }
    }

    x0_ = start.to_vector();
    nominal_ = cfg_.anchor_to_start ? start : RobotState();
    u_nom_ = CmdVec(params_.hover_thrust(), 0.0, 0.0);

    X_.assign(T_ + 1, x0_);
    U_.assign(T_, sets_.u_ref.clip(u_nom_));
    active_.assign(T_, {0, 0, 0});
    stages_.resize(T_);
    dX_.assign(T_ + 1, StateVec::Zero());
    dU_.assign(T_, CmdVec::Zero());
    lambda_.assign(wps_.size(), ErrVec::Zero());
    masks_.resize(wps_.size());
    wp_at_.assign(T_ + 1, {});
    for (size_t k = 0; k < wps_.size(); ++k) {
      masks_[k] = waypoint_mask(wps_[k]);
      wp_at_[wps_[k].index].push_back(static_cast<int>(k));
    }
  }

  void set_guess(const std::vector<StateVec>* xg, const std::vector<CmdVec>* ug) {
    if (xg) {
      if (static_cast<int>(xg->size()) != T_ + 1) {
        throw std::invalid_argument("optimize_trajectory: state guess has the wrong length");
      }
      X_ = *xg;
      X_[0] = x0_;
      for (auto& x : X_) x.segment<4>(6).normalize();
    }
    if (ug) {
      if (static_cast<int>(ug->size()) != T_) {
        throw std::invalid_argument("optimize_trajectory: input guess has the wrong length");
      }
      U_ = *ug;
      for (auto& u : U_) u = sets_.u_ref.clip(u);
    }
  }

  TrajOptResult run() {
    mu_ = cfg_.penalty_initial;
    double prev_violation = std::numeric_limits<double>::infinity();
    TrajOptResult res;
    bool converged = false;

    for (int outer = 0; outer < cfg_.max_outer; ++outer) {
      res.outer_iterations = outer + 1;
      const bool inner_ok = solve_inner();

      double violation = 0.0;
      for (size_t k = 0; k < wps_.size(); ++k) {
        const ErrVec c = masks_[k].cwiseProduct(err12(X_[wps_[k].index], wps_[k].target));
        violation = std::max(violation, c.cwiseAbs().maxCoeff());
      }
      res.waypoint_residual = violation;
      res.kkt_residual = kkt_;
      res.defect_residual = defect_;

      if (inner_ok && violation <= cfg_.waypoint_tolerance) {
        converged = true;
        break;
      }

      for (size_t k = 0; k < wps_.size(); ++k) {
        const ErrVec c = masks_[k].cwiseProduct(err12(X_[wps_[k].index], wps_[k].target));
        lambda_[k] += mu_ * c;
      }
      if (violation > 0.25 * prev_violation) {
        mu_ = std::min(mu_ * cfg_.penalty_growth, cfg_.penalty_max);
      }
      prev_violation = violation;
    }

    if (!converged) {
      std::ostringstream msg;
      msg << "optimize_trajectory: no convergence after " << res.outer_iterations
          << " outer iterations (waypoint residual " << res.waypoint_residual << ", kkt "
          << res.kkt_residual << ", defect " << res.defect_residual << ")";
      throw std::runtime_error(msg.str());
    }

    for (int i = 0; i <= T_; ++i) {
      if (!sets_.x_ref.contains(X_[i], 1e-9)) {
        throw std::runtime_error("optimize_trajectory: solution leaves the reference state box at step " +
                                 std::to_string(i));
      }
    }

    res.ref.dt = cfg_.dt;
    res.ref.states.reserve(T_ + 1);
    for (int i = 0; i <= T_; ++i) res.ref.states.push_back(RobotState::from_vector(X_[i]));
    res.ref.inputs.reserve(T_ + 1);
    for (int i = 0; i < T_; ++i) res.ref.inputs.push_back(Command::from_vector(U_[i]));
    res.ref.inputs.push_back(res.ref.inputs.back());
    const Vec3 heading(std::cos(cfg_.yaw), std::sin(cfg_.yaw), 0.0);
    res.ref.body_x.assign(T_ + 1, heading);
    res.ref.validate();

    res.objective = T_ * cfg_.dt + nominal_cost(X_, U_);
    return res;
  }

 private:
  struct Stage {
    StateMat A;
    StateInputMat B;
    StateVec d;
    Eigen::Matrix<double, 13, 13> Hx;
    StateVec gx;
    CmdVec gu;
    Mat3 Quu;
    GainMat Qux;
    CmdVec qu;
    CmdVec k;
    GainMat K;
  };

  // quadratic terms of the objective, without the augmented pieces
  double nominal_cost(const std::vector<StateVec>& X, const std::vector<CmdVec>& U) const {
    double J = 0.0;
    for (int i = 1; i <= T_; ++i) {
      const ErrVec e = err12(X[i], nominal_);
      J += 0.5 * e.dot(cfg_.q_state.cwiseProduct(e));
    }
    for (int i = 0; i < T_; ++i) {
      const CmdVec du = U[i] - u_nom_;
      J += 0.5 * du.dot(cfg_.r_input.cwiseProduct(du));
    }
    return J;
  }

  double total_cost(const std::vector<StateVec>& X, const std::vector<CmdVec>& U) const {
    double J = nominal_cost(X, U);
    for (size_t k = 0; k < wps_.size(); ++k) {
      const ErrVec c = masks_[k].cwiseProduct(err12(X[wps_[k].index], wps_[k].target));
      J += lambda_[k].dot(c) + 0.5 * mu_ * c.squaredNorm();
    }
    return J;
  }

  void linearize() {
    for (int i = 0; i < T_; ++i) {
      Stage& st = stages_[i];
      const StateVec xn =
          integrate_jacobians(X_[i], U_[i], params_, cfg_.dt, cfg_.substeps, &st.A, &st.B);
      st.d = xn - X_[i + 1];
      if (i >= 1) {
        stage_cost_terms(i, &st.Hx, &st.gx);
      } else {
        st.Hx.setZero();
        st.gx.setZero();
      }
      st.gu = cfg_.r_input.cwiseProduct(U_[i] - u_nom_);
    }
    stage_cost_terms(T_, &S_term_, &s_term_);
  }

  void stage_cost_terms(int i, Eigen::Matrix<double, 13, 13>* H, StateVec* g) const {
    const ErrVec e = err12(X_[i], nominal_);
    const auto E = err12_jacobian(X_[i], nominal_);
    *H = E.transpose() * cfg_.q_state.asDiagonal() * E;
    *g = E.transpose() * cfg_.q_state.cwiseProduct(e);
    for (int k : wp_at_[i]) {
      const TrajWaypoint& wp = wps_[static_cast<size_t>(k)];
      const ErrVec c = masks_[k].cwiseProduct(err12(X_[i], wp.target));
      const auto Ew = err12_jacobian(X_[i], wp.target);
      *H += mu_ * Ew.transpose() * masks_[k].asDiagonal() * Ew;
      *g += Ew.transpose() * masks_[k].cwiseProduct(lambda_[k] + mu_ * c);
    }
  }

  bool backward_pass(double levenberg) {
    Eigen::Matrix<double, 13, 13> S = S_term_;
    StateVec s = s_term_;
    for (int i = T_ - 1; i >= 0; --i) {
      Stage& st = stages_[i];
      const StateVec sv = s + S * st.d;
      const StateVec qx = st.gx + st.A.transpose() * sv;
      st.qu = st.gu + st.B.transpose() * sv;
      const Eigen::Matrix<double, 13, 13> Qxx = st.Hx + st.A.transpose() * S * st.A;
      st.Quu = Mat3(cfg_.r_input.asDiagonal()) + st.B.transpose() * S * st.B +
               levenberg * Mat3::Identity();
      st.Qux = st.B.transpose() * S * st.A;

      CmdVec du_fix = CmdVec::Zero();
      int free_idx[3];
      int nf = 0;
      for (int j = 0; j < 3; ++j) {
        if (active_[i][j] < 0) {
          du_fix(j) = sets_.u_ref.lo(j) - U_[i](j);
        } else if (active_[i][j] > 0) {
          du_fix(j) = sets_.u_ref.hi(j) - U_[i](j);
        } else {
          free_idx[nf++] = j;
        }
      }

      st.k = du_fix;
      st.K.setZero();
      if (nf > 0) {
        Eigen::MatrixXd Qf(nf, nf);
        Eigen::VectorXd rf(nf);
        Eigen::MatrixXd Gf(nf, kStateDim);
        for (int a = 0; a < nf; ++a) {
          const int ja = free_idx[a];
          rf(a) = st.qu(ja) + st.Quu.row(ja).dot(du_fix);
          Gf.row(a) = st.Qux.row(ja);
          for (int b = 0; b < nf; ++b) Qf(a, b) = st.Quu(ja, free_idx[b]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(Qf);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd kf = -llt.solve(rf);
        const Eigen::MatrixXd Kf = -llt.solve(Gf);
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

  void forward_pass() {
    dX_[0].setZero();
    for (int i = 0; i < T_; ++i) {
      dU_[i] = stages_[i].k + stages_[i].K * dX_[i];
      dX_[i + 1] = stages_[i].A * dX_[i] + stages_[i].B * dU_[i] + stages_[i].d;
    }
  }

  bool refresh_active_set() {
    const double tol = 1e-12;
    bool stable = true;
    for (int i = 0; i < T_; ++i) {
      Stage& st = stages_[i];
      const CmdVec u_new = U_[i] + dU_[i];
      const CmdVec grad = st.Quu * dU_[i] + st.Qux * dX_[i] + st.qu;
      for (int j = 0; j < 3; ++j) {
        int want = active_[i][j];
        if (active_[i][j] == 0) {
          if (u_new(j) > sets_.u_ref.hi(j) + tol) want = +1;
          if (u_new(j) < sets_.u_ref.lo(j) - tol) want = -1;
        } else if (active_[i][j] > 0) {
          if (grad(j) > 1e-14) want = 0;
        } else {
          if (grad(j) < -1e-14) want = 0;
        }
        if (want != active_[i][j]) {
          active_[i][j] = want;
          stable = false;
        }
      }
    }
    return stable;
  }

  // Gauss-Newton SQP to stationarity at the current multipliers.
  bool solve_inner() {
    double levenberg = 0.0;
    double cost = total_cost(X_, U_);
    std::vector<StateVec> Xt(T_ + 1);
    std::vector<CmdVec> Ut(T_);

    for (int iter = 0; iter < cfg_.max_inner; ++iter) {
      linearize();

      defect_ = 0.0;
      for (int i = 0; i < T_; ++i) defect_ = std::max(defect_, stages_[i].d.cwiseAbs().maxCoeff());

      bool bw_ok = false;
      for (int tries = 0; tries < 40; ++tries) {
        bool stable = false;
        int cycles = 0;
        while (!stable && cycles < cfg_.max_active_set_cycles) {
          if (!backward_pass(levenberg)) break;
          forward_pass();
          stable = refresh_active_set();
          ++cycles;
          bw_ok = true;
        }
        if (bw_ok) break;
        levenberg = std::max(levenberg * 10.0, 1e-8);
        if (levenberg > cfg_.levenberg_max) {
          throw std::runtime_error("optimize_trajectory: stage hessian remained indefinite");
        }
      }

      kkt_ = 0.0;
      for (int i = 0; i < T_; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (active_[i][j] != 0) continue;
          const double range = sets_.u_ref.hi(j) - sets_.u_ref.lo(j);
          kkt_ = std::max(kkt_, std::abs(stages_[i].qu(j)) / (cfg_.r_input(j) * range));
        }
      }
      if (kkt_ < cfg_.kkt_tolerance && defect_ < cfg_.defect_tolerance) return true;

      double gmax = 1.0;
      for (int i = 0; i < T_; ++i) gmax = std::max(gmax, stages_[i].qu.cwiseAbs().maxCoeff());
      const double nu = 10.0 * gmax;

      double defect1 = 0.0;
      for (int i = 0; i < T_; ++i) defect1 += stages_[i].d.cwiseAbs().sum();
      const double merit0 = cost + nu * defect1;

      bool accepted = false;
      for (double alpha = 1.0; alpha > 1.0 / 128.0; alpha *= 0.5) {
        Xt[0] = X_[0];
        for (int i = 0; i < T_; ++i) {
          Ut[i] = sets_.u_ref.clip(U_[i] + alpha * dU_[i]);
          if (i >= 1) {
            Xt[i] = X_[i] + alpha * dX_[i];
            Xt[i].segment<4>(6).normalize();
          }
        }
        Xt[T_] = X_[T_] + alpha * dX_[T_];
        Xt[T_].segment<4>(6).normalize();

        double d1 = 0.0;
        for (int i = 0; i < T_; ++i) {
          const StateVec xn = integrate(Xt[i], Ut[i], params_, cfg_.dt, cfg_.substeps);
          d1 += (xn - Xt[i + 1]).cwiseAbs().sum();
        }
        const double Jt = total_cost(Xt, Ut);
        if (Jt + nu * d1 <= merit0 - 1e-15) {
          X_.swap(Xt);
          U_.swap(Ut);
          cost = Jt;
          accepted = true;
          break;
        }
      }

      if (accepted) {
        levenberg = levenberg > 1e-9 ? levenberg * 0.25 : 0.0;
      } else {
        levenberg = std::max(levenberg * 10.0, 1e-6);
        if (levenberg > cfg_.levenberg_max) return false;
      }
    }
    return false;
  }

  TrajOptConfig cfg_;
  ConstraintSets sets_;
  RobotParams params_;
  std::vector<TrajWaypoint> wps_;
  int T_;

  StateVec x0_;
  RobotState nominal_;
  CmdVec u_nom_;

  std::vector<StateVec> X_;
  std::vector<CmdVec> U_;
  std::vector<std::array<int, 3>> active_;
  std::vector<Stage> stages_;
  std::vector<StateVec> dX_;
  std::vector<CmdVec> dU_;
  Eigen::Matrix<double, 13, 13> S_term_;
  StateVec s_term_;

  std::vector<ErrVec> lambda_;
  std::vector<ErrVec> masks_;
  std::vector<std::vector<int>> wp_at_;
  double mu_ = 0.0;
  double kkt_ = 0.0;
  double defect_ = 0.0;
};

}  // namespace

bool StateBox::contains(const StateVec& x, double tol) const {
  for (int j = 0; j < 3; ++j) {
    if (x(j) < p_lo(j) - tol || x(j) > p_hi(j) + tol) return false;
  }
  if (x.segment<3>(3).norm() > v_max + tol) return false;
  if (x.segment<3>(10).norm() > w_max + tol) return false;
  return true;
}

void ConstraintSets::validate() const {
  u_ref.validate();
  u_mpc.validate();
  for (int j = 0; j < 3; ++j) {
    if (!(u_ref.lo(j) > u_mpc.lo(j)) || !(u_ref.hi(j) < u_mpc.hi(j))) {
      throw std::invalid_argument(
          "ConstraintSets: reference input box must sit strictly inside the controller box");
    }
  }
  for (int j = 0; j < 3; ++j) {
    if (!(x_ref.p_lo(j) > x_mpc.p_lo(j)) || !(x_ref.p_hi(j) < x_mpc.p_hi(j))) {
      throw std::invalid_argument(
          "ConstraintSets: reference position box must sit strictly inside the outer box");
    }
  }
  if (!(x_ref.v_max < x_mpc.v_max) || !(x_ref.w_max < x_mpc.w_max)) {
    throw std::invalid_argument("ConstraintSets: reference rate limits must be strictly tighter");
  }
}

double ConstraintSets::input_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 3; ++j) {
    const double width = u_mpc.hi(j) - u_mpc.lo(j);
    m = std::min(m, (u_ref.lo(j) - u_mpc.lo(j)) / width);
    m = std::min(m, (u_mpc.hi(j) - u_ref.hi(j)) / width);
  }
  return m;
}

void TrajOptConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("TrajOptConfig: dt must be positive");
  if (substeps < 1) throw std::invalid_argument("TrajOptConfig: substeps must be >= 1");
  if (!(q_state.array() >= 0).all() || !(r_input.array() > 0).all()) {
    throw std::invalid_argument("TrajOptConfig: weights must be non-negative (inputs positive)");
  }
  if (max_outer < 1 || max_inner < 1) {
    throw std::invalid_argument("TrajOptConfig: iteration limits must be >= 1");
  }
  if (!(waypoint_tolerance > 0) || !(kkt_tolerance > 0) || !(defect_tolerance > 0)) {
    throw std::invalid_argument("TrajOptConfig: tolerances must be positive");
  }
  if (!(penalty_initial > 0) || !(penalty_growth > 1) || !(penalty_max > penalty_initial)) {
    throw std::invalid_argument("TrajOptConfig: penalty schedule is malformed");
  }
}

TrajOptResult optimize_trajectory(const RobotState& start, int n_steps,
                                  const std::vector<TrajWaypoint>& waypoints,
                                  const ConstraintSets& sets, const RobotParams& params,
                                  const TrajOptConfig& cfg, const std::vector<StateVec>* x_guess,
                                  const std::vector<CmdVec>* u_guess) {
  TrajOptSolver solver(start, n_steps, waypoints, sets, params, cfg);
  solver.set_guess(x_guess, u_guess);
  return solver.run();
}

TrajOptResult roll_flip_reference(const Vec3& hover_point, int n_flips, double spin_s,
                                  double settle_s, double pad_s, const ConstraintSets& sets,
                                  const RobotParams& params, const TrajOptConfig& cfg) {
  if (n_flips < 1) throw std::invalid_argument("roll_flip_reference: n_flips must be >= 1");
  if (!(spin_s > 0) || settle_s < 0 || pad_s < 0) {
    throw std::invalid_argument("roll_flip_reference: durations must be positive");
  }
  const double total = 2.0 * pad_s + n_flips * spin_s + (n_flips - 1) * settle_s;
  const int T = static_cast<int>(std::lround(total / cfg.dt));
  const RobotState start = RobotState::hover(hover_point);

  // kinematic spin guess: quintic roll angle profile per flip, position held
  std::vector<StateVec> xg(T + 1);
  std::vector<CmdVec> ug(T, CmdVec(params.hover_thrust(), 0.0, 0.0));
  std::vector<TrajWaypoint> wps;
  for (int i = 0; i <= T; ++i) {
    const double t = i * cfg.dt;
    double phi = 0.0, phidot = 0.0;
    for (int f = 0; f < n_flips; ++f) {
      const double t_f = pad_s + f * (spin_s + settle_s);
      const double tau = (t - t_f) / spin_s;
      if (tau >= 1.0) {
        phi += 2.0 * M_PI;
      } else if (tau > 0.0) {
        phi += 2.0 * M_PI * (10.0 * std::pow(tau, 3) - 15.0 * std::pow(tau, 4) + 6.0 * std::pow(tau, 5));
        phidot += 2.0 * M_PI * (30.0 * std::pow(tau, 2) - 60.0 * std::pow(tau, 3) + 30.0 * std::pow(tau, 4)) / spin_s;
      }
    }
    RobotState s = start;
    s.q = quat_multiply(start.q, quat_from_axis_angle(Vec3::UnitX(), phi));
    s.w = Vec3(phidot, 0.0, 0.0);
    xg[i] = s.to_vector();
  }

  for (int f = 0; f < n_flips; ++f) {
    const double t_f = pad_s + f * (spin_s + settle_s);
    TrajWaypoint mid;
    mid.index = static_cast<int>(std::lround((t_f + 0.5 * spin_s) / cfg.dt));
    mid.target = start;
    mid.target.q = quat_multiply(start.q, quat_from_axis_angle(Vec3::UnitX(), M_PI));
    mid.constrain_pos = false;
    mid.constrain_att = true;
    wps.push_back(mid);
    if (f + 1 < n_flips) {
      TrajWaypoint between;  // settle back over the hover point between flips
      between.index = static_cast<int>(std::lround((t_f + spin_s + 0.5 * settle_s) / cfg.dt));
      between.target = start;
      between.constrain_pos = true;
      wps.push_back(between);
    }
  }
  TrajWaypoint end;
  end.index = T;
  end.target = start;
  end.constrain_pos = true;
  end.constrain_vel = true;
  end.constrain_att = true;
  end.constrain_rate = true;
  wps.push_back(end);

  return optimize_trajectory(start, T, wps, sets, params, cfg, &xg, &ug);
}

}  // namespace fwmpc
