#include "fwmpc/estimator/ukf.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/dynamics/dynamics.hpp"

namespace fwmpc {

namespace {

// error-state block offsets
constexpr int kP = 0, kTh = 3, kV = 6, kW = 9, kTau = 12;

UkfState apply_error(const UkfState& s, const Ukf::ErrVec15& e) {
  UkfState out = s;
  out.p += e.segment<3>(kP);
  out.q = quat_multiply(s.q, mrp_to_quat(e.segment<3>(kTh).eval()));
  out.q = quat_normalize(out.q);
  out.v += e.segment<3>(kV);
  out.w += e.segment<3>(kW);
  out.tau_ext += e.segment<3>(kTau);
  return out;
}

Ukf::ErrVec15 error_about(const UkfState& s, const UkfState& center) {
  Ukf::ErrVec15 e;
  e.segment<3>(kP) = s.p - center.p;
  e.segment<3>(kTh) = attitude_error_mrp(s.q, center.q);
  e.segment<3>(kV) = s.v - center.v;
  e.segment<3>(kW) = s.w - center.w;
  e.segment<3>(kTau) = s.tau_ext - center.tau_ext;
  return e;
}

UkfState propagate_one(const UkfState& s, const CmdVec& u_act, double dt,
                       const RobotParams& prm) {
  Wrench wr;
  wr.torque = s.tau_ext;
  StateVec x;
  x.segment<3>(0) = s.p;
  x.segment<3>(3) = s.v;
  x.segment<4>(6) = quat_normalize(s.q);
  x.segment<3>(10) = s.w;
  const StateVec xn = rk4_step(x, u_act, prm, dt, wr);
  UkfState out;
  out.p = xn.segment<3>(0);
  out.v = xn.segment<3>(3);
  out.q = xn.segment<4>(6);
  out.w = xn.segment<3>(10);
  out.tau_ext = s.tau_ext;  // random walk, driven only through Q
  return out;
}

}  // namespace

void UkfConfig::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0) throw std::invalid_argument("UkfConfig: alpha out of range");
  auto pos = [](const Vec3& v) { return (v.array() > 0.0).all(); };
  if (!pos(q_pos) || !pos(q_theta) || !pos(q_vel) || !pos(q_omega) || !pos(q_tau) ||
      !pos(r_pos) || !pos(r_theta) || !pos(p0_pos) || !pos(p0_theta) || !pos(p0_vel) ||
      !pos(p0_omega) || !pos(p0_tau)) {
    throw std::invalid_argument("UkfConfig: noise parameters must be positive");
  }
}

Ukf::Ukf(const UkfConfig& cfg, const RobotParams& params) : cfg_(cfg), params_(params) {
  cfg_.validate();
  params_.validate();
  const double n = kErr;
  lambda_ = cfg_.alpha * cfg_.alpha * (n + cfg_.kappa) - n;
  wm0_ = lambda_ / (n + lambda_);
  wc0_ = wm0_ + (1.0 - cfg_.alpha * cfg_.alpha + cfg_.beta);
  wi_ = 0.5 / (n + lambda_);
}

void Ukf::init(const UkfState& s0) {
  state_ = s0;
  state_.q = quat_normalize(state_.q);
  P_.setZero();
  P_.diagonal().segment<3>(kP) = cfg_.p0_pos.cwiseAbs2();
  P_.diagonal().segment<3>(kTh) = cfg_.p0_theta.cwiseAbs2();
  P_.diagonal().segment<3>(kV) = cfg_.p0_vel.cwiseAbs2();
  P_.diagonal().segment<3>(kW) = cfg_.p0_omega.cwiseAbs2();
  P_.diagonal().segment<3>(kTau) = cfg_.p0_tau.cwiseAbs2();
  rejected_ = 0;
  consec_rejected_ = 0;
}

void Ukf::init_from_kinematics(const RobotState& s0) {
  UkfState s;
  s.p = s0.p;
  s.q = s0.q;
  s.v = s0.v;
  s.w = s0.w;
  s.tau_ext.setZero();
  init(s);
}

Ukf::ErrMat Ukf::sqrt_scaled_cov() {
  const ErrMat M = (kErr + lambda_) * P_;
  Eigen::LLT<ErrMat> llt(M);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // repair: floor the eigenvalues and retry
  Eigen::SelfAdjointEigenSolver<ErrMat> es(P_);
  ErrVec15 d = es.eigenvalues().cwiseMax(1e-12);
  P_ = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  P_ = 0.5 * (P_ + P_.transpose()).eval();
  Eigen::LLT<ErrMat> llt2(((kErr + lambda_) * P_).eval());
  if (llt2.info() != Eigen::Success) {
    throw std::runtime_error("Ukf: covariance not positive definite after repair");
  }
  return llt2.matrixL();
}

void Ukf::predict(const CmdVec& u_act, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("Ukf::predict: dt must be positive");
  if (!u_act.allFinite()) throw std::invalid_argument("Ukf::predict: non-finite input");

  const ErrMat S = sqrt_scaled_cov();

  // propagate 2n+1 sigma points; index 0 is the center
  std::array<UkfState, 2 * kErr + 1> sig;
  sig[0] = propagate_one(state_, u_act, dt, params_);
  for (int i = 0; i < kErr; ++i) {
    sig[1 + i] = propagate_one(apply_error(state_, S.col(i)), u_act, dt, params_);
    sig[1 + kErr + i] = propagate_one(apply_error(state_, (-S.col(i)).eval()), u_act, dt, params_);
  }

  // mean: additive parts averaged directly, attitude through MRPs about the
  // propagated center sigma
  Vec3 p_m = wm0_ * sig[0].p, v_m = wm0_ * sig[0].v, w_m = wm0_ * sig[0].w,
       tau_m = wm0_ * sig[0].tau_ext;
  Vec3 th_m = Vec3::Zero();  // center's own MRP about itself is zero
  for (int i = 1; i < 2 * kErr + 1; ++i) {
    p_m += wi_ * sig[i].p;
    v_m += wi_ * sig[i].v;
    w_m += wi_ * sig[i].w;
    tau_m += wi_ * sig[i].tau_ext;
    th_m += wi_ * attitude_error_mrp(sig[i].q, sig[0].q);
  }
  UkfState mean;
  mean.p = p_m;
  mean.v = v_m;
  mean.w = w_m;
  mean.tau_ext = tau_m;
  mean.q = quat_normalize(quat_multiply(sig[0].q, mrp_to_quat(th_m)));

  ErrMat P = ErrMat::Zero();
  {
    const ErrVec15 d0 = error_about(sig[0], mean);
    P += wc0_ * d0 * d0.transpose();
    for (int i = 1; i < 2 * kErr + 1; ++i) {
      const ErrVec15 d = error_about(sig[i], mean);
      P += wi_ * d * d.transpose();
    }
  }

  ErrVec15 qd;
  qd.segment<3>(kP) = cfg_.q_pos;
  qd.segment<3>(kTh) = cfg_.q_theta;
  qd.segment<3>(kV) = cfg_.q_vel;
  qd.segment<3>(kW) = cfg_.q_omega;
  qd.segment<3>(kTau) = cfg_.q_tau;
  P.diagonal() += qd * dt;

  state_ = mean;
  P_ = 0.5 * (P + P.transpose()).eval();
}

bool Ukf::update_pose(const Vec3& p_meas, const Quat& q_meas) {
  if (!p_meas.allFinite() || !q_meas.allFinite()) {
    throw std::invalid_argument("Ukf::update_pose: non-finite measurement");
  }

  // linear measurement in the error state: z = [dp; dtheta]
  Eigen::Matrix<double, 6, kErr> H = Eigen::Matrix<double, 6, kErr>::Zero();
  H.block<3, 3>(0, kP).setIdentity();
  H.block<3, 3>(3, kTh).setIdentity();

  Eigen::Matrix<double, 6, 1> innov;
  innov.head<3>() = p_meas - state_.p;
  innov.tail<3>() = attitude_error_mrp(quat_normalize(q_meas), state_.q);

  Eigen::Matrix<double, 6, 6> R = Eigen::Matrix<double, 6, 6>::Zero();
  R.diagonal().head<3>() = cfg_.r_pos.cwiseAbs2();
  R.diagonal().tail<3>() = cfg_.r_theta.cwiseAbs2();

  const Eigen::Matrix<double, 6, 6> Sm = H * P_ * H.transpose() + R;
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(Sm);

  if (cfg_.chi2_gate > 0.0) {
    const double m2 = innov.dot(ldlt.solve(innov));
    const bool escape =
        cfg_.gate_escape_after > 0 && consec_rejected_ >= cfg_.gate_escape_after;
    if (m2 > cfg_.chi2_gate && !escape) {
      ++rejected_;
      ++consec_rejected_;
      return false;
    }
  }
  consec_rejected_ = 0;

  const Eigen::Matrix<double, kErr, 6> K = ldlt.solve(H * P_).transpose();
  const ErrVec15 corr = K * innov;
  state_ = apply_error(state_, corr);

  const ErrMat IKH = ErrMat::Identity() - K * H;
  P_ = IKH * P_ * IKH.transpose() + K * R * K.transpose();
  P_ = 0.5 * (P_ + P_.transpose()).eval();
  return true;
}

}  // namespace fwmpc
