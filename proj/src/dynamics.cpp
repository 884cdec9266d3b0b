#include "fwmpc/dynamics/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

namespace {

void check_input(const StateVec& x, const CmdVec& u) {
  if (!x.allFinite() || !u.allFinite()) {
    throw std::invalid_argument("dynamics: non-finite state or input");
  }
  const double qn = x.segment<4>(6).norm();
  if (std::abs(qn - 1.0) > 1e-6) {
    throw std::invalid_argument("dynamics: quaternion norm deviates from 1 beyond 1e-6");
  }
}

// Third column of R(q/|q|): thrust direction in world coordinates.
Vec3 body_z_world(const Quat& q) {
  const Quat qh = q / q.norm();
  const double w = qh(0), x = qh(1), y = qh(2), z = qh(3);
  return Vec3(2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y));
}

// d(body_z_world)/dq including the normalization projector.
Eigen::Matrix<double, 3, 4> body_z_world_jacobian(const Quat& q) {
  const double n = q.norm();
  const Quat qh = q / n;
  const double w = qh(0), x = qh(1), y = qh(2), z = qh(3);
  Eigen::Matrix<double, 3, 4> J;
  J << 2.0 * y, 2.0 * z, 2.0 * w, 2.0 * x,
      -2.0 * x, -2.0 * w, 2.0 * z, 2.0 * y,
       0.0, -4.0 * x, -4.0 * y, 0.0;
  const Mat4 proj = (Mat4::Identity() - qh * qh.transpose()) / n;
  return J * proj;
}

// Core derivative on raw coordinates; tolerates mildly non-unit q so RK4
// stages can reuse it without renormalizing.
StateVec derivative_raw(const StateVec& x, const CmdVec& u, const RobotParams& prm,
                        const Wrench& wr) {
  const Vec3 v = x.segment<3>(3);
  const Quat q = x.segment<4>(6);
  const Vec3 w = x.segment<3>(10);

  StateVec dx;
  dx.segment<3>(0) = v;
  const Vec3 zb = body_z_world(q);
  dx.segment<3>(3) = (zb * u(0) - Vec3(0, 0, prm.mass * prm.gravity) - prm.c_d_tra * v + wr.force) / prm.mass;
  dx.segment<4>(6) = 0.5 * omega_matrix(w) * q;
  const Vec3 Iw = prm.inertia.cwiseProduct(w);
  const Vec3 tau(u(1), u(2), 0.0);
  const Vec3 tau_drag = -prm.c_d_rot * w.norm() * w;
  dx.segment<3>(10) = (-w.cross(Iw) + tau + tau_drag + wr.torque).cwiseQuotient(prm.inertia);
  return dx;
}

void derivative_jacobians_raw(const StateVec& x, const CmdVec& u, const RobotParams& prm,
                              StateMat& A, StateInputMat& B) {
  const Quat q = x.segment<4>(6);
  const Vec3 w = x.segment<3>(10);

  A.setZero();
  B.setZero();

  A.block<3, 3>(0, 3).setIdentity();

  A.block<3, 4>(3, 6) = (u(0) / prm.mass) * body_z_world_jacobian(q);
  A.block<3, 3>(3, 3) = -(prm.c_d_tra / prm.mass) * Mat3::Identity();
  B.block<3, 1>(3, 0) = body_z_world(q) / prm.mass;

  A.block<4, 4>(6, 6) = 0.5 * omega_matrix(w);
  A.block<4, 3>(6, 10) = 0.5 * quat_left_matrix(q).rightCols<3>();

  const Vec3 Iw = prm.inertia.cwiseProduct(w);
  Mat3 dwdot = skew(Iw) - skew(w) * prm.inertia.asDiagonal();
  const double wn = w.norm();
  if (wn > 1e-12) {
    dwdot -= prm.c_d_rot * (wn * Mat3::Identity() + (w * w.transpose()) / wn);
  }
  A.block<3, 3>(10, 10) = prm.inertia.cwiseInverse().asDiagonal() * dwdot;
  B(10, 1) = 1.0 / prm.inertia(0);
  B(11, 2) = 1.0 / prm.inertia(1);
}

StateVec rk4_raw(const StateVec& x, const CmdVec& u, const RobotParams& prm, double dt,
                 const Wrench& wr) {
  const StateVec k1 = derivative_raw(x, u, prm, wr);
  const StateVec k2 = derivative_raw(x + 0.5 * dt * k1, u, prm, wr);
  const StateVec k3 = derivative_raw(x + 0.5 * dt * k2, u, prm, wr);
  const StateVec k4 = derivative_raw(x + dt * k3, u, prm, wr);
  StateVec xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  xn.segment<4>(6).normalize();
  return xn;
}

}  // namespace

StateVec state_derivative(const StateVec& x, const CmdVec& u, const RobotParams& params,
                          const Wrench& wrench) {
  check_input(x, u);
  return derivative_raw(x, u, params, wrench);
}

void state_derivative_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                                StateMat* A, StateInputMat* B, const Wrench& wrench) {
  check_input(x, u);
  (void)wrench;  // additive, does not enter the jacobians
  StateMat Al;
  StateInputMat Bl;
  derivative_jacobians_raw(x, u, params, Al, Bl);
  if (A) *A = Al;
  if (B) *B = Bl;
}

StateVec rk4_step(const StateVec& x, const CmdVec& u, const RobotParams& params, double dt,
                  const Wrench& wrench) {
  check_input(x, u);
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  return rk4_raw(x, u, params, dt, wrench);
}

StateVec rk4_step_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                            double dt, StateMat* A, StateInputMat* B, const Wrench& wrench) {
  check_input(x, u);
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step_jacobians: dt must be positive");

  StateMat A1, A2, A3, A4;
  StateInputMat B1, B2, B3, B4;

  const StateVec k1 = derivative_raw(x, u, params, wrench);
  derivative_jacobians_raw(x, u, params, A1, B1);
  const StateVec x2 = x + 0.5 * dt * k1;
  const StateVec k2 = derivative_raw(x2, u, params, wrench);
  derivative_jacobians_raw(x2, u, params, A2, B2);
  const StateVec x3 = x + 0.5 * dt * k2;
  const StateVec k3 = derivative_raw(x3, u, params, wrench);
  derivative_jacobians_raw(x3, u, params, A3, B3);
  const StateVec x4 = x + dt * k3;
  const StateVec k4 = derivative_raw(x4, u, params, wrench);
  derivative_jacobians_raw(x4, u, params, A4, B4);

  const StateMat dk1 = A1;
  const StateMat dk2 = A2 * (StateMat::Identity() + 0.5 * dt * dk1);
  const StateMat dk3 = A3 * (StateMat::Identity() + 0.5 * dt * dk2);
  const StateMat dk4 = A4 * (StateMat::Identity() + dt * dk3);
  StateMat Ad = StateMat::Identity() + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);

  const StateInputMat dk1u = B1;
  const StateInputMat dk2u = B2 + 0.5 * dt * A2 * dk1u;
  const StateInputMat dk3u = B3 + 0.5 * dt * A3 * dk2u;
  const StateInputMat dk4u = B4 + dt * A4 * dk3u;
  StateInputMat Bd = (dt / 6.0) * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);

  StateVec xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  // renormalization of the quaternion block
  const Quat qr = xn.segment<4>(6);
  const double n = qr.norm();
  const Quat qh = qr / n;
  const Mat4 proj = (Mat4::Identity() - qh * qh.transpose()) / n;
  Ad.middleRows<4>(6) = proj * Ad.middleRows<4>(6);
  Bd.middleRows<4>(6) = proj * Bd.middleRows<4>(6);
  xn.segment<4>(6) = qh;

  if (A) *A = Ad;
  if (B) *B = Bd;
  return xn;
}

StateVec integrate(const StateVec& x, const CmdVec& u, const RobotParams& params, double dt,
                   int n_substeps, const Wrench& wrench) {
  check_input(x, u);
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (n_substeps < 1) throw std::invalid_argument("integrate: n_substeps must be >= 1");
  const double h = dt / n_substeps;
  StateVec xi = x;
  for (int i = 0; i < n_substeps; ++i) xi = rk4_raw(xi, u, params, h, wrench);
  return xi;
}

StateVec integrate_jacobians(const StateVec& x, const CmdVec& u, const RobotParams& params,
                             double dt, int n_substeps, StateMat* A, StateInputMat* B,
                             const Wrench& wrench) {
  if (n_substeps < 1) throw std::invalid_argument("integrate_jacobians: n_substeps must be >= 1");
  const double h = dt / n_substeps;
  StateVec xi = x;
  StateMat Acc = StateMat::Identity();
  StateInputMat Bcc = StateInputMat::Zero();
  for (int i = 0; i < n_substeps; ++i) {
    StateMat Ai;
    StateInputMat Bi;
    xi = rk4_step_jacobians(xi, u, params, h, &Ai, &Bi, wrench);
    Acc = Ai * Acc;
    Bcc = Ai * Bcc + Bi;
  }
  if (A) *A = Acc;
  if (B) *B = Bcc;
  return xi;
}

}  // namespace fwmpc
