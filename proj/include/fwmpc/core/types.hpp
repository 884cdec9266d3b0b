#pragma once

#include <Eigen/Dense>

namespace fwmpc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Quaternions are stored scalar-first [w, x, y, z], Hamilton convention,
// and rotate body coordinates into world coordinates.
using Quat = Eigen::Vector4d;

constexpr int kStateDim = 13;   // p(3) v(3) q(4) omega(3)
constexpr int kErrDim = 12;     // p(3) v(3) mrp(3) omega(3)
constexpr int kInputDim = 3;    // thrust, tau_x, tau_y
constexpr int kAltStateDim = 12;
constexpr int kPolicyInDim = 14;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using ErrVec = Eigen::Matrix<double, kErrDim, 1>;
using CmdVec = Eigen::Matrix<double, kInputDim, 1>;
using AltStateVec = Eigen::Matrix<double, kAltStateDim, 1>;
using PolicyInVec = Eigen::Matrix<double, kPolicyInDim, 1>;

using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using StateInputMat = Eigen::Matrix<double, kStateDim, kInputDim>;
using GainMat = Eigen::Matrix<double, kInputDim, kStateDim>;

struct RobotState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quat q = Quat(1.0, 0.0, 0.0, 0.0);
  Vec3 w = Vec3::Zero();  // body angular rate, rad/s

  RobotState() = default;
  RobotState(const Vec3& p_, const Vec3& v_, const Quat& q_, const Vec3& w_);

  static RobotState hover(const Vec3& position);
  static RobotState from_vector(const StateVec& x);

  StateVec to_vector() const;
  void normalize_quat();
  bool is_finite() const;
};

struct Command {
  double thrust = 0.0;  // collective force along body z, N
  double tau_x = 0.0;   // roll torque, N*m
  double tau_y = 0.0;   // pitch torque, N*m

  Command() = default;
  Command(double f, double tx, double ty) : thrust(f), tau_x(tx), tau_y(ty) {}
  static Command from_vector(const CmdVec& u) { return {u(0), u(1), u(2)}; }
  CmdVec to_vector() const { return CmdVec(thrust, tau_x, tau_y); }
};

struct RobotParams {
  double mass = 8.0e-4;                              // kg
  Vec3 inertia = Vec3(4.38e-8, 4.38e-8, 8.76e-8);    // kg*m^2, body-diagonal
  double l_x = 0.015;                                // roll moment arm, m
  double l_y = 0.015;                                // pitch moment arm, m
  double c_d_tra = 2.0e-3;                           // N*s/m
  double c_d_rot = 6.0e-9;                           // N*m*s^2/rad^2
  double gravity = 9.81;                             // m/s^2

  double hover_thrust() const { return mass * gravity; }
  void validate() const;  // throws std::invalid_argument on nonsense values
};

// Box bounds on a command vector, used both for the plant-side feasible set
// and for the tightened reference set.
struct CmdBounds {
  CmdVec lo = CmdVec(0.0, -6.0e-5, -6.0e-5);
  CmdVec hi = CmdVec(1.5e-2, 6.0e-5, 6.0e-5);

  bool contains(const CmdVec& u, double tol = 0.0) const;
  CmdVec clip(const CmdVec& u) const;
  void validate() const;
};

}  // namespace fwmpc
