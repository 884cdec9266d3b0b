#include "fwmpc/core/types.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

RobotState::RobotState(const Vec3& p_, const Vec3& v_, const Quat& q_, const Vec3& w_)
    : p(p_), v(v_), q(quat_normalize(q_)), w(w_) {}

RobotState RobotState::hover(const Vec3& position) {
  RobotState s;
  s.p = position;
  return s;
}

RobotState RobotState::from_vector(const StateVec& x) {
  RobotState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q = quat_normalize(x.segment<4>(6).eval());
  s.w = x.segment<3>(10);
  return s;
}

StateVec RobotState::to_vector() const {
  StateVec x;
  x.segment<3>(0) = p;
  x.segment<3>(3) = v;
  x.segment<4>(6) = q;
  x.segment<3>(10) = w;
  return x;
}

void RobotState::normalize_quat() { q = quat_normalize(q); }

bool RobotState::is_finite() const { return to_vector().allFinite(); }

void RobotParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("RobotParams: mass must be positive");
  }
  if (!(inertia.array() > 0.0).all() || !inertia.allFinite()) {
    throw std::invalid_argument("RobotParams: inertia diagonal must be positive");
  }
  if (!(l_x > 0.0) || !(l_y > 0.0)) {
    throw std::invalid_argument("RobotParams: moment arms must be positive");
  }
  if (c_d_tra < 0.0 || c_d_rot < 0.0) {
    throw std::invalid_argument("RobotParams: drag coefficients must be non-negative");
  }
  if (!(gravity >= 0.0) || !std::isfinite(gravity)) {
    throw std::invalid_argument("RobotParams: gravity must be non-negative");
  }
}

bool CmdBounds::contains(const CmdVec& u, double tol) const {
  return (u.array() >= lo.array() - tol).all() && (u.array() <= hi.array() + tol).all();
}

CmdVec CmdBounds::clip(const CmdVec& u) const {
  return u.cwiseMax(lo).cwiseMin(hi);
}

void CmdBounds::validate() const {
  if (!(lo.array() < hi.array()).all()) {
    throw std::invalid_argument("CmdBounds: lower bound must be below upper bound");
  }
}

}  // namespace fwmpc
