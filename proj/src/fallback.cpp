#include "fwmpc/sim/fallback.hpp"

#include <algorithm>
#include <cmath>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

namespace {

// PD torque that rotates body z toward the target direction (world frame),
// yaw left alone. Classic SO(3) reduced-attitude law.
Vec3 tilt_pd(const Mat3& R, const Vec3& z_des_world, const Vec3& w, const FallbackGains& g) {
  const Vec3 z_b = R.col(2);
  // rotation error resolved in the body frame
  const Vec3 e = R.transpose() * z_b.cross(z_des_world);
  Vec3 tau = g.att_kp * e - g.att_kd * w;
  tau(2) = 0.0;
  return tau;
}

}  // namespace

Command attitude_fallback(const RobotState& s, const RobotParams& params,
                          const FallbackGains& gains, const CmdBounds& bounds) {
  const Mat3 R = quat_to_rotmat(s.q);
  const Vec3 tau = tilt_pd(R, Vec3::UnitZ(), s.w, gains);
  const double thrust = params.mass * params.gravity / std::max(R(2, 2), 0.5);
  return Command::from_vector(bounds.clip(CmdVec(thrust, tau(0), tau(1))));
}

Command position_fallback(const RobotState& s, const Vec3& hold, const RobotParams& params,
                          const FallbackGains& gains, const CmdBounds& bounds) {
  Vec3 a_des = gains.pos_kp * (hold - s.p) - gains.pos_kd * s.v;
  a_des(2) -= gains.pos_kd * 0.0;  // vertical target speed handled via hold point
  if (a_des.norm() > gains.max_accel) a_des *= gains.max_accel / a_des.norm();

  const Vec3 f_vec = params.mass * (a_des + Vec3(0, 0, params.gravity)) + params.c_d_tra * s.v;
  const double F = std::max(f_vec.norm(), 1e-6);
  const Vec3 z_des = f_vec / F;

  const Mat3 R = quat_to_rotmat(s.q);
  const Vec3 tau = tilt_pd(R, z_des, s.w, gains);
  return Command::from_vector(bounds.clip(CmdVec(F, tau(0), tau(1))));
}

}  // namespace fwmpc
