#include "fwmpc/learning/policy_frame.hpp"

#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/tube/frame.hpp"

namespace fwmpc {

PolicyFrame make_policy_frame(const RobotState& s, const Vec3& r1_ref) {
  PolicyFrame f;
  f.R = quat_to_rotmat(s.q);
  f.M = frame_align(f.R, r1_ref);
  return f;
}

PolicyInVec encode_policy_input(const RobotState& s, const PolicyFrame& f, double t,
                                double t_total) {
  if (!(t_total > 0.0)) throw std::invalid_argument("encode_policy_input: t_total must be positive");
  const Mat3 T = f.M * f.R;
  Quat q_nn = rotmat_to_quat(T);  // scalar part already >= 0
  const Vec3 w_nn = T.transpose() * (f.R * s.w);
  PolicyInVec x;
  x.segment<3>(0) = s.p;
  x.segment<3>(3) = s.v;
  x.segment<4>(6) = q_nn;
  x.segment<3>(10) = w_nn;
  x(13) = t / t_total;
  return x;
}

Vec3 aligned_target_from_command(const CmdVec& u, const PolicyFrame& f) {
  const Mat3 T = f.M * f.R;
  const Vec3 tau_aligned = T.transpose() * (f.R * Vec3(u(1), u(2), 0.0));
  return Vec3(u(0), tau_aligned(0), tau_aligned(1));
}

CmdVec command_from_aligned_output(const Vec3& y, const PolicyFrame& f) {
  const Mat3 T = f.M * f.R;
  const Vec3 tau_body = f.R.transpose() * (T * Vec3(y(1), y(2), 0.0));
  return CmdVec(y(0), tau_body(0), tau_body(1));
}

}  // namespace fwmpc
