#include "fwmpc/tube/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

Mat3 frame_align(const Mat3& R, const Vec3& r1) {
  if (!R.allFinite() || !r1.allFinite()) throw std::invalid_argument("frame_align: non-finite input");
  const Vec3 z = R.col(2);
  Vec3 y = z.cross(r1);
  const double n = y.norm();
  if (n < 1e-8) {
    throw std::invalid_argument("frame_align: body z axis is parallel to the reference heading");
  }
  y /= n;
  const Vec3 x = y.cross(z);
  Mat3 T;
  T.col(0) = x;
  T.col(1) = y;
  T.col(2) = z;
  return T * R.transpose();
}

AltStateVec to_alternative_state(const RobotState& s, const Mat3& R_match) {
  const Mat3 R = quat_to_rotmat(s.q);
  const Mat3 Rm = R_match * R;
  auto ang = [](double c) { return std::acos(std::clamp(c, -1.0, 1.0)); };
  AltStateVec x;
  x.segment<3>(0) = s.p;
  x.segment<3>(3) = s.v;
  x.segment<3>(6) = Vec3(ang(Rm(0, 2)), ang(Rm(1, 2)), ang(Rm(2, 2)));
  x.segment<3>(9) = Rm.transpose() * (R * s.w);
  return x;
}

AltStateVec to_alternative_state(const RobotState& s, const Vec3& r1) {
  return to_alternative_state(s, frame_align(quat_to_rotmat(s.q), r1));
}

}  // namespace fwmpc
