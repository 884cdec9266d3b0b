#include "fwmpc/core/quat.hpp"

#include <cmath>
#include <stdexcept>

namespace fwmpc {

Quat quat_multiply(const Quat& a, const Quat& b) {
  const double aw = a(0);
  const Vec3 av = a.tail<3>();
  const double bw = b(0);
  const Vec3 bv = b.tail<3>();
  Quat out;
  out(0) = aw * bw - av.dot(bv);
  out.tail<3>() = aw * bv + bw * av + av.cross(bv);
  return out;
}

Quat quat_conjugate(const Quat& q) { return Quat(q(0), -q(1), -q(2), -q(3)); }

Quat quat_normalize(const Quat& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("quat_normalize: zero or non-finite quaternion");
  }
  return q / n;
}

Mat3 quat_to_rotmat(const Quat& q_in) {
  const double n = q_in.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("quat_to_rotmat: quaternion norm deviates from 1 beyond 1e-6");
  }
  const Quat q = q_in / n;
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Mat3 R;
  R << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return R;
}

Quat rotmat_to_quat(const Mat3& R) {
  Quat q;
  const double tr = R.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q(0) = 0.25 * s;
    q(1) = (R(2, 1) - R(1, 2)) / s;
    q(2) = (R(0, 2) - R(2, 0)) / s;
    q(3) = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;
    q(0) = (R(2, 1) - R(1, 2)) / s;
    q(1) = 0.25 * s;
    q(2) = (R(0, 1) + R(1, 0)) / s;
    q(3) = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;
    q(0) = (R(0, 2) - R(2, 0)) / s;
    q(1) = (R(0, 1) + R(1, 0)) / s;
    q(2) = 0.25 * s;
    q(3) = (R(1, 2) + R(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;
    q(0) = (R(1, 0) - R(0, 1)) / s;
    q(1) = (R(0, 2) + R(2, 0)) / s;
    q(2) = (R(1, 2) + R(2, 1)) / s;
    q(3) = 0.25 * s;
  }
  if (q(0) < 0.0) q = -q;
  return quat_normalize(q);
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-12) {
    if (std::abs(angle) < 1e-12) return Quat(1, 0, 0, 0);
    throw std::invalid_argument("quat_from_axis_angle: zero axis with nonzero angle");
  }
  Quat q;
  q(0) = std::cos(0.5 * angle);
  q.tail<3>() = std::sin(0.5 * angle) * (axis / n);
  return q;
}

Quat quat_integrate_constant_rate(const Quat& q, const Vec3& w, double dt) {
  const double wn = w.norm();
  if (wn * dt < 1e-14) return q;
  return quat_normalize(quat_multiply(q, quat_from_axis_angle(w, wn * dt).eval()));
}

double quat_angular_distance(const Quat& a, const Quat& b) {
  const Quat d = quat_multiply(quat_conjugate(quat_normalize(a)), quat_normalize(b));
  return 2.0 * std::atan2(d.tail<3>().norm(), std::abs(d(0)));
}

Vec3 attitude_error_mrp(const Quat& q, const Quat& q_ref) {
  Quat dq = quat_multiply(quat_conjugate(quat_normalize(q_ref)), quat_normalize(q));
  if (dq(0) < 0.0) dq = -dq;  // shadow set keeps norm(e) <= 1
  return dq.tail<3>() / (1.0 + dq(0));
}

Quat mrp_to_quat(const Vec3& e) {
  const double s = e.squaredNorm();
  Quat q;
  q(0) = (1.0 - s) / (1.0 + s);
  q.tail<3>() = 2.0 * e / (1.0 + s);
  return q;
}

Eigen::Matrix<double, 3, 4> attitude_error_mrp_jacobian(const Quat& q, const Quat& q_ref) {
  // dq = L(conj(q_ref)) * normalize(q) and e = sgn * vec(dq) / (1 + sgn * w(dq));
  // the projector accounts for the internal normalization of q.
  const double n = q.norm();
  const Quat qh = q / n;
  const Mat4 L = quat_left_matrix(quat_conjugate(quat_normalize(q_ref)));
  const Quat dq_raw = L * qh;
  const double sgn = dq_raw(0) < 0.0 ? -1.0 : 1.0;
  const double w = sgn * dq_raw(0);
  const Vec3 v = sgn * dq_raw.tail<3>();
  const double den = 1.0 + w;
  Eigen::Matrix<double, 3, 4> de_ddq;
  de_ddq.col(0) = -v / (den * den);
  de_ddq.rightCols<3>() = Mat3::Identity() / den;
  const Mat4 proj = (Mat4::Identity() - qh * qh.transpose()) / n;
  return sgn * de_ddq * L * proj;
}

Mat4 omega_matrix(const Vec3& w) {
  const double wx = w(0), wy = w(1), wz = w(2);
  Mat4 m;
  m <<  0.0, -wx, -wy, -wz,
        wx,  0.0,  wz, -wy,
        wy, -wz,  0.0,  wx,
        wz,  wy, -wx,  0.0;
  return m;
}

Mat4 quat_left_matrix(const Quat& a) {
  const double w = a(0), x = a(1), y = a(2), z = a(3);
  Mat4 L;
  L << w, -x, -y, -z,
       x,  w, -z,  y,
       y,  z,  w, -x,
       z, -y,  x,  w;
  return L;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m <<     0, -v(2),  v(1),
        v(2),     0, -v(0),
       -v(1),  v(0),     0;
  return m;
}

}  // namespace fwmpc
