#pragma once

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Hamilton product a*b, scalar-first storage.
Quat quat_multiply(const Quat& a, const Quat& b);

Quat quat_conjugate(const Quat& q);

Quat quat_normalize(const Quat& q);

// Body-to-world rotation matrix. Throws if |norm(q) - 1| > 1e-6; the input is
// renormalized before use so the result is orthonormal to machine precision.
Mat3 quat_to_rotmat(const Quat& q);

// Inverse of quat_to_rotmat (Shepperd's method), returns the representative
// with non-negative scalar part.
Quat rotmat_to_quat(const Mat3& R);

Quat quat_from_axis_angle(const Vec3& axis, double angle);

// Exact attitude advance under constant body rate over dt.
Quat quat_integrate_constant_rate(const Quat& q, const Vec3& w, double dt);

// Rotation angle between two attitudes, in [0, pi].
double quat_angular_distance(const Quat& a, const Quat& b);

// Modified Rodrigues parameter of the error rotation q relative to q_ref:
// e = vec(dq) / (1 + w(dq)) with dq = conj(q_ref) * q, switched to the shadow
// set when w(dq) < 0 so that norm(e) <= 1 always (e = tan(theta/4) * axis).
Vec3 attitude_error_mrp(const Quat& q, const Quat& q_ref);

// Inverse of attitude_error_mrp for the principal set: returns dq with
// non-negative scalar part.
Quat mrp_to_quat(const Vec3& e);

// Jacobian of attitude_error_mrp with respect to the raw quaternion q,
// holding q_ref fixed (3x4, includes the shadow-set branch).
Eigen::Matrix<double, 3, 4> attitude_error_mrp_jacobian(const Quat& q, const Quat& q_ref);

// Quaternion rate matrix: qdot = 0.5 * omega_matrix(w) * q for body rate w.
Mat4 omega_matrix(const Vec3& w);

// Matrix L(a) with a*b = L(a)*b under the Hamilton product.
Mat4 quat_left_matrix(const Quat& a);

Mat3 skew(const Vec3& v);

}  // namespace fwmpc
