#include "fwmpc/trajgen/flatness.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

FlatForce flat_force(const Vec3& v, const Vec3& a, const Vec3& j, const Vec3& s,
                     const RobotParams& prm) {
  const Vec3 g_vec(0.0, 0.0, prm.gravity);
  const Vec3 f = prm.mass * (a + g_vec) + prm.c_d_tra * v;
  const Vec3 fd = prm.mass * j + prm.c_d_tra * a;
  const Vec3 fdd = prm.mass * s + prm.c_d_tra * j;

  const double F = f.norm();
  if (F < 1e-6) {
    throw std::runtime_error("flat_force: demanded thrust vanishes, trajectory too aggressive");
  }
  const Vec3 z = f / F;
  const double Fd = z.dot(fd);
  const Vec3 zd = (fd - Fd * z) / F;
  const double Fdd = zd.dot(fd) + z.dot(fdd);
  const Vec3 zdd = (fdd - Fdd * z - 2.0 * Fd * zd) / F;
  return {F, z, zd, zdd};
}

namespace {

// body rate demanded by the thrust-direction transport, zero yaw rate
Vec3 frame_rate(const Mat3& R, const Vec3& z_rate) {
  return Vec3(-R.col(1).dot(z_rate), R.col(0).dot(z_rate), 0.0);
}

Quat initial_attitude(const Vec3& z_axis, double yaw) {
  const Vec3 xc(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 zn = z_axis.normalized();
  Vec3 y = zn.cross(xc);
  const double yn = y.norm();
  if (yn < 1e-8) {
    throw std::runtime_error("flatness: initial thrust direction is parallel to the heading");
  }
  y /= yn;
  const Vec3 x = y.cross(zn);
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = zn;
  return rotmat_to_quat(R);
}

}  // namespace

ReferenceTrajectory flat_to_reference(const PiecewisePolynomial& poly, const RobotParams& prm,
                                      const FlatnessOptions& opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("flat_to_reference: dt must be positive");
  if (opt.frame_substeps < 2 || opt.frame_substeps % 2 != 0) {
    throw std::invalid_argument("flat_to_reference: frame_substeps must be even and >= 2");
  }
  if (opt.pad_before < 0.0 || opt.pad_after < 0.0) {
    throw std::invalid_argument("flat_to_reference: pads must be non-negative");
  }

  const double T = poly.total_duration();
  const int n_main = static_cast<int>(std::lround(T / opt.dt));
  if (std::abs(n_main * opt.dt - T) > 1e-9) {
    throw std::invalid_argument("flat_to_reference: total duration must be a multiple of dt");
  }
  const int n_pre = static_cast<int>(std::lround(opt.pad_before / opt.dt));
  const int n_post = static_cast<int>(std::lround(opt.pad_after / opt.dt));

  auto force_at = [&](double t) {
    return flat_force(poly.eval(t, 1), poly.eval(t, 2), poly.eval(t, 3), poly.eval(t, 4), prm);
  };

  // integrate the attitude on a fine grid; record states at sample times and
  // inputs at interval midpoints
  const int nf = opt.frame_substeps;
  const double h = opt.dt / nf;

  Quat q = initial_attitude(force_at(0.0).z_axis, opt.yaw);

  ReferenceTrajectory ref;
  ref.dt = opt.dt;
  const int n_total = n_pre + n_main + n_post;
  ref.states.reserve(n_total + 1);
  ref.inputs.reserve(n_total + 1);
  ref.body_x.reserve(n_total + 1);

  const RobotState hover_start(poly.eval(0.0), Vec3::Zero(), q, Vec3::Zero());
  const Command hover_cmd(force_at(0.0).F, 0.0, 0.0);
  for (int i = 0; i < n_pre; ++i) {
    ref.states.push_back(hover_start);
    ref.inputs.push_back(hover_cmd);
    ref.body_x.push_back(quat_to_rotmat(q).col(0));
  }

  auto torque_at = [&](const Quat& qi, double t) {
    const Mat3 R = quat_to_rotmat(qi);
    const FlatForce ff = force_at(t);
    const Vec3 w = frame_rate(R, ff.z_axis_rate);
    const Vec3 wdot(-R.col(1).dot(ff.z_axis_accel), R.col(0).dot(ff.z_axis_accel), 0.0);
    const Vec3 Iw = prm.inertia.cwiseProduct(w);
    const Vec3 tau = prm.inertia.cwiseProduct(wdot) + w.cross(Iw) + prm.c_d_rot * w.norm() * w;
    return std::pair<Vec3, Vec3>(tau, w);
  };

  for (int k = 0; k <= n_main; ++k) {
    const double t = k * opt.dt;
    const FlatForce ff = force_at(t);
    const Mat3 R = quat_to_rotmat(q);
    const Vec3 w = frame_rate(R, ff.z_axis_rate);
    ref.states.emplace_back(poly.eval(t), poly.eval(t, 1), q, w);
    ref.body_x.push_back(R.col(0));

    if (k == n_main) break;

    // advance to the midpoint, record the input there, then to the next sample
    Quat qi = q;
    Command u_mid;
    for (int s = 0; s < nf; ++s) {
      if (s == nf / 2) {
        const double tm = t + 0.5 * opt.dt;
        auto [tau, wm] = torque_at(qi, tm);
        (void)wm;
        u_mid = Command(force_at(tm).F, tau(0), tau(1));
      }
      const double ts = t + s * h;
      // RK4 on the quaternion with state-dependent rate
      auto qdot = [&](const Quat& qq, double tt) {
        const Mat3 Rq = quat_to_rotmat(quat_normalize(qq));
        return (0.5 * omega_matrix(frame_rate(Rq, force_at(tt).z_axis_rate)) * qq).eval();
      };
      const Quat k1 = qdot(qi, ts);
      const Quat k2 = qdot(qi + 0.5 * h * k1, ts + 0.5 * h);
      const Quat k3 = qdot(qi + 0.5 * h * k2, ts + 0.5 * h);
      const Quat k4 = qdot(qi + h * k3, ts + h);
      qi = quat_normalize(qi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    ref.inputs.push_back(u_mid);
    q = qi;

    // guard against secular drift of the integrated thrust axis
    const Vec3 z_now = quat_to_rotmat(q).col(2);
    if ((z_now - force_at(t + opt.dt).z_axis).norm() > 1e-4) {
      throw std::runtime_error("flat_to_reference: attitude integration drifted off the thrust axis");
    }
  }

  const RobotState& last = ref.states.back();
  const Command hover_end(force_at(T).F, 0.0, 0.0);
  for (int i = 0; i < n_post; ++i) {
    ref.states.push_back(last);
    ref.inputs.push_back(hover_end);
    ref.body_x.push_back(quat_to_rotmat(last.q).col(0));
  }

  // last input duplicates its predecessor so clamped lookups stay harmless
  ref.inputs.push_back(ref.inputs.back());
  ref.validate();
  return ref;
}

void check_reference_feasible(const ReferenceTrajectory& ref, const CmdBounds& bounds) {
  double worst = 0.0;
  int worst_idx = -1;
  int worst_comp = -1;
  for (int i = 0; i < ref.size(); ++i) {
    const CmdVec u = ref.input_at(i).to_vector();
    for (int j = 0; j < 3; ++j) {
      const double viol = std::max(bounds.lo(j) - u(j), u(j) - bounds.hi(j));
      if (viol > worst) {
        worst = viol;
        worst_idx = i;
        worst_comp = j;
      }
    }
  }
  if (worst > 0.0) {
    std::ostringstream msg;
    msg << "reference infeasible: input component " << worst_comp << " at sample " << worst_idx
        << " (t=" << worst_idx * ref.dt << "s) exceeds its bound by " << worst;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace fwmpc
