#include "fwmpc/sim/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

namespace {
constexpr int kSmoothWindow = 5;  // samples, centered

Vec3 ref_position(const ReferenceTrajectory& ref, double t) {
  const double s = t / ref.dt;
  const int i0 = ref.clamp_index(static_cast<int>(std::floor(s)));
  const int i1 = ref.clamp_index(i0 + 1);
  const double a = std::min(std::max(s - i0, 0.0), 1.0);
  return (1.0 - a) * ref.state_at(i0).p + a * ref.state_at(i1).p;
}
}  // namespace

MetricsReport compute_metrics(const SimTrace& trace, const ReferenceTrajectory& ref, double t0,
                              double t1) {
  if (trace.steps.empty()) throw std::invalid_argument("compute_metrics: empty trace");
  if (!(t1 > t0)) throw std::invalid_argument("compute_metrics: window must have positive length");
  const double dt = trace.dt;
  const int n = static_cast<int>(trace.steps.size());
  const int k0 = std::max(0, static_cast<int>(std::ceil(t0 / dt - 1e-9)));
  const int k1 = std::min(n - 1, static_cast<int>(std::floor(t1 / dt + 1e-9)));
  if (k1 - k0 < 2) throw std::invalid_argument("compute_metrics: window holds too few samples");

  MetricsReport rep;
  rep.window_t0 = trace.steps[k0].t;
  rep.window_t1 = trace.steps[k1].t;

  double sum_lat = 0.0, sum_alt = 0.0;
  for (int k = k0; k <= k1; ++k) {
    const Vec3 e = trace.steps[k].truth.p - ref_position(ref, trace.steps[k].t);
    sum_lat += e.x() * e.x() + e.y() * e.y();
    sum_alt += e.z() * e.z();
    const Mat3 R = quat_to_rotmat(trace.steps[k].truth.q);
    const double tilt = std::acos(std::min(std::max(R(2, 2), -1.0), 1.0));
    rep.max_body_deviation_deg = std::max(rep.max_body_deviation_deg, tilt * 180.0 / M_PI);
    rep.max_angular_speed_dps =
        std::max(rep.max_angular_speed_dps, trace.steps[k].truth.w.norm() * 180.0 / M_PI);
    if (trace.steps[k].mode != SimMode::kTracking) rep.tube_breach = true;
  }
  const int m = k1 - k0 + 1;
  rep.rms_lateral_error = std::sqrt(sum_lat / m);
  rep.rms_altitude_error = std::sqrt(sum_alt / m);

  // moving-average smoothing of the whole position record, then central
  // differences inside the window
  std::vector<Vec3> smooth(n);
  const int hw = kSmoothWindow / 2;
  for (int k = 0; k < n; ++k) {
    Vec3 acc = Vec3::Zero();
    int cnt = 0;
    for (int j = std::max(0, k - hw); j <= std::min(n - 1, k + hw); ++j) {
      acc += trace.steps[j].truth.p;
      ++cnt;
    }
    smooth[k] = acc / cnt;
  }

  double speed_sum = 0.0;
  int speed_cnt = 0;
  for (int k = std::max(k0, 1); k <= std::min(k1, n - 2); ++k) {
    const Vec3 vel = (smooth[k + 1] - smooth[k - 1]) / (2.0 * dt);
    const Vec3 acc = (smooth[k + 1] - 2.0 * smooth[k] + smooth[k - 1]) / (dt * dt);
    rep.max_speed = std::max(rep.max_speed, vel.norm());
    rep.max_acceleration = std::max(rep.max_acceleration, acc.norm());
    speed_sum += vel.norm();
    ++speed_cnt;
  }
  if (speed_cnt > 0) rep.mean_speed = speed_sum / speed_cnt;
  return rep;
}

}  // namespace fwmpc
