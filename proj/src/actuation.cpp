#include "fwmpc/actuation/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fwmpc {

CalibrationCurve::CalibrationCurve(std::vector<double> coeffs, double v_max)
    : coeffs_(std::move(coeffs)), v_max_(v_max) {
  if (coeffs_.empty()) throw std::invalid_argument("CalibrationCurve: no coefficients");
  if (!(v_max_ > 0.0)) throw std::invalid_argument("CalibrationCurve: v_max must be positive");
  // strict monotonicity on the working range, checked on a dense grid
  double prev = force(0.0);
  for (int i = 1; i <= 256; ++i) {
    const double f = force(v_max_ * i / 256.0);
    if (!(f > prev)) {
      throw std::invalid_argument("CalibrationCurve: force map is not strictly increasing");
    }
    prev = f;
  }
}

double CalibrationCurve::force(double v_amp) const {
  double f = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) f = f * v_amp + *it;
  return f;
}

double CalibrationCurve::amplitude(double force_n) const {
  if (force_n < 0.0) throw std::invalid_argument("CalibrationCurve: negative force request");
  const double f0 = force(0.0);
  if (force_n <= f0) return 0.0;
  // expand the bracket past v_max if needed; the actuator chain saturates later
  double hi = v_max_;
  while (force(hi) < force_n) {
    hi *= 2.0;
    if (hi > 1e7) throw std::runtime_error("CalibrationCurve: force out of invertible range");
  }
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (force(mid) < force_n) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CalibrationCurve CalibrationCurve::quadratic(double c2, double v_max) {
  return CalibrationCurve({0.0, 0.0, c2}, v_max);
}

ActuatorCalibration ActuatorCalibration::nominal() {
  ActuatorCalibration cal;
  // deliberately distinct constants so no symmetry hides indexing mistakes
  cal.curves = {CalibrationCurve::quadratic(2.05e-9, 1500.0),
                CalibrationCurve::quadratic(2.20e-9, 1500.0),
                CalibrationCurve::quadratic(2.35e-9, 1500.0),
                CalibrationCurve::quadratic(2.10e-9, 1500.0)};
  return cal;
}

ActuatorCalibration ActuatorCalibration::scaled(const std::array<double, 4>& factors) const {
  ActuatorCalibration out;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> c = curves[i].coeffs();
    for (double& ck : c) ck *= factors[i];
    out.curves[i] = CalibrationCurve(std::move(c), curves[i].v_max());
  }
  return out;
}

AllocationResult allocate(double thrust, double tau_x, double tau_y, const Vec2& tau_ext_xy,
                          const RobotParams& params, AllocationMode mode) {
  if (!std::isfinite(thrust) || !std::isfinite(tau_x) || !std::isfinite(tau_y)) {
    throw std::invalid_argument("allocate: non-finite command");
  }
  if (thrust < 0.0) throw std::invalid_argument("allocate: negative thrust command");

  const double ux = 0.25 * (tau_x - tau_ext_xy(0)) / params.l_x;
  const double uy = 0.25 * (tau_y - tau_ext_xy(1)) / params.l_y;

  AllocationResult r;
  r.delta = {-ux - uy, ux - uy, ux + uy, -ux + uy};
  r.f_ini = 0.25 * thrust;

  const double dmin = *std::min_element(r.delta.begin(), r.delta.end());
  if (mode == AllocationMode::kCorrected) {
    r.f_ini_adj = std::max(r.f_ini, -dmin);
  } else {
    r.f_ini_adj = std::max(r.f_ini + dmin, 0.0);
  }
  r.lifted = r.f_ini_adj != r.f_ini;

  for (int i = 0; i < 4; ++i) {
    double f = r.f_ini_adj + r.delta[i];
    if (mode == AllocationMode::kLiteral) f = std::max(f, 0.0);
    r.forces[i] = f;
  }
  return r;
}

CmdVec effective_wrench(const std::array<double, 4>& forces, const RobotParams& params) {
  const double f1 = forces[0], f2 = forces[1], f3 = forces[2], f4 = forces[3];
  CmdVec w;
  w(0) = f1 + f2 + f3 + f4;
  w(1) = params.l_x * (-f1 + f2 + f3 - f4);
  w(2) = params.l_y * (-f1 - f2 + f3 + f4);
  return w;
}

double drive_waveform(double t, double v_amp, double carrier_hz) {
  const double s = std::sin(2.0 * M_PI * carrier_hz * t);
  return v_amp * std::sqrt(0.5 * (s + 1.0));
}

}  // namespace fwmpc
