#include "fwmpc/sim/actuator_chain.hpp"

#include <cmath>
#include <stdexcept>

namespace fwmpc {

double ActuatorChain::Biquad::step(double x) {
  const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
  x2 = x1;
  x1 = x;
  y2 = y1;
  y1 = y;
  return y;
}

void ActuatorChain::Biquad::prime(double v) { x1 = x2 = y1 = y2 = v; }

ActuatorChain::ActuatorChain(const ActuatorCalibration& true_cal, double cutoff_hz, double delay_s,
                             double dt, bool bypass_filter)
    : cal_(true_cal), bypass_(bypass_filter), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ActuatorChain: dt must be positive");
  if (!(cutoff_hz > 0.0)) throw std::invalid_argument("ActuatorChain: cutoff must be positive");
  if (delay_s < 0.0) throw std::invalid_argument("ActuatorChain: delay must be non-negative");
  if (cutoff_hz >= 0.5 / dt) {
    throw std::invalid_argument("ActuatorChain: cutoff must be below the Nyquist rate");
  }

  // prewarped bilinear transform of w^2 / (s^2 + sqrt(2) w s + w^2)
  const double w = 2.0 * M_PI * cutoff_hz;
  const double K = w / std::tan(0.5 * w * dt);
  const double a0 = K * K + std::sqrt(2.0) * w * K + w * w;
  Biquad bq;
  bq.b0 = w * w / a0;
  bq.b1 = 2.0 * bq.b0;
  bq.b2 = bq.b0;
  bq.a1 = 2.0 * (w * w - K * K) / a0;
  bq.a2 = (K * K - std::sqrt(2.0) * w * K + w * w) / a0;
  filt_.fill(bq);

  const int d = static_cast<int>(std::lround(delay_s / dt));
  for (auto& line : delay_) line.assign(std::max(d, 0) + 1, 0.0);
}

void ActuatorChain::init_steady(const std::array<double, 4>& forces) {
  for (int i = 0; i < 4; ++i) {
    filt_[i].prime(forces[i]);
    std::fill(delay_[i].begin(), delay_[i].end(), forces[i]);
    head_[i] = 0;
  }
}

std::array<double, 4> ActuatorChain::step(const std::array<double, 4>& v_amp) {
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const double v_lim = cal_.curves[i].v_max();
    const double v = std::min(std::max(v_amp[i], 0.0), v_lim);
    saturated_[i] = v_amp[i] > v_lim;
    const double f_sat = cal_.curves[i].force(v);
    const double f_fil = bypass_ ? f_sat : filt_[i].step(f_sat);
    last_sat_[i] = f_sat;
    last_fil_[i] = f_fil;
    auto& line = delay_[i];
    line[head_[i]] = f_fil;                 // write the newest sample
    head_[i] = (head_[i] + 1) % line.size();
    out[i] = line[head_[i]];                // read the oldest sample
  }
  return out;
}

double ActuatorChain::step_response_peak() const {
  Biquad bq = filt_[0];
  bq.x1 = bq.x2 = bq.y1 = bq.y2 = 0.0;
  double peak = 0.0;
  const int n = static_cast<int>(std::ceil(0.5 / (dt_ * 1.0)));  // 0.5 s is plenty at 40 Hz
  for (int i = 0; i < std::max(n, 10000); ++i) {
    peak = std::max(peak, bq.step(1.0));
  }
  return peak;
}

}  // namespace fwmpc
