#pragma once

#include <array>
#include <vector>

#include "fwmpc/actuation/actuation.hpp"

namespace fwmpc {

// Per-actuator drive electronics and aerodynamic lag: amplitude saturation
// against the true calibration, a second-order Butterworth low-pass
// (prewarped bilinear discretization) and a pure transport delay on the
// produced force.
class ActuatorChain {
 public:
  ActuatorChain(const ActuatorCalibration& true_cal, double cutoff_hz, double delay_s, double dt,
                bool bypass_filter = false);

  // Prime filter and delay states with steady forces (e.g. hover split).
  void init_steady(const std::array<double, 4>& forces);

  // Advance one sim step with the currently latched amplitudes; returns the
  // force each actuator actually produces during this step.
  std::array<double, 4> step(const std::array<double, 4>& v_amp);

  const std::array<bool, 4>& saturated() const { return saturated_; }
  // Stage taps from the most recent step(), for trace logging.
  const std::array<double, 4>& last_saturated() const { return last_sat_; }
  const std::array<double, 4>& last_filtered() const { return last_fil_; }
  double step_response_peak() const;  // of the filter alone, unit step

 private:
  struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;  // normalized, a0 = 1
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    double step(double x);
    void prime(double v);
  };

  ActuatorCalibration cal_;
  bool bypass_;
  std::array<Biquad, 4> filt_;
  std::array<std::vector<double>, 4> delay_;
  std::array<size_t, 4> head_{};
  std::array<bool, 4> saturated_{};
  std::array<double, 4> last_sat_{};
  std::array<double, 4> last_fil_{};
  double dt_;
};

}  // namespace fwmpc
