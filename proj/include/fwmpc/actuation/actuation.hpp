#pragma once

#include <array>
#include <vector>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Per-actuator voltage-to-force calibration, stored as a polynomial in the
// drive amplitude: f(V) = sum_k c_k V^k (force in N, amplitude in volts).
// Must be strictly increasing on [0, v_max].
class CalibrationCurve {
 public:
  CalibrationCurve() = default;
  CalibrationCurve(std::vector<double> coeffs, double v_max);

  double force(double v_amp) const;            // v2f
  double amplitude(double force_n) const;      // f2v, monotone numeric inversion
  double v_max() const { return v_max_; }
  double max_force() const { return force(v_max_); }
  const std::vector<double>& coeffs() const { return coeffs_; }

  // Quadratic curve f = c2 V^2, the usual fit shape for flapping actuators.
  static CalibrationCurve quadratic(double c2, double v_max);

 private:
  std::vector<double> coeffs_{0.0, 0.0, 2.2e-9};
  double v_max_ = 1500.0;
};

struct ActuatorCalibration {
  std::array<CalibrationCurve, 4> curves;
  static ActuatorCalibration nominal();
  // Each actuator's curve scaled by its own factor (models calibration error).
  ActuatorCalibration scaled(const std::array<double, 4>& factors) const;
};

struct AllocationResult {
  std::array<double, 4> forces{};  // per-actuator mean forces, N
  std::array<double, 4> delta{};   // differential components
  double f_ini = 0.0;              // thrust split four ways
  double f_ini_adj = 0.0;          // after the non-negativity adjustment
  bool lifted = false;             // adjustment changed the common mode
};

enum class AllocationMode {
  kCorrected,  // f_ini' = max(f_ini, -min_i delta_i): forces >= 0, torques exact
  kLiteral,    // f_ini' = max(f_ini + min_i delta_i, 0), then clip at zero
};

// Splits a collective thrust and roll/pitch torque command into four actuator
// forces, compensating the current external torque estimate. Geometry: the
// actuators sit at (-+l_x, -+l_y) corners; signs follow the effective wrench
// map below.
AllocationResult allocate(double thrust, double tau_x, double tau_y, const Vec2& tau_ext_xy,
                          const RobotParams& params,
                          AllocationMode mode = AllocationMode::kCorrected);

// Wrench produced by four actuator forces: total thrust and roll/pitch torque.
CmdVec effective_wrench(const std::array<double, 4>& forces, const RobotParams& params);

// Instantaneous drive voltage at time t for a given amplitude; sinusoidal
// carrier shaped so the mean-square voltage over a period is v_amp^2 / 2.
double drive_waveform(double t, double v_amp, double carrier_hz);

}  // namespace fwmpc
