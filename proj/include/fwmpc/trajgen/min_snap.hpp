#pragma once

#include <vector>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Piecewise 7th-order polynomial in R^3 with per-segment normalized time.
// Minimizes the integrated squared snap subject to waypoint interpolation,
// zero boundary velocity/acceleration/jerk and continuity of derivatives
// 1..4 at interior knots.
class PiecewisePolynomial {
 public:
  static constexpr int kOrder = 7;
  static constexpr int kCoeffs = kOrder + 1;

  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<Eigen::Matrix<double, 3, kCoeffs>> coeffs,
                      std::vector<double> durations);

  // deriv = 0..4: position through snap, in real time units
  Vec3 eval(double t, int deriv = 0) const;
  double total_duration() const;
  int segment_count() const { return static_cast<int>(coeffs_.size()); }

 private:
  std::vector<Eigen::Matrix<double, 3, kCoeffs>> coeffs_;
  std::vector<double> durations_;
  std::vector<double> knots_;  // cumulative start times
};

// Solves the minimum-snap interpolation problem through the waypoints.
// durations.size() must equal waypoints.size() - 1, all positive.
PiecewisePolynomial min_snap(const std::vector<Vec3>& waypoints,
                             const std::vector<double>& durations);

}  // namespace fwmpc
