#pragma once

#include <string>
#include <vector>

#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/trajgen/trajectory.hpp"

namespace fwmpc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb2";
  bool dashed = false;
};

// Self-contained line plot. Emission is side-effect-only: nothing downstream
// reads these files back.
void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series,
                    int width = 760, int height = 300);

// The standard three panels for a flight: position components vs reference,
// speed, and body-deviation angle. Writes <prefix>_position.svg, _speed.svg
// and _angles.svg.
void write_flight_plots(const std::string& prefix, const SimTrace& trace,
                        const ReferenceTrajectory& ref);

}  // namespace fwmpc
