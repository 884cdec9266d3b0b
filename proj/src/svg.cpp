#include "fwmpc/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"

namespace fwmpc {

namespace {

constexpr int kMaxPointsPerSeries = 2000;

std::string num(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series, int width,
                    int height) {
  Extent ex, ey;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series length mismatch");
    for (double v : s.x) ex.take(v);
    for (double v : s.y) ey.take(v);
  }
  ex.pad();
  ey.pad();

  const double ml = 56, mr = 14, mt = 26, mb = 40;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - ex.lo) / (ex.hi - ex.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ey.lo) / (ey.hi - ey.lo) * ph; };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  f << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  f << "<text x=\"" << ml << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">" << title
    << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = ex.lo + i * (ex.hi - ex.lo) / 5.0;
    const double gx = px(xv);
    f << "<line x1=\"" << num(gx) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(gx) << "\" y2=\""
      << num(mt + ph) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    f << "<text x=\"" << num(gx) << "\" y=\"" << num(mt + ph + 16)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << num(xv, "%.3g")
      << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double yv = ey.lo + i * (ey.hi - ey.lo) / 4.0;
    const double gy = py(yv);
    f << "<line x1=\"" << num(ml) << "\" y1=\"" << num(gy) << "\" x2=\"" << num(ml + pw)
      << "\" y2=\"" << num(gy) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    f << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(gy + 3)
      << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << num(yv, "%.3g")
      << "</text>\n";
  }
  f << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  f << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(height - 8)
    << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << x_label
    << "</text>\n";
  f << "<text x=\"14\" y=\"" << num(mt + ph / 2)
    << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << num(mt + ph / 2) << ")\">" << y_label << "</text>\n";

  for (const auto& s : series) {
    const int n = static_cast<int>(s.x.size());
    if (n == 0) continue;
    const int stride = std::max(1, (n + kMaxPointsPerSeries - 1) / kMaxPointsPerSeries);
    f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\"";
    if (s.dashed) f << " stroke-dasharray=\"5 4\"";
    f << " points=\"";
    for (int i = 0; i < n; i += stride) {
      f << num(px(s.x[i]), "%.2f") << ',' << num(py(s.y[i]), "%.2f") << ' ';
    }
    if ((n - 1) % stride != 0) {
      f << num(px(s.x[n - 1]), "%.2f") << ',' << num(py(s.y[n - 1]), "%.2f");
    }
    f << "\"/>\n";
  }

  double ly = mt + 14;
  for (const auto& s : series) {
    f << "<line x1=\"" << num(ml + pw - 118) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
      << num(ml + pw - 98) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"5 4\"" : "") << "/>\n";
    f << "<text x=\"" << num(ml + pw - 92) << "\" y=\"" << num(ly)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << s.label << "</text>\n";
    ly += 14;
  }
  f << "</svg>\n";
  if (!f) throw std::runtime_error("write failed: " + path);
}

void write_flight_plots(const std::string& prefix, const SimTrace& trace,
                        const ReferenceTrajectory& ref) {
  const int n = static_cast<int>(trace.steps.size());
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = trace.steps[i].t;

  const char* axis_color[3] = {"#c23b3b", "#2e8b57", "#1f6fb2"};
  const char* axis_name[3] = {"x", "y", "z"};
  std::vector<PlotSeries> pos;
  for (int a = 0; a < 3; ++a) {
    PlotSeries s;
    s.label = axis_name[a];
    s.color = axis_color[a];
    s.x = t;
    s.y.resize(n);
    for (int i = 0; i < n; ++i) s.y[i] = trace.steps[i].truth.p(a);
    pos.push_back(std::move(s));
  }
  for (int a = 0; a < 3; ++a) {
    PlotSeries s;
    s.label = std::string(axis_name[a]) + " ref";
    s.color = axis_color[a];
    s.dashed = true;
    s.x.resize(ref.size());
    s.y.resize(ref.size());
    for (int i = 0; i < ref.size(); ++i) {
      s.x[static_cast<size_t>(i)] = i * ref.dt;
      s.y[static_cast<size_t>(i)] = ref.states[i].p(a);
    }
    pos.push_back(std::move(s));
  }
  write_svg_plot(prefix + "_position.svg", "position", "t [s]", "position [m]", pos);

  PlotSeries speed;
  speed.label = "|v|";
  speed.x = t;
  speed.y.resize(n);
  for (int i = 0; i < n; ++i) speed.y[i] = trace.steps[i].truth.v.norm();
  PlotSeries speed_ref;
  speed_ref.label = "|v| ref";
  speed_ref.dashed = true;
  speed_ref.x.resize(ref.size());
  speed_ref.y.resize(ref.size());
  for (int i = 0; i < ref.size(); ++i) {
    speed_ref.x[static_cast<size_t>(i)] = i * ref.dt;
    speed_ref.y[static_cast<size_t>(i)] = ref.states[i].v.norm();
  }
  write_svg_plot(prefix + "_speed.svg", "speed", "t [s]", "speed [m/s]", {speed, speed_ref});

  auto tilt_deg = [](const Quat& q) {
    const Mat3 R = quat_to_rotmat(q);
    return std::acos(std::clamp(R(2, 2), -1.0, 1.0)) * 180.0 / M_PI;
  };
  PlotSeries ang;
  ang.label = "theta_zb";
  ang.color = "#8a2be2";
  ang.x = t;
  ang.y.resize(n);
  for (int i = 0; i < n; ++i) ang.y[i] = tilt_deg(trace.steps[i].truth.q);
  PlotSeries ang_ref;
  ang_ref.label = "theta_zb ref";
  ang_ref.color = "#8a2be2";
  ang_ref.dashed = true;
  ang_ref.x.resize(ref.size());
  ang_ref.y.resize(ref.size());
  for (int i = 0; i < ref.size(); ++i) {
    ang_ref.x[static_cast<size_t>(i)] = i * ref.dt;
    ang_ref.y[static_cast<size_t>(i)] = tilt_deg(ref.states[i].q);
  }
  write_svg_plot(prefix + "_angles.svg", "body deviation", "t [s]", "theta_zb [deg]",
                 {ang, ang_ref});
}

}  // namespace fwmpc
