#include "fwmpc/io/artifacts.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fwmpc/util/hash.hpp"

namespace fwmpc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

std::vector<double> parse_row(const std::string& line, const std::string& path) {
  std::vector<double> out;
  const char* p = line.c_str();
  char* end = nullptr;
  while (*p) {
    const double v = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("malformed numeric row in " + path);
    out.push_back(v);
    p = end;
    while (*p == ',' || *p == ' ' || *p == '\t') ++p;
  }
  return out;
}

void put_u32(std::ofstream& f, uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ofstream& f, uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); }
void put_f64(std::ofstream& f, double v) { f.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(std::ifstream& f) {
  uint32_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t get_u64(std::ifstream& f) {
  uint64_t v = 0;
  f.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double get_f64(std::ifstream& f) {
  double v = 0;
  f.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

template <typename Derived>
void put_rowmajor(std::ofstream& f, const Derived& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) put_f64(f, m(r, c));
}

template <typename Derived>
void get_rowmajor(std::ifstream& f, Derived& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = get_f64(f);
}

void check_magic(std::ifstream& f, const char* magic, const std::string& path) {
  char buf[4];
  f.read(buf, 4);
  if (!f || std::memcmp(buf, magic, 4) != 0) {
    throw std::runtime_error(path + ": not a " + magic + " file");
  }
}

void check_stream(const std::ifstream& f, const std::string& path) {
  if (!f) throw std::runtime_error(path + ": truncated file");
}

}  // namespace

void save_trajectory_csv(const std::string& path, const ReferenceTrajectory& ref) {
  ref.validate();
  auto f = open_out(path, false);
  f << "# trajectory v1 config_hash=" << hex_string(ref.config_hash) << " seed=" << ref.seed
    << " dt=" << fmt(ref.dt) << " n=" << ref.size() << "\n";
  f << "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,f,tau_x,tau_y,r1x,r1y,r1z\n";
  for (int i = 0; i < ref.size(); ++i) {
    const StateVec x = ref.states[i].to_vector();
    const CmdVec u = ref.inputs[i].to_vector();
    f << fmt(i * ref.dt);
    for (int j = 0; j < kStateDim; ++j) f << ',' << fmt(x(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(u(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(ref.body_x[i](j));
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

ReferenceTrajectory load_trajectory_csv(const std::string& path) {
  auto f = open_in(path, false);
  std::string line;
  if (!std::getline(f, line) || line.rfind("# trajectory v1 ", 0) != 0) {
    throw std::runtime_error(path + ": missing trajectory header");
  }
  ReferenceTrajectory ref;
  unsigned long long seed = 0, n = 0;
  char hash_hex[32] = {0};
  double dt = 0.0;
  if (std::sscanf(line.c_str(), "# trajectory v1 config_hash=%31s seed=%llu dt=%lf n=%llu",
                  hash_hex, &seed, &dt, &n) != 4) {
    throw std::runtime_error(path + ": malformed trajectory header");
  }
  ref.config_hash = std::strtoull(hash_hex, nullptr, 16);
  ref.seed = seed;
  ref.dt = dt;
  std::getline(f, line);  // column names
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line, path);
    if (row.size() != 1 + kStateDim + 3 + 3) {
      throw std::runtime_error(path + ": row has wrong column count");
    }
    StateVec x;
    for (int j = 0; j < kStateDim; ++j) x(j) = row[1 + j];
    ref.states.push_back(RobotState::from_vector(x));
    ref.inputs.push_back(Command{row[14], row[15], row[16]});
    ref.body_x.push_back(Vec3(row[17], row[18], row[19]));
  }
  if (ref.states.size() != n) throw std::runtime_error(path + ": row count disagrees with header");
  ref.validate();
  return ref;
}

void save_tube(const std::string& path, const Tube& tube) {
  tube.validate();
  auto f = open_out(path, false);
  f << "# tube v1\n";
  f << "config_hash " << hex_string(tube.config_hash) << "\n";
  f << "trajectory_hash " << hex_string(tube.trajectory_hash) << "\n";
  f << "seed " << tube.seed << "\n";
  f << "rollouts " << tube.n_rollouts << "\n";
  f << "dx";
  for (int j = 0; j < tube.dx.size(); ++j) f << ' ' << fmt(tube.dx(j));
  f << "\ndu";
  for (int j = 0; j < 3; ++j) f << ' ' << fmt(tube.du(j));
  f << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

Tube load_tube(const std::string& path) {
  auto f = open_in(path, false);
  std::string line;
  if (!std::getline(f, line) || line != "# tube v1") {
    throw std::runtime_error(path + ": missing tube header");
  }
  Tube tube;
  std::string key;
  while (f >> key) {
    if (key == "config_hash" || key == "trajectory_hash") {
      std::string v;
      f >> v;
      (key[0] == 'c' ? tube.config_hash : tube.trajectory_hash) =
          std::strtoull(v.c_str(), nullptr, 16);
    } else if (key == "seed") {
      f >> tube.seed;
    } else if (key == "rollouts") {
      f >> tube.n_rollouts;
    } else if (key == "dx") {
      for (int j = 0; j < tube.dx.size(); ++j) f >> tube.dx(j);
    } else if (key == "du") {
      for (int j = 0; j < 3; ++j) f >> tube.du(j);
    } else {
      throw std::runtime_error(path + ": unknown tube field " + key);
    }
  }
  tube.validate();
  return tube;
}

void save_policy(const std::string& path, const PolicyNet& net) {
  net.validate();
  auto f = open_out(path, true);
  f.write("FWPN", 4);
  put_u32(f, 1);  // version
  put_u32(f, static_cast<uint32_t>(net.hidden));
  put_u32(f, 0);  // activation tag: 0 = tanh
  put_u64(f, net.config_hash);
  put_u64(f, net.seed);
  put_f64(f, net.val_mse);
  put_rowmajor(f, net.in_mean);
  put_rowmajor(f, net.in_std);
  put_rowmajor(f, net.out_mean);
  put_rowmajor(f, net.out_std);
  put_rowmajor(f, net.w1);
  put_rowmajor(f, net.b1);
  put_rowmajor(f, net.w2);
  put_rowmajor(f, net.b2);
  put_rowmajor(f, net.w3);
  put_rowmajor(f, net.b3);
  if (!f) throw std::runtime_error("write failed: " + path);
}

PolicyNet load_policy(const std::string& path) {
  auto f = open_in(path, true);
  check_magic(f, "FWPN", path);
  const uint32_t version = get_u32(f);
  if (version != 1) throw std::runtime_error(path + ": unsupported policy version");
  const uint32_t hidden = get_u32(f);
  const uint32_t activation = get_u32(f);
  if (activation != 0) throw std::runtime_error(path + ": unsupported activation tag");
  if (hidden < 1 || hidden > 4096) throw std::runtime_error(path + ": implausible layer size");
  PolicyNet net;
  net.hidden = static_cast<int>(hidden);
  net.config_hash = get_u64(f);
  net.seed = get_u64(f);
  net.val_mse = get_f64(f);
  net.w1.resize(net.hidden, kPolicyInDim);
  net.w2.resize(net.hidden, net.hidden);
  net.w3.resize(3, net.hidden);
  net.b1.resize(net.hidden);
  net.b2.resize(net.hidden);
  get_rowmajor(f, net.in_mean);
  get_rowmajor(f, net.in_std);
  get_rowmajor(f, net.out_mean);
  get_rowmajor(f, net.out_std);
  get_rowmajor(f, net.w1);
  get_rowmajor(f, net.b1);
  get_rowmajor(f, net.w2);
  get_rowmajor(f, net.b2);
  get_rowmajor(f, net.w3);
  get_rowmajor(f, net.b3);
  check_stream(f, path);
  net.validate();
  return net;
}

void save_demo(const std::string& path, const ExpertDemo& demo) {
  demo.validate();
  auto f = open_out(path, true);
  f.write("FWDM", 4);
  put_u32(f, 1);
  put_u64(f, demo.config_hash);
  put_u64(f, demo.seed);
  put_u64(f, static_cast<uint64_t>(demo.ref.size()));
  put_f64(f, demo.ref.dt);
  put_u64(f, demo.ref.config_hash);
  put_u64(f, demo.ref.seed);
  for (int i = 0; i < demo.ref.size(); ++i) {
    put_rowmajor(f, demo.ref.states[i].to_vector());
    put_rowmajor(f, demo.ref.inputs[i].to_vector());
    put_rowmajor(f, demo.ref.body_x[i]);
  }
  for (const auto& s : demo.states) put_rowmajor(f, s.to_vector());
  for (const auto& u : demo.inputs) put_rowmajor(f, u);
  for (const auto& K : demo.gains) put_rowmajor(f, K);
  for (uint8_t c : demo.converged) f.write(reinterpret_cast<const char*>(&c), 1);
  if (!f) throw std::runtime_error("write failed: " + path);
}

ExpertDemo load_demo(const std::string& path) {
  auto f = open_in(path, true);
  check_magic(f, "FWDM", path);
  if (get_u32(f) != 1) throw std::runtime_error(path + ": unsupported demo version");
  ExpertDemo demo;
  demo.config_hash = get_u64(f);
  demo.seed = get_u64(f);
  const uint64_t n = get_u64(f);
  if (n < 2 || n > 10'000'000) throw std::runtime_error(path + ": implausible demo length");
  demo.ref.dt = get_f64(f);
  demo.ref.config_hash = get_u64(f);
  demo.ref.seed = get_u64(f);
  for (uint64_t i = 0; i < n; ++i) {
    StateVec x;
    CmdVec u;
    Vec3 b;
    get_rowmajor(f, x);
    get_rowmajor(f, u);
    get_rowmajor(f, b);
    demo.ref.states.push_back(RobotState::from_vector(x));
    demo.ref.inputs.push_back(Command::from_vector(u));
    demo.ref.body_x.push_back(b);
  }
  demo.states.resize(n);
  demo.inputs.resize(n - 1);
  demo.gains.resize(n - 1);
  demo.converged.resize(n - 1);
  for (auto& s : demo.states) {
    StateVec x;
    get_rowmajor(f, x);
    s = RobotState::from_vector(x);
  }
  for (auto& u : demo.inputs) get_rowmajor(f, u);
  for (auto& K : demo.gains) get_rowmajor(f, K);
  for (auto& c : demo.converged) f.read(reinterpret_cast<char*>(&c), 1);
  check_stream(f, path);
  demo.validate();
  return demo;
}

void save_trace(const std::string& path, const SimTrace& trace) {
  auto f = open_out(path, true);
  f.write("FWTR", 4);
  put_u32(f, 1);
  put_u64(f, static_cast<uint64_t>(trace.steps.size()));
  put_f64(f, trace.dt);
  put_u64(f, trace.config_hash);
  put_u64(f, trace.trajectory_hash);
  put_u64(f, trace.seed);
  const uint32_t flags = (trace.aborted ? 1u : 0u) | (trace.breached ? 2u : 0u) |
                         (trace.landed ? 4u : 0u) | (trace.completed ? 8u : 0u);
  put_u32(f, flags);
  put_f64(f, trace.touchdown_tilt_deg);
  for (const SimStep& s : trace.steps) {
    put_f64(f, s.t);
    put_rowmajor(f, s.truth.to_vector());
    put_rowmajor(f, s.estimate.p);
    put_rowmajor(f, s.estimate.q);
    put_rowmajor(f, s.estimate.v);
    put_rowmajor(f, s.estimate.w);
    put_rowmajor(f, s.estimate.tau_ext);
    put_rowmajor(f, s.command.to_vector());
    for (double v : s.f_cmd) put_f64(f, v);
    for (double v : s.v_amp) put_f64(f, v);
    for (double v : s.f_sat) put_f64(f, v);
    for (double v : s.f_fil) put_f64(f, v);
    for (double v : s.f_eff) put_f64(f, v);
    put_rowmajor(f, s.disturbance.force);
    put_rowmajor(f, s.disturbance.torque);
    const uint8_t in_tube = s.in_tube ? 1 : 0;
    const uint8_t mode = static_cast<uint8_t>(s.mode);
    f.write(reinterpret_cast<const char*>(&in_tube), 1);
    f.write(reinterpret_cast<const char*>(&mode), 1);
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

SimTrace load_trace(const std::string& path) {
  auto f = open_in(path, true);
  check_magic(f, "FWTR", path);
  if (get_u32(f) != 1) throw std::runtime_error(path + ": unsupported trace version");
  SimTrace trace;
  const uint64_t n = get_u64(f);
  if (n > 100'000'000) throw std::runtime_error(path + ": implausible trace length");
  trace.dt = get_f64(f);
  trace.config_hash = get_u64(f);
  trace.trajectory_hash = get_u64(f);
  trace.seed = get_u64(f);
  const uint32_t flags = get_u32(f);
  trace.aborted = flags & 1u;
  trace.breached = flags & 2u;
  trace.landed = flags & 4u;
  trace.completed = flags & 8u;
  trace.touchdown_tilt_deg = get_f64(f);
  trace.steps.resize(n);
  for (SimStep& s : trace.steps) {
    s.t = get_f64(f);
    StateVec x;
    get_rowmajor(f, x);
    s.truth = RobotState::from_vector(x);
    get_rowmajor(f, s.estimate.p);
    get_rowmajor(f, s.estimate.q);
    get_rowmajor(f, s.estimate.v);
    get_rowmajor(f, s.estimate.w);
    get_rowmajor(f, s.estimate.tau_ext);
    CmdVec u;
    get_rowmajor(f, u);
    s.command = Command::from_vector(u);
    for (double& v : s.f_cmd) v = get_f64(f);
    for (double& v : s.v_amp) v = get_f64(f);
    for (double& v : s.f_sat) v = get_f64(f);
    for (double& v : s.f_fil) v = get_f64(f);
    for (double& v : s.f_eff) v = get_f64(f);
    get_rowmajor(f, s.disturbance.force);
    get_rowmajor(f, s.disturbance.torque);
    uint8_t in_tube = 0, mode = 0;
    f.read(reinterpret_cast<char*>(&in_tube), 1);
    f.read(reinterpret_cast<char*>(&mode), 1);
    s.in_tube = in_tube != 0;
    s.mode = static_cast<SimMode>(mode);
  }
  check_stream(f, path);
  return trace;
}

void save_trace_csv(const std::string& path, const SimTrace& trace) {
  auto f = open_out(path, false);
  f << "# trace v1 config_hash=" << hex_string(trace.config_hash)
    << " trajectory_hash=" << hex_string(trace.trajectory_hash) << " seed=" << trace.seed
    << " dt=" << fmt(trace.dt) << " n=" << trace.steps.size() << " aborted=" << trace.aborted
    << " breached=" << trace.breached << " landed=" << trace.landed
    << " completed=" << trace.completed << "\n";
  f << "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
       "est_px,est_py,est_pz,est_qw,est_qx,est_qy,est_qz,est_vx,est_vy,est_vz,"
       "est_wx,est_wy,est_wz,est_taux,est_tauy,est_tauz,"
       "cmd_f,cmd_taux,cmd_tauy,f_eff0,f_eff1,f_eff2,f_eff3,"
       "dist_fx,dist_fy,dist_fz,dist_tx,dist_ty,dist_tz,in_tube,mode\n";
  for (const SimStep& s : trace.steps) {
    const StateVec x = s.truth.to_vector();
    f << fmt(s.t);
    for (int j = 0; j < kStateDim; ++j) f << ',' << fmt(x(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.estimate.p(j));
    for (int j = 0; j < 4; ++j) f << ',' << fmt(s.estimate.q(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.estimate.v(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.estimate.w(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.estimate.tau_ext(j));
    const CmdVec u = s.command.to_vector();
    for (int j = 0; j < 3; ++j) f << ',' << fmt(u(j));
    for (double v : s.f_eff) f << ',' << fmt(v);
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.disturbance.force(j));
    for (int j = 0; j < 3; ++j) f << ',' << fmt(s.disturbance.torque(j));
    f << ',' << (s.in_tube ? 1 : 0) << ',' << static_cast<int>(s.mode) << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string metrics_to_text(const MetricsReport& m) {
  std::ostringstream s;
  s << "rms_lateral_error_m " << fmt(m.rms_lateral_error) << "\n"
    << "rms_altitude_error_m " << fmt(m.rms_altitude_error) << "\n"
    << "max_speed_mps " << fmt(m.max_speed) << "\n"
    << "mean_speed_mps " << fmt(m.mean_speed) << "\n"
    << "max_acceleration_mps2 " << fmt(m.max_acceleration) << "\n"
    << "max_body_deviation_deg " << fmt(m.max_body_deviation_deg) << "\n"
    << "max_angular_speed_dps " << fmt(m.max_angular_speed_dps) << "\n"
    << "tube_breach " << (m.tube_breach ? 1 : 0) << "\n"
    << "window_t0_s " << fmt(m.window_t0) << "\n"
    << "window_t1_s " << fmt(m.window_t1) << "\n";
  return s.str();
}

}  // namespace fwmpc
