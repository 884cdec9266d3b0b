#include "fwmpc/io/presets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/trajgen/flatness.hpp"
#include "fwmpc/trajgen/min_snap.hpp"
#include "fwmpc/util/hash.hpp"

namespace fwmpc {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void read(const json& j, const char* key, double* v) {
  if (j.contains(key)) *v = j.at(key).get<double>();
}
void read(const json& j, const char* key, int* v) {
  if (j.contains(key)) *v = j.at(key).get<int>();
}
void read(const json& j, const char* key, bool* v) {
  if (j.contains(key)) *v = j.at(key).get<bool>();
}
void read(const json& j, const char* key, std::string* v) {
  if (j.contains(key)) *v = j.at(key).get<std::string>();
}

// a scalar broadcasts across all components
template <typename Vec>
void read_vec(const json& j, const char* key, Vec* v) {
  if (!j.contains(key)) return;
  const json& e = j.at(key);
  if (e.is_number()) {
    v->setConstant(e.get<double>());
    return;
  }
  if (!e.is_array() || static_cast<int>(e.size()) != v->size()) {
    throw std::runtime_error(std::string("config field '") + key + "' needs " +
                             std::to_string(v->size()) + " entries");
  }
  for (int i = 0; i < v->size(); ++i) (*v)(i) = e.at(i).get<double>();
}

Vec3 read_point(const json& e) {
  if (!e.is_array() || e.size() != 3) throw std::runtime_error("waypoint needs 3 entries");
  return Vec3(e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>());
}

void parse_robot(const json& j, RobotParams* p) {
  read(j, "mass", &p->mass);
  read_vec(j, "inertia", &p->inertia);
  read(j, "l_x", &p->l_x);
  read(j, "l_y", &p->l_y);
  read(j, "c_d_tra", &p->c_d_tra);
  read(j, "c_d_rot", &p->c_d_rot);
  read(j, "gravity", &p->gravity);
}

void parse_bounds(const json& j, ConstraintSets* s) {
  read_vec(j, "u_mpc_lo", &s->u_mpc.lo);
  read_vec(j, "u_mpc_hi", &s->u_mpc.hi);
  read_vec(j, "u_ref_lo", &s->u_ref.lo);
  read_vec(j, "u_ref_hi", &s->u_ref.hi);
  read_vec(j, "x_ref_p_lo", &s->x_ref.p_lo);
  read_vec(j, "x_ref_p_hi", &s->x_ref.p_hi);
  read(j, "x_ref_v_max", &s->x_ref.v_max);
  read(j, "x_ref_w_max", &s->x_ref.w_max);
  read_vec(j, "x_mpc_p_lo", &s->x_mpc.p_lo);
  read_vec(j, "x_mpc_p_hi", &s->x_mpc.p_hi);
  read(j, "x_mpc_v_max", &s->x_mpc.v_max);
  read(j, "x_mpc_w_max", &s->x_mpc.w_max);
}

void parse_nmpc(const json& j, NmpcConfig* c) {
  read(j, "horizon", &c->horizon);
  read(j, "dt", &c->dt);
  read(j, "substeps", &c->substeps);
  read_vec(j, "q", &c->weights.q);
  read_vec(j, "r", &c->weights.r);
  read_vec(j, "p", &c->weights.p);
  read(j, "max_iterations", &c->max_iterations);
  read(j, "kkt_tolerance", &c->kkt_tolerance);
  read(j, "defect_tolerance", &c->defect_tolerance);
  read(j, "step_tolerance", &c->step_tolerance);
  read(j, "step_defect_tolerance", &c->step_defect_tolerance);
  if (j.contains("sensitivity")) {
    const std::string s = j.at("sensitivity").get<std::string>();
    if (s == "riccati") {
      c->sensitivity = SensitivityMethod::kRiccati;
    } else if (s == "finite-difference") {
      c->sensitivity = SensitivityMethod::kFiniteDifference;
    } else {
      throw std::runtime_error("unknown sensitivity method: " + s);
    }
  }
  read(j, "fd_step", &c->fd_step);
}

void parse_disturbance(const json& j, DisturbanceSet* d) {
  read_vec(j, "force_bound", &d->force_bound);
  read_vec(j, "torque_bound", &d->torque_bound);
  read_vec(j, "force_step", &d->force_step);
  read_vec(j, "torque_step", &d->torque_step);
  read_vec(j, "force_bias", &d->force_bias);
  read(j, "step_period", &d->step_period);
}

void parse_sensor(const json& j, SensorModel* s) {
  read(j, "rate_hz", &s->rate_hz);
  read(j, "period_jitter", &s->period_jitter);
  read_vec(j, "pos_noise", &s->pos_noise);
  read_vec(j, "att_noise", &s->att_noise);
}

void parse_ukf(const json& j, UkfConfig* u) {
  read(j, "alpha", &u->alpha);
  read(j, "beta", &u->beta);
  read(j, "kappa", &u->kappa);
  read_vec(j, "q_pos", &u->q_pos);
  read_vec(j, "q_theta", &u->q_theta);
  read_vec(j, "q_vel", &u->q_vel);
  read_vec(j, "q_omega", &u->q_omega);
  read_vec(j, "q_tau", &u->q_tau);
  read_vec(j, "r_pos", &u->r_pos);
  read_vec(j, "r_theta", &u->r_theta);
  read_vec(j, "p0_pos", &u->p0_pos);
  read_vec(j, "p0_theta", &u->p0_theta);
  read_vec(j, "p0_vel", &u->p0_vel);
  read_vec(j, "p0_omega", &u->p0_omega);
  read_vec(j, "p0_tau", &u->p0_tau);
  read(j, "chi2_gate", &u->chi2_gate);
  read(j, "gate_escape_after", &u->gate_escape_after);
}

void parse_sim(const json& j, SimConfig* s) {
  read(j, "dt", &s->dt);
  read(j, "controller_rate_hz", &s->controller_rate_hz);
  read(j, "voltage_rate_hz", &s->voltage_rate_hz);
  read(j, "cutoff_hz", &s->cutoff_hz);
  read(j, "delay_s", &s->delay_s);
  read(j, "bypass_filter", &s->bypass_filter);
  read(j, "disturbances_on", &s->disturbances_on);
  read(j, "tube_grace_s", &s->tube_grace_s);
  read(j, "omega_fallback", &s->omega_fallback);
  read(j, "ground_z", &s->ground_z);
  if (j.contains("sensor")) parse_sensor(j.at("sensor"), &s->sensor);
  if (j.contains("ukf")) parse_ukf(j.at("ukf"), &s->ukf);
  if (j.contains("allocation")) {
    const std::string a = j.at("allocation").get<std::string>();
    if (a == "corrected") {
      s->allocation = AllocationMode::kCorrected;
    } else if (a == "literal") {
      s->allocation = AllocationMode::kLiteral;
    } else {
      throw std::runtime_error("unknown allocation mode: " + a);
    }
  }
}

void parse_train(const json& j, TrainConfig* t) {
  read(j, "max_epochs", &t->max_epochs);
  read(j, "patience", &t->patience);
  read(j, "batch_size", &t->batch_size);
  read(j, "learning_rate", &t->learning_rate);
  read(j, "val_fraction", &t->val_fraction);
}

void parse_trajopt(const json& j, TrajOptConfig* c) {
  read(j, "dt", &c->dt);
  read(j, "substeps", &c->substeps);
  read(j, "yaw", &c->yaw);
  read_vec(j, "q_state", &c->q_state);
  read_vec(j, "r_input", &c->r_input);
  read(j, "anchor_to_start", &c->anchor_to_start);
  read(j, "max_outer", &c->max_outer);
  read(j, "max_inner", &c->max_inner);
  read(j, "waypoint_tolerance", &c->waypoint_tolerance);
}

}  // namespace

StackConfig load_stack_config(const std::string& path) {
  const json j = parse_file(path);
  StackConfig c;
  if (j.contains("robot")) parse_robot(j.at("robot"), &c.robot);
  if (j.contains("bounds")) parse_bounds(j.at("bounds"), &c.sets);
  if (j.contains("nmpc")) parse_nmpc(j.at("nmpc"), &c.nmpc);
  if (j.contains("disturbance")) parse_disturbance(j.at("disturbance"), &c.disturbance);
  if (j.contains("tube")) {
    const json& t = j.at("tube");
    read(t, "rollouts", &c.tube.n_rollouts);
  }
  if (j.contains("augment")) {
    const json& a = j.at("augment");
    read(a, "n_per_step", &c.augment.n_per_step);
    read(a, "include_demo_pairs", &c.augment.include_demo_pairs);
  }
  if (j.contains("train")) parse_train(j.at("train"), &c.train);
  read(j, "policy_hidden", &c.policy_hidden);
  if (j.contains("dagger")) {
    const json& d = j.at("dagger");
    read(d, "n_demos", &c.dagger.n_demos);
    parse_train(d, &c.dagger.fine_tune);
  }
  if (j.contains("sim")) parse_sim(j.at("sim"), &c.sim);
  if (j.contains("trajopt")) parse_trajopt(j.at("trajopt"), &c.trajopt);

  // wire the shared pieces
  c.robot.validate();
  c.sets.validate();
  c.nmpc.input_bounds = c.sets.u_mpc;
  c.nmpc.validate();
  c.disturbance.validate();
  c.sim.disturbance = c.disturbance;
  c.sim.cmd_bounds = c.sets.u_mpc;
  c.sim.validate();
  c.dagger.sim = c.sim;
  c.train.validate();
  c.dagger.fine_tune.validate();
  c.trajopt.validate();
  if (c.policy_hidden < 1) throw std::runtime_error("policy_hidden must be >= 1");
  c.config_hash = hash_file(path);
  return c;
}

ScenarioPreset load_scenario(const std::string& path) {
  const json j = parse_file(path);
  ScenarioPreset sc;
  read(j, "name", &sc.name);
  read(j, "type", &sc.type);
  const json& t = j.contains("trajectory") ? j.at("trajectory") : j;
  read(t, "type", &sc.type);
  read(t, "dt", &sc.dt);
  read(t, "yaw", &sc.yaw);
  if (t.contains("points")) {
    for (const json& e : t.at("points")) sc.points.push_back(read_point(e));
  }
  if (t.contains("segment_times")) {
    for (const json& e : t.at("segment_times")) sc.segment_times.push_back(e.get<double>());
  }
  read(t, "pad_before", &sc.pad_before);
  read(t, "pad_after", &sc.pad_after);
  read(t, "duration", &sc.duration);
  if (t.contains("hover_point")) sc.hover_point = read_point(t.at("hover_point"));
  read(t, "n_flips", &sc.n_flips);
  read(t, "spin_s", &sc.spin_s);
  read(t, "settle_s", &sc.settle_s);
  read(t, "pad_s", &sc.pad_s);
  if (j.contains("window")) {
    const json& w = j.at("window");
    if (!w.is_array() || w.size() != 2) throw std::runtime_error("window needs [t0, t1]");
    sc.window_t0 = w.at(0).get<double>();
    sc.window_t1 = w.at(1).get<double>();
  }
  if (sc.type != "waypoints" && sc.type != "hover" && sc.type != "flip") {
    throw std::runtime_error(path + ": unknown trajectory type '" + sc.type + "'");
  }
  if (sc.type == "waypoints") {
    if (sc.points.size() < 2) throw std::runtime_error(path + ": waypoints need >= 2 points");
    if (sc.segment_times.size() != sc.points.size() - 1) {
      throw std::runtime_error(path + ": need one segment time per waypoint pair");
    }
  }
  sc.file_hash = hash_file(path);
  return sc;
}

void scenario_window(const ScenarioPreset& sc, const ReferenceTrajectory& ref, double* t0,
                     double* t1) {
  *t0 = sc.window_t0 >= 0.0 ? sc.window_t0 : 0.0;
  *t1 = sc.window_t1 >= 0.0 ? sc.window_t1 : ref.duration();
  *t0 = std::min(*t0, ref.duration());
  *t1 = std::min(*t1, ref.duration());
  if (!(*t1 > *t0)) throw std::runtime_error("scenario window is empty");
}

ReferenceTrajectory build_reference(const ScenarioPreset& sc, const StackConfig& stack,
                                    uint64_t seed) {
  ReferenceTrajectory ref;
  if (sc.type == "hover") {
    ref.dt = sc.dt;
    const int n = static_cast<int>(std::lround(sc.duration / sc.dt));
    if (n < 1) throw std::runtime_error("hover duration shorter than one step");
    RobotState s = RobotState::hover(sc.hover_point);
    s.q = quat_from_axis_angle(Vec3::UnitZ(), sc.yaw);
    const Command u{stack.robot.hover_thrust(), 0.0, 0.0};
    const Vec3 r1(std::cos(sc.yaw), std::sin(sc.yaw), 0.0);
    ref.states.assign(n + 1, s);
    ref.inputs.assign(n + 1, u);
    ref.body_x.assign(n + 1, r1);
  } else if (sc.type == "waypoints") {
    const PiecewisePolynomial poly = min_snap(sc.points, sc.segment_times);
    FlatnessOptions opt;
    opt.dt = sc.dt;
    opt.yaw = sc.yaw;
    opt.pad_before = sc.pad_before;
    opt.pad_after = sc.pad_after;
    ref = flat_to_reference(poly, stack.robot, opt);
    check_reference_feasible(ref, stack.sets.u_ref);
  } else {  // flip
    TrajOptConfig cfg = stack.trajopt;
    cfg.dt = sc.dt;
    cfg.yaw = sc.yaw;
    const TrajOptResult res = roll_flip_reference(sc.hover_point, sc.n_flips, sc.spin_s,
                                                  sc.settle_s, sc.pad_s, stack.sets, stack.robot,
                                                  cfg);
    ref = res.ref;
  }
  ref.config_hash = stack.config_hash ^ sc.file_hash;
  ref.seed = seed;
  ref.validate();
  return ref;
}

}  // namespace fwmpc
