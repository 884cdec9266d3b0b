#include "fwmpc/sim/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/dynamics/dynamics.hpp"
#include "fwmpc/util/hash.hpp"
#include "fwmpc/util/rng.hpp"

namespace fwmpc {

namespace {
constexpr uint64_t kSaltSensor = 0x73656e73ull;
constexpr uint64_t kSaltWalk = 0x64697374ull;
constexpr double kTimeEps = 1e-9;
}  // namespace

const char* sim_mode_name(SimMode m) {
  switch (m) {
    case SimMode::kTracking: return "tracking";
    case SimMode::kAttitudeRecovery: return "attitude-recovery";
    case SimMode::kPositionRecovery: return "position-recovery";
    case SimMode::kLanded: return "landed";
  }
  return "?";
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(controller_rate_hz > 0.0) || !(voltage_rate_hz > 0.0) || !(sensor.rate_hz > 0.0)) {
    throw std::invalid_argument("SimConfig: rates must be positive");
  }
  // The plant step is the base clock: every other clock must be at least one
  // step long. The estimator predicts every step, so its period is dt exactly;
  // controller and latch clocks fire on the first step at or past each of
  // their own boundaries.
  if (1.0 / controller_rate_hz < dt - kTimeEps) {
    throw std::invalid_argument("SimConfig: controller period shorter than the sim step");
  }
  if (1.0 / voltage_rate_hz < dt - kTimeEps) {
    throw std::invalid_argument("SimConfig: amplitude latch period shorter than the sim step");
  }
  if (sensor.period_jitter < 0.0 || sensor.period_jitter >= 1.0) {
    throw std::invalid_argument("SimConfig: sensor period jitter must be in [0, 1)");
  }
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 / dt) {
    throw std::invalid_argument("SimConfig: actuator cutoff must sit below the Nyquist rate");
  }
  if (delay_s < 0.0) throw std::invalid_argument("SimConfig: delay must be non-negative");
  if (tube_grace_s < 0.0) throw std::invalid_argument("SimConfig: tube grace must be non-negative");
  if (!(omega_fallback > 0.0)) {
    throw std::invalid_argument("SimConfig: fallback rate threshold must be positive");
  }
  for (double s : true_cal_scale) {
    if (!(s > 0.0)) throw std::invalid_argument("SimConfig: calibration scale must be positive");
  }
  disturbance.validate();
  ukf.validate();
  cmd_bounds.validate();
}

uint64_t sim_config_hash(const SimConfig& cfg) {
  HashAccumulator h;
  h.add(cfg.dt);
  h.add(cfg.controller_rate_hz);
  h.add(cfg.voltage_rate_hz);
  h.add(cfg.cutoff_hz);
  h.add(cfg.delay_s);
  h.add(static_cast<uint64_t>(cfg.bypass_filter));
  h.add(static_cast<uint64_t>(cfg.disturbances_on));
  h.add(cfg.sensor.rate_hz);
  h.add(cfg.sensor.period_jitter);
  h.add_matrix(cfg.sensor.pos_noise);
  h.add_matrix(cfg.sensor.att_noise);
  h.add_matrix(cfg.disturbance.force_bound);
  h.add_matrix(cfg.disturbance.torque_bound);
  h.add_matrix(cfg.disturbance.force_step);
  h.add_matrix(cfg.disturbance.torque_step);
  h.add_matrix(cfg.disturbance.force_bias);
  h.add(cfg.disturbance.step_period);
  h.add(static_cast<uint64_t>(cfg.walk_mode));
  h.add(cfg.ukf.alpha);
  h.add(cfg.ukf.beta);
  h.add(cfg.ukf.kappa);
  h.add_matrix(cfg.ukf.q_pos);
  h.add_matrix(cfg.ukf.q_theta);
  h.add_matrix(cfg.ukf.q_vel);
  h.add_matrix(cfg.ukf.q_omega);
  h.add_matrix(cfg.ukf.q_tau);
  h.add_matrix(cfg.ukf.r_pos);
  h.add_matrix(cfg.ukf.r_theta);
  h.add_matrix(cfg.ukf.p0_pos);
  h.add_matrix(cfg.ukf.p0_theta);
  h.add_matrix(cfg.ukf.p0_vel);
  h.add_matrix(cfg.ukf.p0_omega);
  h.add_matrix(cfg.ukf.p0_tau);
  h.add(cfg.ukf.chi2_gate);
  h.add(cfg.fallback.att_kp);
  h.add(cfg.fallback.att_kd);
  h.add(cfg.fallback.pos_kp);
  h.add(cfg.fallback.pos_kd);
  h.add(cfg.fallback.max_accel);
  h.add(cfg.fallback.descent_rate);
  h.add_matrix(cfg.cmd_bounds.lo);
  h.add_matrix(cfg.cmd_bounds.hi);
  h.add(cfg.tube_grace_s);
  h.add(cfg.omega_fallback);
  h.add(cfg.ground_z);
  h.add(static_cast<uint64_t>(cfg.allocation));
  for (double s : cfg.true_cal_scale) h.add(s);
  h.add(cfg.seed);
  return h.value();
}

uint64_t SimTrace::content_hash() const {
  HashAccumulator h;
  h.add(dt);
  for (const SimStep& s : steps) {
    h.add(s.t);
    h.add_matrix(s.truth.to_vector());
    h.add_matrix(s.estimate.p);
    h.add_matrix(s.estimate.q);
    h.add_matrix(s.estimate.v);
    h.add_matrix(s.estimate.w);
    h.add_matrix(s.estimate.tau_ext);
    h.add_matrix(s.command.to_vector());
    for (double v : s.f_cmd) h.add(v);
    for (double v : s.v_amp) h.add(v);
    for (double v : s.f_sat) h.add(v);
    for (double v : s.f_fil) h.add(v);
    for (double v : s.f_eff) h.add(v);
    h.add_matrix(s.disturbance.force);
    h.add_matrix(s.disturbance.torque);
    h.add(static_cast<uint64_t>(s.in_tube));
    h.add(static_cast<uint64_t>(s.mode));
  }
  h.add(static_cast<uint64_t>(aborted));
  h.add(static_cast<uint64_t>(breached));
  h.add(static_cast<uint64_t>(landed));
  h.add(static_cast<uint64_t>(completed));
  h.add(touchdown_tilt_deg);
  return h.value();
}

SimTrace run_closed_loop(const SimConfig& cfg, const RobotParams& params,
                         const ReferenceTrajectory& ref, const Tube& tube,
                         FlightController& controller) {
  cfg.validate();
  params.validate();
  ref.validate();
  tube.validate();
  if (tube.trajectory_hash != ref.content_hash()) {
    throw std::invalid_argument("run_closed_loop: tube was built for a different trajectory");
  }

  const ActuatorCalibration nominal_cal = ActuatorCalibration::nominal();
  const ActuatorCalibration true_cal = nominal_cal.scaled(cfg.true_cal_scale);
  ActuatorChain chain(true_cal, cfg.cutoff_hz, cfg.delay_s, cfg.dt, cfg.bypass_filter);

  Ukf ukf(cfg.ukf, params);
  Rng sens_rng = Rng::derive(cfg.seed, kSaltSensor, 0);
  RandomWalkDisturbance walk(cfg.disturbance, cfg.walk_mode,
                             Rng::derive(cfg.seed, kSaltWalk, 0), cfg.dt);

  const int steps_total = static_cast<int>(std::lround(ref.duration() / cfg.dt));
  const double ctrl_period = 1.0 / cfg.controller_rate_hz;
  const double latch_period = 1.0 / cfg.voltage_rate_hz;
  const double sensor_period = 1.0 / cfg.sensor.rate_hz;

  SimTrace trace;
  trace.dt = cfg.dt;
  trace.steps.reserve(steps_total);
  trace.config_hash = sim_config_hash(cfg);
  trace.trajectory_hash = ref.content_hash();
  trace.seed = cfg.seed;

  RobotState x = ref.state_at(0);
  ukf.init_from_kinematics(x);
  controller.reset();

  // Prime the actuator chain at the reference's initial split so startup
  // transients do not pollute short runs.
  const Command u0 = ref.input_at(0);
  AllocationResult alloc =
      allocate(u0.thrust, u0.tau_x, u0.tau_y, Vec2::Zero(), params, cfg.allocation);
  chain.init_steady(alloc.forces);

  std::array<double, 4> pending_v{};
  for (int i = 0; i < 4; ++i) pending_v[i] = nominal_cal.curves[i].amplitude(alloc.forces[i]);
  std::array<double, 4> latched_v = pending_v;

  Command cmd = u0;
  CmdVec u_intent = u0.to_vector();

  SimMode mode = SimMode::kTracking;
  double out_since = -1.0;       // start of the current out-of-tube streak
  Vec3 hold = Vec3::Zero();      // position-recovery descent anchor
  double descend_from_t = 0.0;

  long ctrl_ticks = 0;   // boundaries already fired
  long latch_ticks = 0;
  double next_meas = 0.0;

  for (int k = 0; k < steps_total; ++k) {
    const double t = k * cfg.dt;
    const int ref_idx = ref.index_at_time(t);

    // estimator prediction under the last intended actuator wrench
    if (k > 0) ukf.predict(u_intent, cfg.dt);

    // jittered pose measurements
    while (next_meas <= t + kTimeEps) {
      const Vec3 p_m = x.p + cfg.sensor.pos_noise.cwiseProduct(sens_rng.normal_vec3());
      const Vec3 e_m = cfg.sensor.att_noise.cwiseProduct(sens_rng.normal_vec3());
      const Quat q_m = quat_normalize(quat_multiply(x.q, mrp_to_quat(e_m)));
      ukf.update_pose(p_m, q_m);
      next_meas += sensor_period * (1.0 + cfg.sensor.period_jitter * sens_rng.uniform(-1.0, 1.0));
    }

    const UkfState est = ukf.state();
    const RobotState est_kin = est.kinematics();

    // tube monitor, evaluated on the estimate every step
    bool inside = true;
    if (mode == SimMode::kTracking) {
      inside = in_tube(est_kin, ref_idx, ref, tube);
      if (inside) {
        out_since = -1.0;
      } else if (out_since < 0.0) {
        out_since = t;
      }
    }

    bool forced_eval = false;
    if (mode == SimMode::kTracking && out_since >= 0.0 && t - out_since >= cfg.tube_grace_s) {
      mode = SimMode::kAttitudeRecovery;
      trace.breached = true;
      forced_eval = true;
    }
    if (mode == SimMode::kAttitudeRecovery && est_kin.w.norm() < cfg.omega_fallback) {
      mode = SimMode::kPositionRecovery;
      hold = est_kin.p;
      descend_from_t = t;
      forced_eval = true;
    }

    // controller clock: fire on the first step at or past each boundary
    bool ctrl_due = forced_eval;
    if (t + kTimeEps >= ctrl_ticks * ctrl_period) {
      ctrl_due = true;
      ++ctrl_ticks;
    }

    if (ctrl_due) {
      switch (mode) {
        case SimMode::kTracking: {
          bool ok = true;
          Command c;
          try {
            c = controller.command(t, est_kin, ref_idx);
          } catch (const std::exception&) {
            ok = false;
          }
          if (ok && std::isfinite(c.thrust) && std::isfinite(c.tau_x) && std::isfinite(c.tau_y)) {
            cmd = c;
          } else {
            // a controller that stops answering is treated like a tube exit
            mode = SimMode::kAttitudeRecovery;
            trace.breached = true;
            cmd = attitude_fallback(est_kin, params, cfg.fallback, cfg.cmd_bounds);
          }
          break;
        }
        case SimMode::kAttitudeRecovery:
          cmd = attitude_fallback(est_kin, params, cfg.fallback, cfg.cmd_bounds);
          break;
        case SimMode::kPositionRecovery: {
          Vec3 target = hold;
          target.z() = std::max(cfg.ground_z - 0.02,
                                hold.z() - cfg.fallback.descent_rate * (t - descend_from_t));
          cmd = position_fallback(est_kin, target, params, cfg.fallback, cfg.cmd_bounds);
          break;
        }
        case SimMode::kLanded:
          cmd = Command(0.0, 0.0, 0.0);
          break;
      }

      alloc = allocate(cmd.thrust, cmd.tau_x, cmd.tau_y, est.tau_ext.head<2>(), params,
                       cfg.allocation);
      u_intent = effective_wrench(alloc.forces, params);
      for (int i = 0; i < 4; ++i) {
        pending_v[i] = nominal_cal.curves[i].amplitude(alloc.forces[i]);
      }
    }

    // amplitude latch on flapping-cycle boundaries
    if (t + kTimeEps >= latch_ticks * latch_period) {
      latched_v = pending_v;
      ++latch_ticks;
    }

    const std::array<double, 4> f_eff = chain.step(latched_v);
    const CmdVec u_plant = effective_wrench(f_eff, params);

    Wrench w_dist;
    if (cfg.disturbances_on) w_dist = walk.step();

    SimStep rec;
    rec.t = t;
    rec.truth = x;
    rec.estimate = est;
    rec.command = cmd;
    rec.f_cmd = alloc.forces;
    rec.v_amp = latched_v;
    rec.f_sat = chain.last_saturated();
    rec.f_fil = chain.last_filtered();
    rec.f_eff = f_eff;
    rec.disturbance = w_dist;
    rec.in_tube = inside;
    rec.mode = mode;
    trace.steps.push_back(rec);

    if (mode != SimMode::kLanded) {
      x = RobotState::from_vector(rk4_step(x.to_vector(), u_plant, params, cfg.dt, w_dist));
      if (!x.is_finite()) {
        trace.aborted = true;
        break;
      }
      if (x.p.z() <= cfg.ground_z && x.v.z() <= 0.0) {
        const Mat3 R = quat_to_rotmat(x.q);
        trace.touchdown_tilt_deg =
            std::acos(std::min(std::max(R(2, 2), -1.0), 1.0)) * 180.0 / M_PI;
        trace.landed = true;
        x.p.z() = cfg.ground_z;
        x.v.setZero();
        x.w.setZero();
        mode = SimMode::kLanded;
      }
    }
  }

  trace.completed = !trace.aborted && !trace.breached && !trace.landed;
  return trace;
}

}  // namespace fwmpc
