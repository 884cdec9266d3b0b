// Experiment harness: trajectory generation, expert demos, tube construction,
// policy training and closed-loop evaluation, driven by JSON presets.
//
// Exit codes: 0 success, 1 user error (bad flags, missing or mismatched
// files), 2 numerical failure (solver non-convergence, diverged simulation).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fwmpc/io/artifacts.hpp"
#include "fwmpc/io/presets.hpp"
#include "fwmpc/io/svg.hpp"
#include "fwmpc/learning/augment.hpp"
#include "fwmpc/learning/dagger.hpp"
#include "fwmpc/nmpc/demo.hpp"
#include "fwmpc/sim/controllers.hpp"
#include "fwmpc/sim/metrics.hpp"
#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/tube/tube.hpp"
#include "fwmpc/util/hash.hpp"

namespace {

using namespace fwmpc;

constexpr int kExitUser = 1;
constexpr int kExitNumeric = 2;

int fail_user(const std::string& what) {
  std::cerr << "error: " << what << "\n";
  return kExitUser;
}

int fail_numeric(const std::string& what) {
  std::cerr << "numerical failure: " << what << "\n";
  return kExitNumeric;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// fan out n independent jobs; any exception is rethrown on the caller thread
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::string err;
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (err.empty()) err = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!err.empty()) throw std::runtime_error(err);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct LoadedPair {
  ReferenceTrajectory ref;
  Tube tube;
};

LoadedPair load_matched(const std::string& traj_path, const std::string& tube_path) {
  LoadedPair lp;
  lp.ref = load_trajectory_csv(traj_path);
  lp.tube = load_tube(tube_path);
  if (lp.tube.trajectory_hash != lp.ref.content_hash()) {
    throw std::runtime_error("tube " + tube_path + " was built for a different trajectory than " +
                             traj_path + " (hash mismatch)");
  }
  return lp;
}

Vec3 parse_dir(const std::string& s) {
  const std::vector<double> v = parse_list(s);
  if (v.size() != 3) throw std::runtime_error("direction needs three components");
  Vec3 d(v[0], v[1], v[2]);
  if (d.norm() < 1e-12) throw std::runtime_error("direction must be nonzero");
  return d.normalized();
}

// ---------------------------------------------------------------- trajgen

struct TrajgenArgs {
  std::string scenario, config, out;
  uint64_t seed = 0;
};

int cmd_trajgen(const TrajgenArgs& a) {
  StackConfig stack;
  ScenarioPreset sc;
  try {
    stack = load_stack_config(a.config);
    sc = load_scenario(a.scenario);
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }
  try {
    const ReferenceTrajectory ref = build_reference(sc, stack, a.seed);
    save_trajectory_csv(a.out, ref);
    std::cout << "trajectory " << sc.name << ": " << ref.size() << " samples, dt " << fmt(ref.dt)
              << " s, duration " << fmt(ref.duration()) << " s\n"
              << "content_hash " << hex_string(ref.content_hash()) << "\nwrote " << a.out << "\n";
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

// ----------------------------------------------------------------- expert

struct ExpertArgs {
  std::string trajectory, config, out;
  uint64_t seed = 0;
  bool require_convergence = false;
};

int cmd_expert(const ExpertArgs& a) {
  StackConfig stack;
  ReferenceTrajectory ref;
  try {
    stack = load_stack_config(a.config);
    ref = load_trajectory_csv(a.trajectory);
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }
  try {
    DemoOptions opt;
    opt.record_gains = true;
    opt.require_convergence = a.require_convergence;
    ExpertDemo demo = record_expert_demo(ref, stack.nmpc, stack.robot, opt);
    demo.config_hash = ref.config_hash;
    demo.seed = a.seed;
    save_demo(a.out, demo);
    int conv = 0;
    for (uint8_t c : demo.converged) conv += c ? 1 : 0;
    std::cout << "demo: " << demo.steps() << " steps, " << conv << " converged solves\nwrote "
              << a.out << "\n";
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

// ------------------------------------------------------------------- tube

struct TubeArgs {
  std::string trajectory, config, out;
  uint64_t seed = 0;
  int rollouts = 0;  // 0 = keep config value
  double wind_speed = 0.0;
  std::string wind_dir = "1,0,0";
};

int cmd_tube(const TubeArgs& a) {
  StackConfig stack;
  ReferenceTrajectory ref;
  Vec3 wind_dir;
  try {
    stack = load_stack_config(a.config);
    ref = load_trajectory_csv(a.trajectory);
    wind_dir = parse_dir(a.wind_dir);
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }
  try {
    TubeBuildOptions opt = stack.tube;
    opt.seed = a.seed;
    if (a.rollouts > 0) opt.n_rollouts = a.rollouts;
    DisturbanceSet dset = stack.disturbance;
    if (a.wind_speed > 0.0) dset.force_bias += stack.robot.c_d_tra * a.wind_speed * wind_dir;
    Tube tube = construct_tube(ref, stack.nmpc, stack.robot, dset, opt);
    tube.config_hash = stack.config_hash;
    save_tube(a.out, tube);
    std::cout << "tube from " << tube.n_rollouts << " rollouts\n  position half-widths [m]: "
              << fmt(tube.dx(0)) << ' ' << fmt(tube.dx(1)) << ' ' << fmt(tube.dx(2))
              << "\n  input half-widths: " << fmt(tube.du(0)) << ' ' << fmt(tube.du(1)) << ' '
              << fmt(tube.du(2)) << "\nwrote " << a.out << "\n";
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string trajectory, tube, config, out_dir;
  uint64_t seed = 0;
  int hidden = 0;  // 0 = keep config value
  int demos = -1;  // <0 = keep config value
  int n_per_step = 0;
  bool bc_only = false;
};

int cmd_train(const TrainArgs& a) {
  StackConfig stack;
  LoadedPair lp;
  try {
    stack = load_stack_config(a.config);
    lp = load_matched(a.trajectory, a.tube);
    ensure_dir(a.out_dir);
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }
  try {
    const int hidden = a.hidden > 0 ? a.hidden : stack.policy_hidden;
    std::ofstream report(a.out_dir + "/train_report.txt");
    if (!report) throw std::runtime_error("cannot write into " + a.out_dir);
    report << "# config_hash " << hex_string(lp.ref.config_hash) << " seed " << a.seed
           << " hidden " << hidden << "\n";

    ExpertDemo demo = record_expert_demo(lp.ref, stack.nmpc, stack.robot);
    AugmentOptions aug = stack.augment;
    if (a.n_per_step > 0) aug.n_per_step = a.n_per_step;
    aug.seed = Rng::derive(a.seed, 0x617567ull, 0).next_u64();
    const Dataset data = augment_demo(demo, lp.tube, stack.sets.u_mpc, aug);

    PolicyNet net = PolicyNet::create(hidden, Rng::derive(a.seed, 0x696e6974ull, 0).next_u64());
    net.config_hash = lp.ref.config_hash;
    net.seed = a.seed;
    TrainConfig tc = stack.train;
    tc.seed = Rng::derive(a.seed, 0x6263ull, 0).next_u64();
    const TrainReport bc = train_policy(data, tc, &net);
    save_policy(a.out_dir + "/bc.fwpn", net);
    report << "bc pairs " << data.size() << " epochs " << bc.epochs_run << " best_val_mse "
           << fmt(bc.best_val_mse, "%.17g") << "\n";
    std::cout << "bc: " << data.size() << " pairs, val mse " << fmt(bc.best_val_mse) << "\n";

    if (!a.bc_only) {
      DaggerOptions d = stack.dagger;
      d.sim = stack.sim;
      if (a.demos >= 0) d.n_demos = a.demos;
      d.seed = Rng::derive(a.seed, 0x646772ull, 0).next_u64();
      const DaggerResult res = run_dagger(net, lp.ref, lp.tube, stack.nmpc, stack.robot, d);
      for (int i = 1; i < static_cast<int>(res.policies.size()); ++i) {
        PolicyNet p = res.policies[i];
        p.config_hash = lp.ref.config_hash;
        p.seed = a.seed;
        char name[32];
        std::snprintf(name, sizeof(name), "dagger_%02d.fwpn", i);
        save_policy(a.out_dir + "/" + name, p);
        report << "dagger " << i << " labels " << res.labels_per_demo[i - 1] << " epochs "
               << res.reports[i - 1].epochs_run << " best_val_mse "
               << fmt(res.reports[i - 1].best_val_mse, "%.17g") << "\n";
        std::cout << "dagger " << i << ": " << res.labels_per_demo[i - 1] << " labels, val mse "
                  << fmt(res.reports[i - 1].best_val_mse) << "\n";
      }
    }
    std::cout << "wrote " << a.out_dir << "\n";
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string trajectory, tube, config, out_dir;
  std::string controller = "expert";
  std::string policy;
  uint64_t seed = 0;
  double rate = 0.0;  // 0 = keep config value
  std::string window;
  double wind_speed = 0.0;
  std::string wind_dir = "1,0,0";
  std::string cal_scale;
  std::string allocation;
  bool no_disturbances = false;
};

int cmd_simulate(const SimulateArgs& a) {
  StackConfig stack;
  LoadedPair lp;
  PolicyNet net;
  SimConfig sim;
  double t0 = 0.0, t1 = 0.0;
  try {
    stack = load_stack_config(a.config);
    lp = load_matched(a.trajectory, a.tube);
    ensure_dir(a.out_dir);

    sim = stack.sim;
    sim.seed = a.seed;
    if (a.rate > 0.0) sim.controller_rate_hz = a.rate;
    if (a.no_disturbances) sim.disturbances_on = false;
    if (a.wind_speed > 0.0) {
      sim.disturbance.force_bias += stack.robot.c_d_tra * a.wind_speed * parse_dir(a.wind_dir);
    }
    if (!a.cal_scale.empty()) {
      const std::vector<double> s = parse_list(a.cal_scale);
      if (s.size() != 4) throw std::runtime_error("--cal-scale needs four factors");
      for (int i = 0; i < 4; ++i) sim.true_cal_scale[i] = s[i];
    }
    if (!a.allocation.empty()) {
      if (a.allocation == "corrected") {
        sim.allocation = AllocationMode::kCorrected;
      } else if (a.allocation == "literal") {
        sim.allocation = AllocationMode::kLiteral;
      } else {
        throw std::runtime_error("unknown allocation mode: " + a.allocation);
      }
    }
    sim.validate();

    if (a.controller == "policy") {
      if (a.policy.empty()) throw std::runtime_error("--policy required with --controller policy");
      net = load_policy(a.policy);
    } else if (a.controller != "expert") {
      throw std::runtime_error("unknown controller: " + a.controller);
    }

    t1 = lp.ref.duration();
    if (!a.window.empty()) {
      std::vector<double> w = parse_list(a.window);
      if (w.size() != 2) throw std::runtime_error("--window needs t0,t1");
      t0 = w[0];
      t1 = std::min(w[1], lp.ref.duration());
    }
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }

  try {
    std::unique_ptr<FlightController> ctrl;
    if (a.controller == "expert") {
      ctrl = std::make_unique<ExpertController>(stack.nmpc, stack.robot, lp.ref);
    } else {
      ctrl = std::make_unique<PolicyController>(net, lp.ref, stack.sets.u_mpc);
    }

    const SimTrace trace = run_closed_loop(sim, stack.robot, lp.ref, lp.tube, *ctrl);
    save_trace(a.out_dir + "/trace.bin", trace);
    save_trace_csv(a.out_dir + "/trace.csv", trace);
    write_flight_plots(a.out_dir + "/flight", trace, lp.ref);

    const double t_end = trace.steps.empty() ? 0.0 : trace.steps.back().t;
    const MetricsReport m = compute_metrics(trace, lp.ref, std::min(t0, t_end), std::min(t1, t_end));
    std::ofstream mf(a.out_dir + "/metrics.txt");
    mf << "# config_hash " << hex_string(trace.config_hash) << " seed " << trace.seed
       << " controller " << a.controller;
    if (a.controller == "policy") {
      mf << " policy_val_mse " << fmt(net.val_mse, "%.17g");
    }
    mf << "\n" << metrics_to_text(m);
    mf << "completed " << trace.completed << "\nbreached " << trace.breached << "\nlanded "
       << trace.landed << "\naborted " << trace.aborted << "\n";

    std::cout << "trace: " << trace.steps.size() << " rows, completed=" << trace.completed
              << " breached=" << trace.breached << "\n";
    if (a.controller == "policy") std::cout << "policy_val_mse " << fmt(net.val_mse) << "\n";
    std::cout << metrics_to_text(m) << "wrote " << a.out_dir << "\n";
    if (trace.aborted) return fail_numeric("simulation diverged; partial trace saved");
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string sweep;
  std::string trajectory, tube, config, out_dir;
  std::string controller = "policy";
  std::string policy;
  std::string values;
  std::string window;
  uint64_t seed = 0;
  int seeds = 10;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  double error = 0.33;
  double wind_speed = 1.6;
  std::string wind_dir = "1,0,0";
};

struct RunOutcome {
  double rms = 0.0;
  bool breached = false;
  bool aborted = false;
};

RunOutcome one_run(const StackConfig& stack, const LoadedPair& lp, const PolicyNet* net,
                   const SimConfig& sim, double t0, double t1) {
  std::unique_ptr<FlightController> ctrl;
  if (net) {
    ctrl = std::make_unique<PolicyController>(*net, lp.ref, stack.sets.u_mpc);
  } else {
    ctrl = std::make_unique<ExpertController>(stack.nmpc, stack.robot, lp.ref);
  }
  const SimTrace trace = run_closed_loop(sim, stack.robot, lp.ref, lp.tube, *ctrl);
  RunOutcome out;
  out.breached = trace.breached;
  out.aborted = trace.aborted;
  if (trace.aborted) {
    out.rms = std::numeric_limits<double>::infinity();
    return out;
  }
  const double t_end = trace.steps.back().t;
  const MetricsReport m = compute_metrics(trace, lp.ref, std::min(t0, t_end), std::min(t1, t_end));
  out.rms = m.rms_lateral_error;
  out.breached = out.breached || m.tube_breach;
  return out;
}

int cmd_evaluate(const EvaluateArgs& a) {
  StackConfig stack;
  LoadedPair lp;
  PolicyNet net;
  bool use_policy = false;
  double t0 = 0.0, t1 = 0.0;
  std::vector<double> values;
  try {
    stack = load_stack_config(a.config);
    if (a.sweep != "rate" && a.sweep != "nn-size" && a.sweep != "calibration" &&
        a.sweep != "wind") {
      throw std::runtime_error("unknown sweep: " + a.sweep);
    }
    if (a.sweep == "nn-size") {
      values = a.values.empty() ? std::vector<double>{8, 16, 32, 64, 128} : parse_list(a.values);
    } else {
      lp = load_matched(a.trajectory, a.tube);
      t1 = lp.ref.duration();
      if (!a.window.empty()) {
        std::vector<double> w = parse_list(a.window);
        if (w.size() != 2) throw std::runtime_error("--window needs t0,t1");
        t0 = w[0];
        t1 = std::min(w[1], lp.ref.duration());
      }
      use_policy = a.controller == "policy";
      if (use_policy) {
        if (a.policy.empty()) throw std::runtime_error("--policy required for policy sweeps");
        net = load_policy(a.policy);
      } else if (a.controller != "expert") {
        throw std::runtime_error("unknown controller: " + a.controller);
      }
      if (a.sweep == "rate") {
        values =
            a.values.empty() ? std::vector<double>{1000, 500, 330, 200, 100, 50} : parse_list(a.values);
      }
    }
    if (a.seeds < 1) throw std::runtime_error("--seeds must be >= 1");
    ensure_dir(a.out_dir);
  } catch (const std::exception& e) {
    return fail_user(e.what());
  }

  try {
    std::ofstream report(a.out_dir + "/report.csv");
    if (!report) throw std::runtime_error("cannot write into " + a.out_dir);
    std::ostringstream table;

    if (a.sweep == "nn-size") {
      // architecture cost per evaluation; no simulations needed
      report << "hidden,macs,cost_ratio_vs_first\n";
      table << "hidden  macs   ratio\n";
      const double base = values[0] * values[0] + 17.0 * values[0];
      for (double v : values) {
        const long n = static_cast<long>(v);
        const long macs = n * n + 17L * n;
        report << n << ',' << macs << ',' << fmt(macs / base, "%.17g") << "\n";
        table << n << "  " << macs << "  " << fmt(macs / base) << "\n";
      }
    } else if (a.sweep == "rate") {
      const int n_runs = static_cast<int>(values.size()) * a.seeds;
      std::vector<RunOutcome> out(n_runs);
      parallel_for(n_runs, a.threads, [&](int i) {
        const int vi = i / a.seeds;
        SimConfig sim = stack.sim;
        sim.controller_rate_hz = values[vi];
        sim.seed = Rng::derive(a.seed, 0x72617465ull, static_cast<uint64_t>(i)).next_u64();
        out[i] = one_run(stack, lp, use_policy ? &net : nullptr, sim, t0, t1);
      });
      report << "rate_hz,median_rms_lateral_m,breach_fraction,runs\n";
      table << "rate    median_rms  breach\n";
      for (size_t vi = 0; vi < values.size(); ++vi) {
        std::vector<double> rms;
        int breaches = 0;
        for (int si = 0; si < a.seeds; ++si) {
          const RunOutcome& o = out[vi * a.seeds + si];
          rms.push_back(o.rms);
          breaches += (o.breached || o.aborted) ? 1 : 0;
        }
        const double frac = static_cast<double>(breaches) / a.seeds;
        report << values[vi] << ',' << fmt(median(rms), "%.17g") << ',' << fmt(frac, "%.17g")
               << ',' << a.seeds << "\n";
        table << fmt(values[vi]) << "  " << fmt(median(rms)) << "  " << fmt(frac) << "\n";
      }
    } else {
      // calibration / wind: nominal baseline, then perturbed runs per seed
      std::vector<RunOutcome> nominal(a.seeds), pert(a.seeds);
      std::vector<std::array<double, 4>> factors(a.seeds, {1, 1, 1, 1});
      const Vec3 dir = parse_dir(a.wind_dir);
      parallel_for(2 * a.seeds, a.threads, [&](int i) {
        const bool is_pert = i >= a.seeds;
        const int si = i % a.seeds;
        SimConfig sim = stack.sim;
        sim.seed = Rng::derive(a.seed, 0x65766c73ull, static_cast<uint64_t>(si)).next_u64();
        if (is_pert) {
          if (a.sweep == "calibration") {
            Rng rng = Rng::derive(a.seed, 0x63616cull, static_cast<uint64_t>(si));
            for (int j = 0; j < 4; ++j) {
              sim.true_cal_scale[j] = 1.0 + rng.uniform(-a.error, a.error);
            }
            factors[si] = sim.true_cal_scale;
          } else {
            sim.disturbance.force_bias += stack.robot.c_d_tra * a.wind_speed * dir;
          }
        }
        (is_pert ? pert : nominal)[i % a.seeds] = one_run(stack, lp, use_policy ? &net : nullptr,
                                                          sim, t0, t1);
      });
      report << "seed_index,nominal_rms_m,perturbed_rms_m,inflation,perturbed_breach";
      if (a.sweep == "calibration") report << ",f0,f1,f2,f3";
      report << "\n";
      std::vector<double> inflations;
      for (int si = 0; si < a.seeds; ++si) {
        const double infl = pert[si].rms / std::max(nominal[si].rms, 1e-12);
        inflations.push_back(infl);
        report << si << ',' << fmt(nominal[si].rms, "%.17g") << ',' << fmt(pert[si].rms, "%.17g")
               << ',' << fmt(infl, "%.17g") << ',' << (pert[si].breached || pert[si].aborted);
        if (a.sweep == "calibration") {
          for (double fct : factors[si]) report << ',' << fmt(fct, "%.17g");
        }
        report << "\n";
      }
      table << "median inflation " << fmt(median(inflations)) << "\n";
    }

    report.close();
    std::cout << table.str() << "wrote " << a.out_dir << "/report.csv\n";
  } catch (const std::exception& e) {
    return fail_numeric(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flapping-wing flight stack harness"};
  app.require_subcommand(1);

  TrajgenArgs tg;
  auto* tg_cmd = app.add_subcommand("trajgen", "generate a reference trajectory from a preset");
  tg_cmd->add_option("--scenario", tg.scenario, "scenario preset JSON")->required();
  tg_cmd->add_option("--config", tg.config, "stack config JSON")->required();
  tg_cmd->add_option("--seed", tg.seed, "RNG seed (recorded)")->required();
  tg_cmd->add_option("--out", tg.out, "output trajectory CSV")->required();

  ExpertArgs ex;
  auto* ex_cmd = app.add_subcommand("expert", "record a nominal expert demonstration");
  ex_cmd->add_option("--trajectory", ex.trajectory, "trajectory CSV")->required();
  ex_cmd->add_option("--config", ex.config, "stack config JSON")->required();
  ex_cmd->add_option("--seed", ex.seed, "RNG seed (recorded)")->required();
  ex_cmd->add_option("--out", ex.out, "output demo file")->required();
  ex_cmd->add_flag("--require-convergence", ex.require_convergence,
                   "fail if any solve does not converge");

  TubeArgs tb;
  auto* tb_cmd = app.add_subcommand("tube", "estimate the robust tube by sampled rollouts");
  tb_cmd->add_option("--trajectory", tb.trajectory, "trajectory CSV")->required();
  tb_cmd->add_option("--config", tb.config, "stack config JSON")->required();
  tb_cmd->add_option("--seed", tb.seed, "RNG seed")->required();
  tb_cmd->add_option("--out", tb.out, "output tube file")->required();
  tb_cmd->add_option("--rollouts", tb.rollouts, "override rollout count");
  tb_cmd->add_option("--wind-speed", tb.wind_speed, "bias the disturbance set for wind, m/s");
  tb_cmd->add_option("--wind-dir", tb.wind_dir, "wind direction x,y,z");

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "behavior cloning plus on-policy fine-tuning");
  tr_cmd->add_option("--trajectory", tr.trajectory, "trajectory CSV")->required();
  tr_cmd->add_option("--tube", tr.tube, "tube file")->required();
  tr_cmd->add_option("--config", tr.config, "stack config JSON")->required();
  tr_cmd->add_option("--seed", tr.seed, "RNG seed")->required();
  tr_cmd->add_option("--out-dir", tr.out_dir, "output directory")->required();
  tr_cmd->add_option("--hidden", tr.hidden, "hidden layer width");
  tr_cmd->add_option("--demos", tr.demos, "fine-tuning demonstrations");
  tr_cmd->add_option("--n-per-step", tr.n_per_step, "augmented samples per timestep");
  tr_cmd->add_flag("--bc-only", tr.bc_only, "skip fine-tuning");

  SimulateArgs si;
  auto* si_cmd = app.add_subcommand("simulate", "closed-loop run with full actuation and sensing");
  si_cmd->add_option("--trajectory", si.trajectory, "trajectory CSV")->required();
  si_cmd->add_option("--tube", si.tube, "tube file")->required();
  si_cmd->add_option("--config", si.config, "stack config JSON")->required();
  si_cmd->add_option("--seed", si.seed, "RNG seed")->required();
  si_cmd->add_option("--out-dir", si.out_dir, "output directory")->required();
  si_cmd->add_option("--controller", si.controller, "expert | policy");
  si_cmd->add_option("--policy", si.policy, "policy file for --controller policy");
  si_cmd->add_option("--rate", si.rate, "controller rate override, Hz");
  si_cmd->add_option("--window", si.window, "metrics window t0,t1 in seconds");
  si_cmd->add_option("--wind-speed", si.wind_speed, "constant wind, m/s");
  si_cmd->add_option("--wind-dir", si.wind_dir, "wind direction x,y,z");
  si_cmd->add_option("--cal-scale", si.cal_scale, "true per-actuator calibration factors a,b,c,d");
  si_cmd->add_option("--allocation", si.allocation, "corrected | literal");
  si_cmd->add_flag("--no-disturbances", si.no_disturbances, "disable the random-walk wrench");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "sweeps and aggregate reports");
  ev_cmd->add_option("--sweep", ev.sweep, "rate | nn-size | calibration | wind")->required();
  ev_cmd->add_option("--trajectory", ev.trajectory, "trajectory CSV");
  ev_cmd->add_option("--tube", ev.tube, "tube file");
  ev_cmd->add_option("--config", ev.config, "stack config JSON")->required();
  ev_cmd->add_option("--seed", ev.seed, "RNG seed")->required();
  ev_cmd->add_option("--out-dir", ev.out_dir, "output directory")->required();
  ev_cmd->add_option("--controller", ev.controller, "expert | policy");
  ev_cmd->add_option("--policy", ev.policy, "policy file");
  ev_cmd->add_option("--values", ev.values, "sweep values, comma separated");
  ev_cmd->add_option("--window", ev.window, "metrics window t0,t1");
  ev_cmd->add_option("--seeds", ev.seeds, "runs per sweep point");
  ev_cmd->add_option("--threads", ev.threads, "parallel simulations");
  ev_cmd->add_option("--error", ev.error, "calibration error magnitude");
  ev_cmd->add_option("--wind-speed", ev.wind_speed, "wind speed, m/s");
  ev_cmd->add_option("--wind-dir", ev.wind_dir, "wind direction x,y,z");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUser;
  }

  if (tg_cmd->parsed()) return cmd_trajgen(tg);
  if (ex_cmd->parsed()) return cmd_expert(ex);
  if (tb_cmd->parsed()) return cmd_tube(tb);
  if (tr_cmd->parsed()) return cmd_train(tr);
  if (si_cmd->parsed()) return cmd_simulate(si);
  if (ev_cmd->parsed()) return cmd_evaluate(ev);
  return kExitUser;
}
