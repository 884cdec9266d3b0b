#pragma once

#include <string>

#include "fwmpc/learning/mlp.hpp"
#include "fwmpc/nmpc/demo.hpp"
#include "fwmpc/sim/metrics.hpp"
#include "fwmpc/sim/simulator.hpp"
#include "fwmpc/trajgen/trajectory.hpp"
#include "fwmpc/tube/tube.hpp"

// Artifact readers/writers. Every format embeds the config hash and seed that
// produced the data so downstream stages can refuse mismatched inputs. All
// writers are deterministic: identical data produces identical bytes.

namespace fwmpc {

// one row per timestep: t, 13 state components, 3 inputs, 3 body-x components
void save_trajectory_csv(const std::string& path, const ReferenceTrajectory& ref);
ReferenceTrajectory load_trajectory_csv(const std::string& path);

void save_tube(const std::string& path, const Tube& tube);
Tube load_tube(const std::string& path);

// versioned flat binary: header (layer sizes, activation tag, normalization),
// then row-major weight blocks, little-endian 8-byte floats
void save_policy(const std::string& path, const PolicyNet& net);
PolicyNet load_policy(const std::string& path);

void save_demo(const std::string& path, const ExpertDemo& demo);
ExpertDemo load_demo(const std::string& path);

void save_trace(const std::string& path, const SimTrace& trace);
SimTrace load_trace(const std::string& path);
void save_trace_csv(const std::string& path, const SimTrace& trace);

// flat key = value text block, appendable into reports
std::string metrics_to_text(const MetricsReport& m);

}  // namespace fwmpc
