/*
  Scenario configuration (JSON with comments), random instance generation,
  the event-driven runner with optional delayed centralized baseline, and the
  distributed-vs-LP comparison harness.
*/
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "treeflow/closed_loop.hpp"
#include "treeflow/minimax_lp.hpp"

namespace treeflow {

struct ConfigInvalid : Error {
  using Error::Error;
};

struct NodeSpec {
  int id = 0;
  Role role = Role::Consumer;
  double power = 0.0;
  double droop = 0.0;
  double p_min = 0.0, p_max = 0.0;
  double d_min = 0.0, d_max = 0.0;
};

struct EdgeSpec {
  int from = 0, to = 0;
  double capacity = 0.0;
  double coupling = 0.0;
};

struct EventSpec {
  double time = 0.0;
  int node = 0;
  double power = 0.0;
};

struct BaselineConfig {
  bool enabled = false;
  double resolve_period = 1.0;
  double apply_delay = 1.5;
};

struct SimConfig {
  double t_end = 18.0;
  double dt = 1e-3;
  int output_stride = 10;
  std::string controller = "P";  // "P" | "D" | "none"
  std::string backend = "dynamic";  // "dynamic" | "quasistatic"
  GainConfig gains;
  BaselineConfig baseline;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<EventSpec> events;
  SimConfig sim;
};

ScenarioConfig parse_config(const std::string& text);
std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig load_config_file(const std::string& path);

struct BuiltScenario {
  GridModel model;
  std::vector<int> node_ids;       // internal index -> config id
  std::map<int, int> id_to_index;  // config id -> internal index
  std::vector<EventSpec> events;   // node field remapped to internal index
};

// Validates and lowers a config; throws ConfigInvalid naming the field.
BuiltScenario build_scenario(const ScenarioConfig& config);

struct WindowSummary {
  double t_start = 0.0, t_end = 0.0;
  double steady_j = 0.0;  // J^xi at the end of the window
  double max_j = 0.0;     // max over time within the window
  double lp_objective = 0.0;
  bool lp_feasible = false;
};

struct RunReport {
  std::vector<WindowSummary> windows;
  double max_j_overall = 0.0;
  bool fault = false;  // any J^xi >= 1
  std::vector<std::string> warnings;
  std::string timeseries_path;
};

struct RunOptions {
  std::string out_dir;        // empty: no files written
  std::string controller;     // override sim.controller if nonempty
  bool force_baseline = false;
};

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

// Uniform random labeled tree via a Pruefer sequence, random roles, balanced
// demands, capacities scaled so the uncontrolled safety margin lands in
// [0.3, 0.9], and supplier boxes at (1 +- box_halfwidth) x nominal.
ScenarioConfig generate_random_instance(std::uint64_t seed, int n, int n_s,
                                        double box_halfwidth = 0.2);

struct WindowVerdict {
  double j_distributed = 0.0;
  double j_lp = 0.0;
  double relative_gap = 0.0;
  double phi_spread = 0.0;
  bool lp_feasible = false;
  bool converged = false;
};

struct CompareVerdict {
  std::vector<WindowVerdict> windows;
  bool all_within(double gap_tol) const;
};

// Runs the distributed loop (quasi-static flows) to steady state in each
// load window and compares against the centralized LP.
CompareVerdict compare_oracle(const ScenarioConfig& config,
                              double t_max_per_window = 40.0);

}  // namespace treeflow
