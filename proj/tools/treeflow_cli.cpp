// Command-line front end: validate/analyze/solve configs, run scenarios with
// the distributed controller or the delayed centralized baseline, sweep random
// instances against the LP oracle, and compare steady windows.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "treeflow/scenario.hpp"

namespace {

using namespace treeflow;

std::pair<GridModel, BuiltScenario> load_model(const std::string& path) {
  auto cfg = load_config_file(path);
  auto built = build_scenario(cfg);
  return {built.model, built};
}

// Effective injections at the nominal operating point: m = P - omega * D.
std::vector<double> nominal_injections(const GridModel& model) {
  double p_sum = 0.0, d_sum = 0.0;
  for (NodeId i = 0; i < model.net.num_nodes(); ++i) {
    p_sum += model.power[i];
    if (model.net.is_supplier(i)) d_sum += model.droop[i];
  }
  double omega = p_sum / d_sum;
  std::vector<double> m(model.net.num_nodes());
  for (NodeId i = 0; i < model.net.num_nodes(); ++i) {
    m[i] = model.power[i] -
           (model.net.is_supplier(i) ? omega * model.droop[i] : 0.0);
  }
  return m;
}

int cmd_validate(const std::string& path) {
  auto cfg = load_config_file(path);
  build_scenario(cfg);
  std::cout << "config ok: " << cfg.nodes.size() << " nodes, "
            << cfg.edges.size() << " edges, " << cfg.events.size()
            << " events\n";
  return 0;
}

int cmd_analyze(const std::string& path) {
  auto [model, built] = load_model(path);
  auto m = nominal_injections(model);
  auto flows = solve_flows(model.net, m);
  OrientationView view(model.net, flows);
  auto report = max_downstream_flows(model.net, view, flows);

  std::cout << "safety margin J = " << report.safety_margin << "\n\nedges:\n";
  for (int e = 0; e < model.net.num_edges(); ++e) {
    const auto& edge = model.net.edge(e);
    std::cout << "  {" << built.node_ids[edge.a] << ", "
              << built.node_ids[edge.b] << "}  flow=" << flows[e]
              << "  ratio=" << std::abs(flows[e]) / model.net.capacity(e)
              << (view.controllable(e) ? "  controllable" : "") << "\n";
  }
  std::cout << "\nnodes (phi = max downstream flow):\n";
  for (NodeId i = 0; i < model.net.num_nodes(); ++i) {
    std::cout << "  node " << built.node_ids[i]
              << (model.net.is_supplier(i) ? " [generator]" : " [load]")
              << "  phi=" << report.phi[i];
    if (report.mde[i]) {
      std::cout << "  mde=(" << built.node_ids[report.mde[i]->from] << " -> "
                << built.node_ids[report.mde[i]->to] << ")";
    }
    std::cout << "\n";
  }
  std::cout << "\nconsumer clusters:\n";
  for (size_t c = 0; c < report.consumer_clusters.size(); ++c) {
    std::cout << "  {";
    for (size_t k = 0; k < report.consumer_clusters[c].size(); ++k) {
      std::cout << (k ? ", " : "")
                << built.node_ids[report.consumer_clusters[c][k]];
    }
    std::cout << "}" << (report.cluster_critical[c] ? "  critical" : "") << "\n";
  }
  return 0;
}

int cmd_solve(const std::string& path) {
  auto [model, built] = load_model(path);
  auto sol = solve_minimax_microgrid(model.net, model.droop, model.p_min,
                                     model.p_max);
  if (sol.status != MinimaxStatus::Optimal) {
    std::cout << "infeasible: " << sol.certificate << "\n";
    return 1;
  }
  std::cout << "J* = " << sol.objective
            << (sol.boundary_feasible ? "  (at a capacity boundary)" : "")
            << "\ngenerator setpoints:\n";
  auto suppliers = model.net.suppliers();
  for (size_t k = 0; k < suppliers.size(); ++k) {
    std::cout << "  P_" << built.node_ids[suppliers[k]] << " = "
              << sol.supplier_commodity[k] << "\n";
  }
  std::cout << "edge ratios:\n";
  for (int e = 0; e < model.net.num_edges(); ++e) {
    const auto& edge = model.net.edge(e);
    std::cout << "  {" << built.node_ids[edge.a] << ", "
              << built.node_ids[edge.b]
              << "}  " << std::abs(sol.flows[e]) / model.net.capacity(e) << "\n";
  }
  return 0;
}

int cmd_run(const std::string& path, const std::string& mode, bool baseline,
            const std::string& out_dir, bool fail_on_fault) {
  auto cfg = load_config_file(path);
  RunOptions options;
  options.out_dir = out_dir;
  options.controller = mode;
  options.force_baseline = baseline;
  auto report = run_scenario(cfg, options);
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  for (size_t k = 0; k < report.windows.size(); ++k) {
    const auto& w = report.windows[k];
    std::cout << "window " << k + 1 << ": t=[" << w.t_start << ", " << w.t_end
              << ")  steady_J=" << w.steady_j << "  max_J=" << w.max_j
              << "  lp_J=" << w.lp_objective << "\n";
  }
  std::cout << "max_J_overall = " << report.max_j_overall
            << (report.fault ? "  FAULT (J >= 1)" : "") << "\n";
  if (!report.timeseries_path.empty()) {
    std::cout << "wrote " << report.timeseries_path << "\n";
  }
  return (fail_on_fault && report.fault) ? 2 : 0;
}

int cmd_compare(const std::string& path) {
  auto cfg = load_config_file(path);
  auto verdict = compare_oracle(cfg);
  for (size_t k = 0; k < verdict.windows.size(); ++k) {
    const auto& w = verdict.windows[k];
    std::cout << "window " << k + 1 << ": J_dist=" << w.j_distributed
              << "  J_lp=" << w.j_lp << "  gap=" << w.relative_gap
              << "  phi_spread=" << w.phi_spread
              << (w.converged ? "" : "  (not converged)")
              << (w.lp_feasible ? "" : "  (lp infeasible)") << "\n";
  }
  return verdict.all_within(1e-3) ? 0 : 1;
}

int cmd_sweep(const std::string& seeds, int n, int n_s, double box_halfwidth) {
  auto dots = seeds.find("..");
  if (dots == std::string::npos) {
    std::cerr << "--seeds expects a range a..b\n";
    return 1;
  }
  std::uint64_t lo = std::stoull(seeds.substr(0, dots));
  std::uint64_t hi = std::stoull(seeds.substr(dots + 2));
  int passed = 0, total = 0;
  std::vector<std::uint64_t> failures;
  for (std::uint64_t seed = lo; seed <= hi; ++seed) {
    auto cfg = generate_random_instance(seed, n, n_s, box_halfwidth);
    auto verdict = compare_oracle(cfg);
    bool ok = verdict.all_within(1e-3);
    const auto& w = verdict.windows.front();
    std::cout << "seed " << seed << ": J_dist=" << w.j_distributed
              << "  J_lp=" << w.j_lp << "  gap=" << w.relative_gap
              << (ok ? "" : "  EXCEEDED") << "\n";
    ++total;
    if (ok) {
      ++passed;
    } else {
      failures.push_back(seed);
    }
  }
  std::cout << passed << "/" << total << " within 1e-3 of the LP optimum\n";
  for (auto seed : failures) std::cout << "exceeded: seed " << seed << "\n";
  return passed == total ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimax flow toolkit: centralized LP and distributed control "
               "on acyclic supplier/consumer networks"};
  app.require_subcommand(1);

  std::string config_path, mode, out_dir = "run_out", seeds = "0..19";
  bool baseline = false, fail_on_fault = false;
  int n = 12, n_s = 4;
  double box_halfwidth = 0.2;

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("config", config_path)->required();

  auto* analyze = app.add_subcommand(
      "analyze", "downstream report at the nominal operating point");
  analyze->add_option("config", config_path)->required();

  auto* solve = app.add_subcommand("solve", "centralized minimax LP");
  solve->add_option("config", config_path)->required();

  auto* run = app.add_subcommand("run", "simulate the closed loop");
  run->add_option("config", config_path)->required();
  run->add_option("--mode", mode, "controller: P, D, or none")
      ->check(CLI::IsMember({"P", "D", "none"}));
  run->add_flag("--baseline", baseline, "delayed centralized baseline");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--fail-on-fault", fail_on_fault,
                "exit nonzero when any J >= 1");

  auto* compare = app.add_subcommand(
      "compare", "distributed steady state vs LP optimum per window");
  compare->add_option("config", config_path)->required();

  auto* sweep = app.add_subcommand("sweep", "random-instance oracle sweep");
  sweep->add_option("--seeds", seeds, "seed range a..b");
  sweep->add_option("--n", n, "nodes per instance");
  sweep->add_option("--ns", n_s, "generators per instance");
  sweep->add_option("--box", box_halfwidth, "box half-width around nominal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config_path);
    if (*analyze) return cmd_analyze(config_path);
    if (*solve) return cmd_solve(config_path);
    if (*run) return cmd_run(config_path, mode, baseline, out_dir, fail_on_fault);
    if (*compare) return cmd_compare(config_path);
    if (*sweep) return cmd_sweep(seeds, n, n_s, box_halfwidth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
