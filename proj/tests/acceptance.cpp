// Acceptance suite: one pass/fail line per criterion. Returns nonzero if any
// criterion fails. Instance generation, oracles, and tolerances are pinned
// here so regressions surface as explicit criterion failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <string>
#include <vector>

#include "treeflow/closed_loop.hpp"
#include "treeflow/distributed.hpp"
#include "treeflow/downstream.hpp"
#include "treeflow/microgrid.hpp"
#include "treeflow/minimax_lp.hpp"
#include "treeflow/scenario.hpp"

using namespace treeflow;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  if (!pass) ++g_failures;
}

FlowNetwork make_instance(std::uint64_t seed, int n, int n_s,
                          double halfwidth = 0.2) {
  return build_scenario(generate_random_instance(seed, n, n_s, halfwidth))
      .model.net;
}

// Longest path length (in edges) of the tree, via two breadth-first sweeps.
int tree_diameter(const FlowNetwork& net) {
  auto farthest = [&](NodeId start) {
    std::vector<int> dist(net.num_nodes(), -1);
    std::deque<NodeId> queue{start};
    dist[start] = 0;
    NodeId far = start;
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      if (dist[u] > dist[far]) far = u;
      for (const auto& [v, e] : net.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    return std::pair<NodeId, int>{far, dist[far]};
  };
  auto [end_a, _] = farthest(0);
  return farthest(end_a).second;
}

std::vector<double> perturbed_suppliers(const FlowNetwork& net,
                                        std::uint64_t& state) {
  auto next = [&state] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return ((state >> 11) * (1.0 / 9007199254740992.0)) * 2.0 - 1.0;
  };
  auto m = net.commodity();
  auto suppliers = net.suppliers();
  std::vector<double> delta(suppliers.size());
  double sum = 0.0;
  for (auto& d : delta) {
    d = next();
    sum += d;
  }
  for (auto& d : delta) d -= sum / static_cast<double>(delta.size());
  double scale = 1.0;
  for (size_t k = 0; k < suppliers.size(); ++k) {
    if (delta[k] < 0.0) scale = std::min(scale, 0.5 * m[suppliers[k]] / -delta[k]);
  }
  for (size_t k = 0; k < suppliers.size(); ++k) m[suppliers[k]] += scale * delta[k];
  return m;
}

void criterion_1() {
  auto start = std::chrono::steady_clock::now();
  double worst_pair = 0.0, worst_residual = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    int n = 3 + static_cast<int>(seed % 48);
    int n_s = 2 + static_cast<int>(seed % std::max(1, n - 2));
    auto net = make_instance(seed, n, n_s);
    auto a = solve_flows(net);
    auto b = leaf_elimination_oracle(net);
    std::vector<double> residual(net.commodity());
    for (int e = 0; e < net.num_edges(); ++e) {
      worst_pair = std::max(worst_pair, std::abs(a[e] - b[e]));
      residual[net.edge(e).a] -= a[e];
      residual[net.edge(e).b] += a[e];
    }
    for (double r : residual) worst_residual = std::max(worst_residual, std::abs(r));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  bool pass = worst_pair <= 1e-10 && worst_residual <= 1e-10 && secs < 10.0;
  report(1, pass,
         "500 trees: solver-vs-oracle gap " + std::to_string(worst_pair) +
             ", conservation residual " + std::to_string(worst_residual) +
             ", " + std::to_string(secs) + " s");
}

void criterion_2() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto net = make_instance(seed, 6 + static_cast<int>(seed % 10),
                             2 + static_cast<int>(seed % 3));
    auto base = solve_flows(net);
    OrientationView view(net, base);
    std::uint64_t state = seed + 1;
    for (int trial = 0; trial < 100; ++trial) {
      auto f = solve_flows(net, perturbed_suppliers(net, state));
      for (int e = 0; e < net.num_edges(); ++e) {
        if (!view.controllable(e)) {
          worst = std::max(worst, std::abs(f[e] - base[e]));
        }
      }
    }
  }
  report(2, worst <= 1e-10,
         "uncontrollable flows moved at most " + std::to_string(worst) +
             " across 20000 supplier perturbations");
}

void criterion_3() {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto net = make_instance(seed + 3000, 5 + static_cast<int>(seed % 16),
                             2 + static_cast<int>(seed % 4));
    auto flows = solve_flows(net);
    OrientationView view(net, flows);
    std::vector<std::vector<char>> covered(
        net.num_nodes(), std::vector<char>(net.num_nodes(), 0));
    for (NodeId s : net.suppliers()) {
      for (const auto& d : downstream(net, view, s)) covered[d.from][d.to] = 1;
    }
    auto expected = view.directed_controllable(net);
    size_t covered_count = 0;
    for (const auto& row : covered) {
      covered_count += static_cast<size_t>(
          std::count(row.begin(), row.end(), static_cast<char>(1)));
    }
    bool equal = covered_count == expected.size();
    for (const auto& d : expected) equal = equal && covered[d.from][d.to];
    if (!equal) {
      report(3, false, "coverage mismatch at seed " + std::to_string(seed));
      return;
    }
    ++checked;
  }
  report(3, true,
         "supplier downstreams cover the directed controllable set on " +
             std::to_string(checked) + " instances");
}

void criterion_4() {
  int qualifying = 0;
  std::uint64_t seed = 0;
  while (qualifying < 200 && seed < 20000) {
    auto net = make_instance(seed + 4000, 5 + static_cast<int>(seed % 12),
                             2 + static_cast<int>(seed % 3));
    ++seed;
    auto flows = solve_flows(net);
    OrientationView view(net, flows);
    auto rpt = max_downstream_flows(net, view, flows);
    bool all_positive = true;
    for (NodeId s : net.suppliers()) all_positive = all_positive && rpt.phi[s] > 0;
    if (!all_positive) continue;
    ++qualifying;
    int critical = static_cast<int>(std::count(
        rpt.cluster_critical.begin(), rpt.cluster_critical.end(),
        static_cast<char>(1)));
    if (critical < 1) {
      report(4, false,
             "no critical consumer cluster at seed " + std::to_string(seed - 1));
      return;
    }
  }
  report(4, qualifying == 200,
         std::to_string(qualifying) +
             " all-positive-phi instances each have a critical consumer cluster");
}

void criterion_5() {
  const double k_phi = 200.0;
  double worst_err = 0.0;
  int worst_sweeps = 0;
  bool beta_ok = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto net = make_instance(seed + 5000, 5 + static_cast<int>(seed % 20),
                             2 + static_cast<int>(seed % 4));
    auto flows = solve_flows(net);
    OrientationView view(net, flows);
    auto target = phi_by_recursion(net, view, flows);

    BetaPropagation beta(net);
    int sweeps = beta.run(net);
    worst_sweeps = std::max(worst_sweeps, sweeps - (net.num_nodes() - 2));
    for (const auto& e : net.edges()) {
      beta_ok = beta_ok &&
                beta.value(net, e.a, e.b) == supplier_indicator(net, e.a, e.b) &&
                beta.value(net, e.b, e.a) == supplier_indicator(net, e.b, e.a);
    }

    EstimatorState state(net.num_nodes());
    double dt = 0.1 / k_phi;
    int steps = static_cast<int>(
        std::llround(10.0 * tree_diameter(net) / k_phi / dt));
    for (int s = 0; s < steps; ++s) {
      step_estimator(net, beta, flows, state, dt, k_phi);
    }
    for (NodeId i = 0; i < net.num_nodes(); ++i) {
      worst_err = std::max(worst_err, std::abs(state.phi_hat[i] - target[i]));
    }
  }
  bool pass = worst_err <= 1e-6 && worst_sweeps <= 0 && beta_ok;
  report(5, pass,
         "estimator error " + std::to_string(worst_err) +
             " after 10 depths / k_phi; indicator fixed point exact, sweeps "
             "within N - 2");
}

struct SweepOutcome {
  int passed = 0;
  int total = 0;
  double worst_gap = 0.0;
  double worst_spread = 0.0;
  std::vector<std::uint64_t> failures;
};

// Supplier max-downstream-flow spread at given generator powers, with the
// synchronized-frequency shift applied to the injections.
double phi_spread_at(const GridModel& model, const std::vector<double>& power) {
  const auto& net = model.net;
  auto suppliers = net.suppliers();
  double droop_sum = 0.0, p_sum = 0.0;
  for (NodeId s : suppliers) droop_sum += model.droop[s];
  for (NodeId c : net.consumers()) p_sum += net.commodity(c);
  for (double p : power) p_sum += p;
  double omega = p_sum / droop_sum;
  std::vector<double> m(net.num_nodes());
  for (NodeId i = 0; i < net.num_nodes(); ++i) {
    m[i] = net.is_supplier(i) ? -omega * model.droop[i] : net.commodity(i);
  }
  for (size_t k = 0; k < suppliers.size(); ++k) m[suppliers[k]] += power[k];
  auto flows = solve_flows(net, m);
  OrientationView view(net, flows);
  auto rep = max_downstream_flows(net, view, flows);
  double lo = 1e300, hi = 0.0;
  for (NodeId s : suppliers) {
    lo = std::min(lo, rep.phi[s]);
    hi = std::max(hi, rep.phi[s]);
  }
  return hi - lo;
}

SweepOutcome closed_loop_sweep(int want, double halfwidth, bool require_interior,
                               double spread_limit) {
  SweepOutcome out;
  std::uint64_t seed = 0;
  while (out.total < want && seed < 10000) {
    std::uint64_t s = seed++;
    auto cfg = generate_random_instance(s + 6000, 10,
                                        2 + static_cast<int>(s % 3), halfwidth);
    auto built = build_scenario(cfg);
    auto lp = solve_minimax_microgrid(built.model.net, built.model.droop,
                                      built.model.p_min, built.model.p_max);
    if (lp.status != MinimaxStatus::Optimal) continue;
    if (require_interior) {
      bool binding = false;
      auto suppliers = built.model.net.suppliers();
      for (size_t k = 0; k < suppliers.size(); ++k) {
        double lo = built.model.p_min[suppliers[k]];
        double hi = built.model.p_max[suppliers[k]];
        double margin = 1e-4 * (hi - lo);
        if (lp.supplier_commodity[k] < lo + margin ||
            lp.supplier_commodity[k] > hi - margin) {
          binding = true;
        }
      }
      if (binding) continue;
      // The consensus characterization only applies when an equal-phi
      // optimum exists inside the box; skip instances where it does not
      // (e.g. a supplier pinned at a bound while importing).
      if (phi_spread_at(built.model, lp.supplier_commodity) > 1e-6) continue;
    }
    ++out.total;
    auto verdict = compare_oracle(cfg, 30.0);
    const auto& w = verdict.windows.front();
    out.worst_gap = std::max(out.worst_gap, w.relative_gap);
    out.worst_spread = std::max(out.worst_spread, w.phi_spread);
    bool ok = w.lp_feasible && w.relative_gap <= 1e-3 &&
              (spread_limit <= 0.0 || w.phi_spread <= spread_limit);
    if (ok) {
      ++out.passed;
    } else {
      out.failures.push_back(s + 6000);
    }
  }
  return out;
}

void criterion_6() {
  auto start = std::chrono::steady_clock::now();
  auto out = closed_loop_sweep(100, 0.5, /*require_interior=*/true, 1e-4);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  bool pass = out.total == 100 && out.passed == 100 && secs < 120.0;
  report(6, pass,
         std::to_string(out.passed) + "/" + std::to_string(out.total) +
             " interior-optimum instances matched the LP (worst gap " +
             std::to_string(out.worst_gap) + ", worst spread " +
             std::to_string(out.worst_spread) + ", " + std::to_string(secs) +
             " s)");
}

void criterion_7() {
  auto out = closed_loop_sweep(100, 0.005, /*require_interior=*/false, 0.0);
  bool pass = out.total == 100 && out.passed >= 95;
  std::string detail = std::to_string(out.passed) + "/" +
                       std::to_string(out.total) +
                       " tight-box instances matched the LP (worst gap " +
                       std::to_string(out.worst_gap) + ")";
  for (auto s : out.failures) detail += "; exceeded at seed " + std::to_string(s);
  report(7, pass, detail);
}

void criterion_8() {
  double worst_flow = 0.0, worst_freq = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto model = build_scenario(generate_random_instance(
                                    seed + 8000, 8 + static_cast<int>(seed % 6),
                                    2 + static_cast<int>(seed % 3)))
                     .model;
    auto ss = steady_state(model);
    GridSimulator sim(&model);
    sim.init_flat();
    double dt = 2e-4;
    double err = 1e300;
    while (sim.time() < 200.0) {
      for (int i = 0; i < 1000; ++i) sim.step(dt);
      auto xi = sim.line_flows();
      err = 0.0;
      for (int e = 0; e < xi.size(); ++e) {
        err = std::max(err, std::abs(xi[e] - ss.flows[e]));
      }
      if (err <= 1e-8) break;
    }
    worst_flow = std::max(worst_flow, err);
    for (double freq : sim.generator_frequencies()) {
      worst_freq = std::max(worst_freq, std::abs(freq - ss.omega));
    }
  }
  bool pass = worst_flow <= 1e-6 && worst_freq <= 1e-6;
  report(8, pass,
         "20 grids synchronized: worst flow error " + std::to_string(worst_flow) +
             ", worst frequency error " + std::to_string(worst_freq));
}

RunReport run_shipped(const ScenarioConfig& cfg, const std::string& controller,
                      bool baseline) {
  RunOptions options;
  options.controller = controller;
  options.force_baseline = baseline;
  return run_scenario(cfg, options);
}

void criteria_9_and_10() {
  auto cfg = load_config_file(std::string(TF_CONFIG_DIR) + "/cigre_feeder.json");
  auto dist = run_shipped(cfg, "P", false);
  auto base = run_shipped(cfg, "none", true);
  auto droop = run_shipped(cfg, "D", false);

  bool shape_ok = dist.windows.size() == 3 && base.windows.size() == 3 &&
                  droop.windows.size() == 3;
  bool ordering = shape_ok &&
                  dist.windows[1].max_j < base.windows[1].max_j;
  bool steady_match = shape_ok;
  double worst_steady = 0.0;
  for (size_t w = 0; shape_ok && w < 3; ++w) {
    double gap = std::abs(dist.windows[w].steady_j - base.windows[w].steady_j);
    worst_steady = std::max(worst_steady, gap);
    steady_match = steady_match && gap <= 1e-3;
  }
  report(9, ordering && steady_match,
         shape_ok
             ? "step-window max J " + std::to_string(dist.windows[1].max_j) +
                   " (distributed) vs " + std::to_string(base.windows[1].max_j) +
                   " (delayed baseline); steady J gaps within " +
                   std::to_string(worst_steady)
             : "unexpected window count");

  bool d_match = shape_ok;
  double worst_d = 0.0;
  for (size_t w = 0; shape_ok && w < 3; ++w) {
    double gap = std::abs(droop.windows[w].steady_j - dist.windows[w].steady_j);
    worst_d = std::max(worst_d, gap);
    d_match = d_match && gap <= 1e-3;
  }
  report(10, d_match,
         shape_ok ? "droop-mode steady J within " + std::to_string(worst_d) +
                        " of power-mode in every window"
                  : "unexpected window count");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criteria_9_and_10();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
