#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "treeflow/minimax_lp.hpp"

using namespace treeflow;
using namespace tf_test;

namespace {

// Objective value J(m_s) at explicit supplier commodities.
double objective_at(const FlowNetwork& net, const std::vector<double>& m_s) {
  auto m = net.commodity();
  auto suppliers = net.suppliers();
  for (size_t k = 0; k < suppliers.size(); ++k) m[suppliers[k]] = m_s[k];
  auto flows = solve_flows(net, m);
  OrientationView view(net, flows);
  return safety_margin(net, view, flows);
}

// Exhaustive grid over the supplier box intersected with the balance plane
// (the last supplier absorbs the remainder). Step is a fraction of the range.
double grid_search(const FlowNetwork& net, double step_frac) {
  auto suppliers = net.suppliers();
  const int ns = static_cast<int>(suppliers.size());
  REQUIRE(ns <= 3);
  double demand = 0.0;
  for (NodeId c : net.consumers()) demand -= net.commodity(c);
  std::vector<double> lo(ns), hi(ns);
  for (int k = 0; k < ns; ++k) {
    lo[k] = net.supply_min(suppliers[k]);
    hi[k] = net.supply_max(suppliers[k]);
  }
  double best = 1e300;
  std::vector<double> m_s(ns);
  auto eval_tail = [&](auto&& self, int k) -> void {
    if (k == ns - 1) {
      double rest = demand;
      for (int i = 0; i < ns - 1; ++i) rest -= m_s[i];
      if (rest < lo[k] - 1e-12 || rest > hi[k] + 1e-12) return;
      m_s[k] = rest;
      best = std::min(best, objective_at(net, m_s));
      return;
    }
    int steps = static_cast<int>(1.0 / step_frac);
    for (int i = 0; i <= steps; ++i) {
      m_s[k] = lo[k] + (hi[k] - lo[k]) * i / steps;
      self(self, k + 1);
    }
  };
  eval_tail(eval_tail, 0);
  return best;
}

}  // namespace

TEST_CASE("symmetric path splits the demand evenly") {
  auto net = make_net("SCCS", path_edges(4), {2, 2, 2}, {1, -1, -1, 1},
                      {1e-9, 1, 1, 1e-9}, {2, 1, 1, 2});
  auto sol = solve_minimax(net);
  REQUIRE(sol.status == MinimaxStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.supplier_commodity[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.supplier_commodity[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(!sol.boundary_feasible);
}

TEST_CASE("asymmetric capacities shift the optimal split") {
  // Capacities (1, 2, 2): minimizing max((m_0)/1, |m_0 - 1|/2, (2 - m_0)/2)
  // lands at m = (2/3, 4/3) with J = 2/3.
  auto net = make_net("SCCS", path_edges(4), {1, 2, 2}, {1, -1, -1, 1},
                      {1e-9, 1, 1, 1e-9}, {2, 1, 1, 2});
  auto sol = solve_minimax(net);
  REQUIRE(sol.status == MinimaxStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(sol.supplier_commodity[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
  CHECK(sol.supplier_commodity[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("grid search confirms the asymmetric optimum") {
  auto net = make_net("SCCS", path_edges(4), {1, 2, 2}, {1, -1, -1, 1},
                      {1e-9, 1, 1, 1e-9}, {2, 1, 1, 2});
  auto sol = solve_minimax(net);
  double grid = grid_search(net, 1e-3);
  CHECK(std::abs(grid - sol.objective) <= 2e-3);
}

TEST_CASE("grid search oracle on random instances") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    int ns = 2 + static_cast<int>(seed % 2);
    auto net = random_net(seed + 20, 8, ns, 0.4);
    auto sol = solve_minimax(net);
    REQUIRE(sol.status == MinimaxStatus::Optimal);
    double grid = grid_search(net, ns == 2 ? 1e-3 : 4e-3);
    CHECK(grid >= sol.objective - 1e-7);
    CHECK(std::abs(grid - sol.objective) <= (ns == 2 ? 2e-3 : 8e-3));
  }
}

TEST_CASE("the optimum lower-bounds every feasible point") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto net = random_net(seed + 40, 10, 3, 0.4);
    auto sol = solve_minimax(net);
    REQUIRE(sol.status == MinimaxStatus::Optimal);
    for (int trial = 0; trial < 25; ++trial) {
      auto m = perturb_suppliers(net, rng);
      std::vector<double> m_s;
      bool in_box = true;
      auto suppliers = net.suppliers();
      for (NodeId s : suppliers) {
        m_s.push_back(m[s]);
        in_box = in_box && m[s] >= net.supply_min(s) && m[s] <= net.supply_max(s);
      }
      if (!in_box) continue;
      CHECK(objective_at(net, m_s) >= sol.objective - 1e-7);
    }
  }
}

TEST_CASE("supplier phi values equalize when no box bound binds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto net = random_net(seed + 60, 9, 3, 0.9);
    auto sol = solve_minimax(net);
    REQUIRE(sol.status == MinimaxStatus::Optimal);
    bool binding = false;
    auto suppliers = net.suppliers();
    for (size_t k = 0; k < suppliers.size(); ++k) {
      double lo = net.supply_min(suppliers[k]);
      double hi = net.supply_max(suppliers[k]);
      double v = sol.supplier_commodity[k];
      if (v - lo < 1e-6 * (hi - lo) || hi - v < 1e-6 * (hi - lo)) binding = true;
    }
    if (binding) continue;
    auto m = net.commodity();
    for (size_t k = 0; k < suppliers.size(); ++k) {
      m[suppliers[k]] = sol.supplier_commodity[k];
    }
    auto flows = solve_flows(net, m);
    OrientationView view(net, flows);
    auto report = max_downstream_flows(net, view, flows);
    double lo = 1e300, hi = 0.0;
    for (NodeId s : suppliers) {
      lo = std::min(lo, report.phi[s]);
      hi = std::max(hi, report.phi[s]);
    }
    CHECK(hi - lo <= 1e-5);
  }
}

TEST_CASE("demand outside the box sum is certified infeasible") {
  auto net = make_net("SCCS", path_edges(4), {2, 2, 2}, {1, -1, -1, 1},
                      {0.1, 1, 1, 0.1}, {0.5, 1, 1, 0.5});
  auto sol = solve_minimax(net);  // demand 2 > 0.5 + 0.5
  CHECK(sol.status == MinimaxStatus::Infeasible);
  CHECK(!sol.certificate.empty());
}

TEST_CASE("capacity violations at the optimum are certified") {
  // Demand must cross edge {1, 2} whose capacity is too small.
  auto net = make_net("SCCS", path_edges(4), {2, 0.1, 2}, {1, -1, -1, 1},
                      {0.9, 1, 1, 0.2}, {1.8, 1, 1, 0.3});
  auto sol = solve_minimax(net);
  CHECK(sol.status == MinimaxStatus::Infeasible);
  CHECK(sol.boundary_feasible);
  CHECK(sol.certificate.find("capacity") != std::string::npos);
}

TEST_CASE("flow sensitivity reproduces the exact flows") {
  auto net = random_net(123, 14, 4);
  auto sens = flow_sensitivity(net);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto m = perturb_suppliers(net, rng);
    Eigen::VectorXd ms(sens.suppliers.size());
    for (size_t k = 0; k < sens.suppliers.size(); ++k) ms(k) = m[sens.suppliers[k]];
    Eigen::VectorXd predicted = sens.gain * ms + sens.offset;
    auto f = solve_flows(net, m);
    for (int e = 0; e < net.num_edges(); ++e) {
      CHECK(std::abs(predicted(e) - f[e]) <= 1e-9);
    }
  }
}

TEST_CASE("microgrid variant matches brute-force search over generator power") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto model = random_grid(seed + 200, 8, 2, 0.4);
    auto sol = solve_minimax_microgrid(model.net, model.droop, model.p_min,
                                       model.p_max);
    REQUIRE(sol.status == MinimaxStatus::Optimal);

    auto suppliers = model.net.suppliers();
    double droop_sum = 0.0;
    for (NodeId s : suppliers) droop_sum += model.droop[s];
    double load_total = 0.0;
    for (NodeId c : model.net.consumers()) load_total += model.net.commodity(c);

    auto eval = [&](double p0, double p1) {
      double omega = (p0 + p1 + load_total) / droop_sum;
      std::vector<double> m(model.net.num_nodes());
      for (NodeId i = 0; i < model.net.num_nodes(); ++i) {
        m[i] = model.net.is_supplier(i) ? -omega * model.droop[i]
                                        : model.net.commodity(i);
      }
      m[suppliers[0]] += p0;
      m[suppliers[1]] += p1;
      auto flows = leaf_elimination_oracle(model.net, m);
      OrientationView view(model.net, flows);
      return safety_margin(model.net, view, flows);
    };
    double best = 1e300;
    const int steps = 300;
    for (int i = 0; i <= steps; ++i) {
      double p0 = model.p_min[suppliers[0]] +
                  (model.p_max[suppliers[0]] - model.p_min[suppliers[0]]) * i / steps;
      for (int j = 0; j <= steps; ++j) {
        double p1 = model.p_min[suppliers[1]] +
                    (model.p_max[suppliers[1]] - model.p_min[suppliers[1]]) * j / steps;
        best = std::min(best, eval(p0, p1));
      }
    }
    CHECK(best >= sol.objective - 1e-7);
    CHECK(std::abs(best - sol.objective) <= 5e-3);
  }
}

TEST_CASE("microgrid solutions are deterministic") {
  auto model = random_grid(321, 12, 4);
  auto a = solve_minimax_microgrid(model.net, model.droop, model.p_min, model.p_max);
  auto b = solve_minimax_microgrid(model.net, model.droop, model.p_min, model.p_max);
  CHECK(a.supplier_commodity == b.supplier_commodity);
  CHECK(a.objective == b.objective);
}
