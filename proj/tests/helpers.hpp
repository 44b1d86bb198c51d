// Shared builders for the test suite.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "treeflow/scenario.hpp"

namespace tf_test {

using namespace treeflow;

// Roles given as a string, 'S' supplier / 'C' consumer. Wide default boxes.
inline FlowNetwork make_net(const std::string& roles_str,
                            std::vector<Edge> edges,
                            std::vector<double> capacities,
                            std::vector<double> commodity,
                            std::vector<double> supply_min = {},
                            std::vector<double> supply_max = {}) {
  const int n = static_cast<int>(roles_str.size());
  std::vector<Role> roles(n);
  for (int i = 0; i < n; ++i) {
    roles[i] = roles_str[i] == 'S' ? Role::Supplier : Role::Consumer;
  }
  if (supply_min.empty()) supply_min.assign(n, 1e-9);
  if (supply_max.empty()) supply_max.assign(n, 1e9);
  return FlowNetwork(n, std::move(roles), std::move(edges),
                     std::move(capacities), std::move(commodity),
                     std::move(supply_min), std::move(supply_max));
}

// Path 0-1-2-...-(n-1).
inline std::vector<Edge> path_edges(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return edges;
}

// Star with center 0 and leaves 1..n-1.
inline std::vector<Edge> star_edges(int n) {
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({0, i});
  return edges;
}

// Random valid network via the scenario generator (uniform Pruefer tree,
// balanced commodity, capacities targeting an uncontrolled margin in
// [0.3, 0.9]).
inline FlowNetwork random_net(std::uint64_t seed, int n, int n_s,
                              double box_halfwidth = 0.2) {
  auto cfg = generate_random_instance(seed, n, n_s, box_halfwidth);
  return build_scenario(cfg).model.net;
}

inline GridModel random_grid(std::uint64_t seed, int n, int n_s,
                             double box_halfwidth = 0.2) {
  auto cfg = generate_random_instance(seed, n, n_s, box_halfwidth);
  return build_scenario(cfg).model;
}

// Zero-sum perturbation of the supplier commodities, scaled to keep every
// supplier strictly positive.
inline std::vector<double> perturb_suppliers(const FlowNetwork& net,
                                             std::mt19937_64& rng) {
  auto m = net.commodity();
  auto suppliers = net.suppliers();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> delta(suppliers.size());
  double sum = 0.0;
  for (auto& d : delta) {
    d = unit(rng);
    sum += d;
  }
  for (auto& d : delta) d -= sum / static_cast<double>(delta.size());
  double scale = 1.0;
  for (size_t k = 0; k < suppliers.size(); ++k) {
    double head = m[suppliers[k]];
    if (delta[k] < 0.0) scale = std::min(scale, 0.5 * head / -delta[k]);
  }
  for (size_t k = 0; k < suppliers.size(); ++k) {
    m[suppliers[k]] += scale * delta[k];
  }
  return m;
}

}  // namespace tf_test
