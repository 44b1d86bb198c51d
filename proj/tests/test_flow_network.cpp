#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "treeflow/flow_network.hpp"

using namespace treeflow;
using namespace tf_test;

TEST_CASE("flows on a path are fixed by conservation") {
  auto net = make_net("SCCS", path_edges(4), {10, 10, 10}, {1.5, -1, -1, 0.5});
  auto f = solve_flows(net);
  CHECK(f[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f[2] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("star: each supplier leaf sends its commodity to the center") {
  auto net = make_net("CSSS", star_edges(4), {10, 10, 10}, {-3, 1, 1, 1});
  auto f = solve_flows(net);
  // Reference orientation is 0 -> leaf, so inflow to the center is negative.
  for (int e = 0; e < 3; ++e) CHECK(f[e] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("leaf elimination matches on the path example") {
  auto net = make_net("SCCS", path_edges(4), {10, 10, 10}, {1.5, -1, -1, 0.5});
  auto a = solve_flows(net);
  auto b = leaf_elimination_oracle(net);
  for (int e = 0; e < net.num_edges(); ++e) CHECK(a[e] == doctest::Approx(b[e]));
}

TEST_CASE("a leaf's edge flow equals its own commodity") {
  // Leaf supplier 0 on a path: the first edge must carry exactly m_0.
  auto net = make_net("SCS", path_edges(3), {10, 10}, {1.0, -1.5, 0.5});
  auto f = leaf_elimination_oracle(net);
  CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("laplacian solve agrees with leaf elimination on random trees") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    int n = 10;
    auto net = random_net(seed, n, 2 + static_cast<int>(seed % 4));
    auto a = solve_flows(net);
    auto b = leaf_elimination_oracle(net);
    for (int e = 0; e < net.num_edges(); ++e) {
      CHECK(std::abs(a[e] - b[e]) <= 1e-10);
    }
  }
}

TEST_CASE("conservation residual stays below 1e-10") {
  auto net = random_net(7, 20, 5);
  auto f = solve_flows(net);
  auto b = incidence_matrix(net);
  Eigen::VectorXd m(net.num_nodes());
  for (NodeId i = 0; i < net.num_nodes(); ++i) m(i) = net.commodity(i);
  Eigen::VectorXd flows(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) flows(e) = f[e];
  CHECK((b * flows - m).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("antisymmetry of directional queries is exact") {
  auto net = random_net(3, 12, 3);
  auto f = solve_flows(net);
  for (const auto& e : net.edges()) {
    CHECK(f.at(net, e.a, e.b) == -f.at(net, e.b, e.a));
  }
}

TEST_CASE("flows are linear in the commodity") {
  auto net = random_net(11, 15, 4);
  std::mt19937_64 rng(99);
  auto m1 = perturb_suppliers(net, rng);
  auto m2 = perturb_suppliers(net, rng);
  std::vector<double> sum(m1);
  for (size_t i = 0; i < sum.size(); ++i) sum[i] += m2[i] - net.commodity(i);
  auto f1 = solve_flows(net, m1);
  auto f2 = solve_flows(net, m2);
  std::vector<double> base(net.commodity());
  auto f0 = solve_flows(net, base);
  auto fs = solve_flows(net, sum);
  for (int e = 0; e < net.num_edges(); ++e) {
    CHECK(std::abs(fs[e] - (f1[e] + f2[e] - f0[e])) <= 1e-9);
  }
}

TEST_CASE("unit dipole injections route along their own edge only") {
  // On a tree, injecting +1 / -1 at an edge's endpoints routes 1 through that
  // edge and nothing anywhere else.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto net = random_net(seed + 100, 3 + static_cast<int>(seed * 5), 2);
    for (int e = 0; e < net.num_edges(); ++e) {
      std::vector<double> m(net.num_nodes(), 0.0);
      m[net.edge(e).a] = 1.0;
      m[net.edge(e).b] = -1.0;
      auto f = solve_flows(net, m);
      for (int k = 0; k < net.num_edges(); ++k) {
        CHECK(std::abs(f[k] - (k == e ? 1.0 : 0.0)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("validation rejects malformed networks") {
  CHECK_THROWS_AS(make_net("SCS", {{0, 1}, {1, 2}, {0, 2}}, {1, 1, 1},
                           {1, -2, 1}),
                  NotATree);
  CHECK_THROWS_AS(make_net("SCS", {{0, 1}}, {1}, {1, -2, 1}), NotATree);
  CHECK_THROWS_AS(make_net("SCC", path_edges(3), {1, 1}, {2, -1, -1}),
                  InvalidNetwork);  // only one supplier
  CHECK_THROWS_AS(make_net("SSS", path_edges(3), {1, 1}, {1, 1, 1}),
                  InvalidNetwork);  // no consumer
  CHECK_THROWS_AS(make_net("SCS", path_edges(3), {1, -1}, {1, -2, 1}),
                  InvalidNetwork);  // nonpositive capacity
  CHECK_THROWS_AS(make_net("SCS", path_edges(3), {1, 1}, {-1, 0, 1}),
                  InvalidNetwork);  // supplier with nonpositive commodity
  CHECK_THROWS_AS(make_net("SCS", path_edges(3), {1, 1}, {1, 1, 1}),
                  InvalidNetwork);  // consumer with positive commodity
}

TEST_CASE("imbalanced commodity is rejected by the solvers") {
  auto net = make_net("SCS", path_edges(3), {10, 10}, {1, -2, 1});
  std::vector<double> bad{1, -2, 1.5};
  CHECK_THROWS_AS(solve_flows(net, bad), ImbalancedCommodity);
  CHECK_THROWS_AS(leaf_elimination_oracle(net, bad), ImbalancedCommodity);
  CHECK(net.is_balanced());
}

TEST_CASE("edge lookup and enumeration order") {
  auto net = make_net("SCS", {{2, 1}, {1, 0}}, {5, 7}, {1, -2, 1});
  // Edges normalized to a < b and sorted lexicographically; capacities follow.
  CHECK(net.edge(0) == Edge{0, 1});
  CHECK(net.edge(1) == Edge{1, 2});
  CHECK(net.capacity(0) == 7);
  CHECK(net.capacity(1) == 5);
  CHECK(net.edge_index(2, 1) == 1);
  CHECK(!net.find_edge(0, 2).has_value());
  CHECK_THROWS_AS(net.edge_index(0, 2), NotAnEdge);
}
