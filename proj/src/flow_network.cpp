#include "treeflow/flow_network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace treeflow {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

FlowNetwork::FlowNetwork(int num_nodes, std::vector<Role> roles,
                         std::vector<Edge> edges, std::vector<double> capacities,
                         std::vector<double> commodity,
                         std::vector<double> supply_min,
                         std::vector<double> supply_max)
    : num_nodes_(num_nodes),
      roles_(std::move(roles)),
      edges_(std::move(edges)),
      capacities_(std::move(capacities)),
      commodity_(std::move(commodity)),
      supply_min_(std::move(supply_min)),
      supply_max_(std::move(supply_max)) {
  // Normalize and enforce the fixed lexicographic enumeration.
  std::vector<int> order(edges_.size());
  for (auto& e : edges_) {
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return edges_[x] < edges_[y]; });
  std::vector<Edge> se(edges_.size());
  std::vector<double> sc(edges_.size());
  for (size_t k = 0; k < order.size(); ++k) {
    se[k] = edges_[order[k]];
    sc[k] = capacities_[order[k]];
  }
  edges_ = std::move(se);
  capacities_ = std::move(sc);

  num_suppliers_ = static_cast<int>(
      std::count(roles_.begin(), roles_.end(), Role::Supplier));

  adjacency_.assign(num_nodes_, {});
  for (int e = 0; e < num_edges(); ++e) {
    adjacency_[edges_[e].a].emplace_back(edges_[e].b, e);
    adjacency_[edges_[e].b].emplace_back(edges_[e].a, e);
  }
  validate();
}

void FlowNetwork::validate() const {
  if (num_nodes_ < 3) throw InvalidNetwork("network needs at least 3 nodes");
  if (static_cast<int>(roles_.size()) != num_nodes_ ||
      static_cast<int>(commodity_.size()) != num_nodes_ ||
      static_cast<int>(supply_min_.size()) != num_nodes_ ||
      static_cast<int>(supply_max_.size()) != num_nodes_) {
    throw InvalidNetwork("per-node vectors must have length N");
  }
  if (static_cast<int>(capacities_.size()) != num_edges()) {
    throw InvalidNetwork("capacity vector must have length |E|");
  }
  if (num_edges() != num_nodes_ - 1) {
    throw NotATree("|E| != N - 1");
  }
  UnionFind uf(num_nodes_);
  for (const auto& e : edges_) {
    if (e.a < 0 || e.b >= num_nodes_ || e.a == e.b) {
      throw InvalidNetwork("edge endpoints out of range");
    }
    if (!uf.unite(e.a, e.b)) throw NotATree("graph contains a cycle");
  }
  int nc = num_nodes_ - num_suppliers_;
  if (num_suppliers_ < 2) throw InvalidNetwork("need at least 2 suppliers");
  if (nc < 1) throw InvalidNetwork("need at least 1 consumer");
  for (int e = 0; e < num_edges(); ++e) {
    if (!(capacities_[e] > 0.0)) throw InvalidNetwork("capacities must be positive");
  }
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (roles_[i] == Role::Supplier) {
      if (!(commodity_[i] > 0.0)) {
        throw InvalidNetwork("supplier commodity must be positive at node " +
                             std::to_string(i));
      }
      if (!(supply_min_[i] > 0.0) || supply_min_[i] > supply_max_[i]) {
        throw InvalidNetwork("supplier bounds need 0 < min <= max at node " +
                             std::to_string(i));
      }
    } else if (commodity_[i] > 0.0) {
      throw InvalidNetwork("consumer commodity must be <= 0 at node " +
                           std::to_string(i));
    }
  }
}

std::vector<NodeId> FlowNetwork::suppliers() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (roles_[i] == Role::Supplier) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> FlowNetwork::consumers() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (roles_[i] == Role::Consumer) out.push_back(i);
  }
  return out;
}

std::optional<int> FlowNetwork::find_edge(NodeId i, NodeId j) const {
  if (i < 0 || i >= num_nodes_ || j < 0 || j >= num_nodes_) return std::nullopt;
  for (const auto& [n, e] : adjacency_[i]) {
    if (n == j) return e;
  }
  return std::nullopt;
}

int FlowNetwork::edge_index(NodeId i, NodeId j) const {
  auto e = find_edge(i, j);
  if (!e) {
    throw NotAnEdge("{" + std::to_string(i) + ", " + std::to_string(j) +
                    "} is not an edge");
  }
  return *e;
}

void FlowNetwork::set_commodity(const std::vector<double>& m) {
  if (static_cast<int>(m.size()) != num_nodes_) {
    throw InvalidNetwork("commodity vector must have length N");
  }
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (roles_[i] == Role::Supplier) {
      if (!(m[i] > 0.0)) {
        throw InvalidNetwork("supplier commodity must be positive at node " +
                             std::to_string(i));
      }
    } else if (m[i] > 0.0) {
      throw InvalidNetwork("consumer commodity must be <= 0 at node " +
                           std::to_string(i));
    }
  }
  commodity_ = m;
}

bool FlowNetwork::is_balanced() const {
  double sum = 0.0, abs_sum = 0.0;
  for (double v : commodity_) {
    sum += v;
    abs_sum += std::abs(v);
  }
  return std::abs(sum) <= 1e-9 * std::max(1.0, abs_sum);
}

double FlowAssignment::at(const FlowNetwork& net, NodeId i, NodeId j) const {
  int e = net.edge_index(i, j);
  double f = flows_[e];
  return net.edge(e).a == i ? f : -f;
}

Eigen::MatrixXd incidence_matrix(const FlowNetwork& net) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(net.num_nodes(), net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    b(net.edge(e).a, e) = 1.0;
    b(net.edge(e).b, e) = -1.0;
  }
  return b;
}

namespace {

void require_balanced(const std::vector<double>& m) {
  double sum = 0.0, abs_sum = 0.0;
  for (double v : m) {
    sum += v;
    abs_sum += std::abs(v);
  }
  if (std::abs(sum) > 1e-9 * std::max(1.0, abs_sum)) {
    throw ImbalancedCommodity("commodity does not sum to zero (sum = " +
                              std::to_string(sum) + ")");
  }
}

}  // namespace

FlowAssignment solve_flows(const FlowNetwork& net, const std::vector<double>& m) {
  require_balanced(m);
  const int n = net.num_nodes();
  // Grounded Laplacian: fix node 0 potential at zero and solve the reduced
  // SPD system; the incidence transpose kills the gauge freedom, so the
  // resulting flows equal the pseudoinverse formula.
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n - 1, n - 1);
  Eigen::VectorXd rhs(n - 1);
  for (int i = 1; i < n; ++i) rhs(i - 1) = m[i];
  for (const auto& e : net.edges()) {
    int a = e.a, b = e.b;
    if (a != 0) lap(a - 1, a - 1) += 1.0;
    if (b != 0) lap(b - 1, b - 1) += 1.0;
    if (a != 0 && b != 0) {
      lap(a - 1, b - 1) -= 1.0;
      lap(b - 1, a - 1) -= 1.0;
    }
  }
  Eigen::VectorXd x_red = lap.ldlt().solve(rhs);
  Eigen::VectorXd x(n);
  x(0) = 0.0;
  x.tail(n - 1) = x_red;

  std::vector<double> flows(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    flows[e] = x(net.edge(e).a) - x(net.edge(e).b);
  }

  // Conservation residual check.
  double max_abs_m = 1.0;
  for (double v : m) max_abs_m = std::max(max_abs_m, std::abs(v));
  std::vector<double> residual(m);
  for (int e = 0; e < net.num_edges(); ++e) {
    residual[net.edge(e).a] -= flows[e];
    residual[net.edge(e).b] += flows[e];
  }
  for (double r : residual) {
    if (std::abs(r) > 1e-10 * max_abs_m) {
      throw Error("flow solve residual exceeds tolerance");
    }
  }
  return FlowAssignment(std::move(flows));
}

FlowAssignment solve_flows(const FlowNetwork& net) {
  return solve_flows(net, net.commodity());
}

FlowAssignment leaf_elimination_oracle(const FlowNetwork& net,
                                       const std::vector<double>& m) {
  require_balanced(m);
  const int n = net.num_nodes();
  std::vector<int> degree(n, 0);
  std::vector<char> removed(n, 0);
  for (const auto& e : net.edges()) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::vector<double> residual(m);
  std::vector<double> flows(net.num_edges(), 0.0);
  std::vector<NodeId> stack;
  for (NodeId i = 0; i < n; ++i) {
    if (degree[i] == 1) stack.push_back(i);
  }
  int processed = 0;
  while (!stack.empty()) {
    NodeId leaf = stack.back();
    stack.pop_back();
    if (removed[leaf] || degree[leaf] != 1) continue;
    for (const auto& [nbr, e] : net.neighbors(leaf)) {
      if (removed[nbr]) continue;
      flows[e] = (net.edge(e).a == leaf) ? residual[leaf] : -residual[leaf];
      residual[nbr] += residual[leaf];
      residual[leaf] = 0.0;
      removed[leaf] = 1;
      ++processed;
      if (--degree[nbr] == 1) stack.push_back(nbr);
      break;
    }
  }
  if (processed != n - 1) throw NotATree("leaf elimination did not exhaust the tree");
  return FlowAssignment(std::move(flows));
}

FlowAssignment leaf_elimination_oracle(const FlowNetwork& net) {
  return leaf_elimination_oracle(net, net.commodity());
}

}  // namespace treeflow
