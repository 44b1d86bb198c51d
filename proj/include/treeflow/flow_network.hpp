/*
  FlowNetwork — acyclic supplier/consumer commodity network.

  Nodes are dense indices 0..N-1. Edges are undirected pairs stored with
  a < b and enumerated lexicographically by (a, b); this fixed enumeration
  doubles as the reference orientation a -> b for flow signs.
*/
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treeflow {

using NodeId = int;

enum class Role { Supplier, Consumer };

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidNetwork : Error {
  using Error::Error;
};
struct NotATree : Error {
  using Error::Error;
};
struct ImbalancedCommodity : Error {
  using Error::Error;
};
struct NotAnEdge : Error {
  using Error::Error;
};

// Undirected edge, normalized so a < b. Reference orientation is a -> b.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Directed edge plus the index of its undirected parent in the enumeration.
struct DirEdge {
  NodeId from = 0;
  NodeId to = 0;
  int edge = -1;
  friend bool operator==(const DirEdge&, const DirEdge&) = default;
};

class FlowNetwork {
 public:
  FlowNetwork() = default;
  FlowNetwork(int num_nodes, std::vector<Role> roles, std::vector<Edge> edges,
              std::vector<double> capacities, std::vector<double> commodity,
              std::vector<double> supply_min, std::vector<double> supply_max);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_suppliers() const { return num_suppliers_; }

  Role role(NodeId i) const { return roles_[i]; }
  bool is_supplier(NodeId i) const { return roles_[i] == Role::Supplier; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  double capacity(int e) const { return capacities_[e]; }
  const std::vector<double>& capacities() const { return capacities_; }
  double commodity(NodeId i) const { return commodity_[i]; }
  const std::vector<double>& commodity() const { return commodity_; }
  double supply_min(NodeId i) const { return supply_min_[i]; }
  double supply_max(NodeId i) const { return supply_max_[i]; }

  std::vector<NodeId> suppliers() const;
  std::vector<NodeId> consumers() const;

  // Neighbors of i as (neighbor, edge index) pairs.
  const std::vector<std::pair<NodeId, int>>& neighbors(NodeId i) const {
    return adjacency_[i];
  }

  // Index of undirected edge {i, j}, or nullopt.
  std::optional<int> find_edge(NodeId i, NodeId j) const;
  int edge_index(NodeId i, NodeId j) const;  // throws NotAnEdge

  // Replaces the commodity vector; roles and sign conventions re-checked.
  void set_commodity(const std::vector<double>& m);

  // |sum m| <= 1e-9 * max(1, sum |m|)
  bool is_balanced() const;

 private:
  void validate() const;

  int num_nodes_ = 0;
  int num_suppliers_ = 0;
  std::vector<Role> roles_;
  std::vector<Edge> edges_;
  std::vector<double> capacities_;
  std::vector<double> commodity_;
  std::vector<double> supply_min_;
  std::vector<double> supply_max_;
  std::vector<std::vector<std::pair<NodeId, int>>> adjacency_;
};

// Flows along the reference orientation of each enumerated edge.
class FlowAssignment {
 public:
  FlowAssignment() = default;
  explicit FlowAssignment(std::vector<double> flows) : flows_(std::move(flows)) {}

  int size() const { return static_cast<int>(flows_.size()); }
  double operator[](int e) const { return flows_[e]; }
  double& operator[](int e) { return flows_[e]; }
  const std::vector<double>& values() const { return flows_; }

  // Signed flow from i to j; f(j, i) == -f(i, j) exactly.
  double at(const FlowNetwork& net, NodeId i, NodeId j) const;

 private:
  std::vector<double> flows_;
};

// Incidence matrix of the enumerated, oriented edge set: column e has +1 at
// edge(e).a and -1 at edge(e).b.
Eigen::MatrixXd incidence_matrix(const FlowNetwork& net);

// Unique conserving flows, via the grounded Laplacian system.
FlowAssignment solve_flows(const FlowNetwork& net);
FlowAssignment solve_flows(const FlowNetwork& net, const std::vector<double>& m);

// Independent exact solver: peel leaves, fold commodity into the neighbor.
FlowAssignment leaf_elimination_oracle(const FlowNetwork& net);
FlowAssignment leaf_elimination_oracle(const FlowNetwork& net,
                                       const std::vector<double>& m);

}  // namespace treeflow
