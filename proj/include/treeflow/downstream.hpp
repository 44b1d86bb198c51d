/*
  Flow-induced graph structures: orientations, supplier indicators,
  controllable edges, downstreams, maximum downstream flows and edges,
  consumer clusters, and the flow safety margin.
*/
#pragma once

#include <optional>
#include <vector>

#include "treeflow/flow_network.hpp"

namespace treeflow {

// |f| <= zero_tol(capacity) is treated as a zero flow when orienting edges.
inline double flow_zero_tol(double capacity) {
  return 1e-9 * std::max(1.0, capacity);
}

class OrientationView {
 public:
  OrientationView() = default;
  OrientationView(const FlowNetwork& net, const FlowAssignment& flows);

  // +1: flow along the reference orientation a -> b, -1: b -> a, 0: no flow.
  int direction(int e) const { return direction_[e]; }

  // Supplier indicator for the directed edge (i, j); {i, j} must be an edge.
  bool beta(const FlowNetwork& net, NodeId i, NodeId j) const;
  bool beta_forward(int e) const { return beta_fwd_[e]; }   // beta_{a,b}
  bool beta_backward(int e) const { return beta_bwd_[e]; }  // beta_{b,a}

  bool controllable(int e) const { return controllable_[e]; }

  // E_vec: flow-oriented edges (zero-flow edges omitted).
  std::vector<DirEdge> directed_edges(const FlowNetwork& net) const;
  // E_vec_cf: flow-oriented controllable edges.
  std::vector<DirEdge> directed_controllable(const FlowNetwork& net) const;
  // E_cf as undirected edge indices.
  std::vector<int> controllable_edge_indices() const;
  // Vertices touched by at least one controllable edge (V_cf).
  std::vector<char> controllable_vertices(const FlowNetwork& net) const;

 private:
  std::vector<int> direction_;
  std::vector<char> beta_fwd_;
  std::vector<char> beta_bwd_;
  std::vector<char> controllable_;
};

struct DownstreamReport {
  std::vector<std::vector<DirEdge>> downstream;  // D_i per node
  std::vector<double> phi;                       // max downstream flow per node
  std::vector<std::optional<DirEdge>> mde;       // argmax edge, if any
  std::vector<DirEdge> mdes_set;                 // M_s
  std::vector<DirEdge> mdes_to_consumer;         // M_{s->c}
  std::vector<std::vector<NodeId>> consumer_clusters;
  std::vector<char> cluster_critical;            // parallel to consumer_clusters
  double safety_margin = 0.0;                    // J over E_cf
};

// Vertices of the component of G minus node i that contains j.
std::vector<NodeId> half_cluster(const FlowNetwork& net, NodeId i, NodeId j);

// 1 iff the half-cluster H_ij contains a supplier.
bool supplier_indicator(const FlowNetwork& net, NodeId i, NodeId j);

// Full orientation/indicator view for the given flows.
OrientationView controllable_edges(const FlowNetwork& net,
                                   const FlowAssignment& flows);

// Out-tree of node i in the flow-oriented controllable graph.
std::vector<DirEdge> downstream(const FlowNetwork& net,
                                const OrientationView& view, NodeId i);

// Downstreams, phi, MDE/MDES, clusters, critical clusters, and J.
DownstreamReport max_downstream_flows(const FlowNetwork& net,
                                      const OrientationView& view,
                                      const FlowAssignment& flows);

// Fixed point of the recursive reformulation, by reverse topological order
// over the flow-oriented graph. Agrees exactly with the report's phi.
std::vector<double> phi_by_recursion(const FlowNetwork& net,
                                     const OrientationView& view,
                                     const FlowAssignment& flows);

// max over E_cf of |f_e| / capacity_e.
double safety_margin(const FlowNetwork& net, const OrientationView& view,
                     const FlowAssignment& flows);

}  // namespace treeflow
