#include "treeflow/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

namespace treeflow {

std::vector<NodeId> half_cluster(const FlowNetwork& net, NodeId i, NodeId j) {
  net.edge_index(i, j);  // throws NotAnEdge if {i, j} is absent
  std::vector<char> seen(net.num_nodes(), 0);
  seen[i] = 1;  // excluded, acts as a wall
  seen[j] = 1;
  std::vector<NodeId> out{j};
  std::deque<NodeId> queue{j};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : net.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        out.push_back(v);
        queue.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool supplier_indicator(const FlowNetwork& net, NodeId i, NodeId j) {
  for (NodeId v : half_cluster(net, i, j)) {
    if (net.is_supplier(v)) return true;
  }
  return false;
}

OrientationView::OrientationView(const FlowNetwork& net,
                                 const FlowAssignment& flows) {
  const int ne = net.num_edges();
  direction_.resize(ne);
  beta_fwd_.resize(ne);
  beta_bwd_.resize(ne);
  controllable_.resize(ne);

  for (int e = 0; e < ne; ++e) {
    double f = flows[e];
    double tol = flow_zero_tol(net.capacity(e));
    direction_[e] = (f > tol) ? 1 : (f < -tol ? -1 : 0);
  }

  // Supplier counts per subtree, rooted at node 0. For edge (parent, child),
  // H_{parent,child} is the child's subtree and H_{child,parent} the rest.
  const int n = net.num_nodes();
  std::vector<NodeId> parent(n, -1), order;
  std::vector<int> parent_edge(n, -1);
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::deque<NodeId> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (const auto& [v, e] : net.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        parent[v] = u;
        parent_edge[v] = e;
        queue.push_back(v);
      }
    }
  }
  std::vector<int> subtree_suppliers(n, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId u = *it;
    if (net.is_supplier(u)) ++subtree_suppliers[u];
    if (parent[u] >= 0) subtree_suppliers[parent[u]] += subtree_suppliers[u];
  }
  const int total = net.num_suppliers();
  for (NodeId u : order) {
    if (parent[u] < 0) continue;
    int e = parent_edge[u];
    bool child_is_a = (net.edge(e).a == u);
    bool below = subtree_suppliers[u] > 0;         // beta_{parent -> child}
    bool above = total - subtree_suppliers[u] > 0; // beta_{child -> parent}
    if (child_is_a) {
      beta_bwd_[e] = below;  // (b, a) = (parent, child)
      beta_fwd_[e] = above;  // (a, b) = (child, parent)
    } else {
      beta_fwd_[e] = below;
      beta_bwd_[e] = above;
    }
    controllable_[e] = beta_fwd_[e] && beta_bwd_[e];
  }
}

bool OrientationView::beta(const FlowNetwork& net, NodeId i, NodeId j) const {
  int e = net.edge_index(i, j);
  return net.edge(e).a == i ? beta_fwd_[e] : beta_bwd_[e];
}

std::vector<DirEdge> OrientationView::directed_edges(const FlowNetwork& net) const {
  std::vector<DirEdge> out;
  for (int e = 0; e < net.num_edges(); ++e) {
    if (direction_[e] > 0) out.push_back({net.edge(e).a, net.edge(e).b, e});
    else if (direction_[e] < 0) out.push_back({net.edge(e).b, net.edge(e).a, e});
  }
  return out;
}

std::vector<DirEdge> OrientationView::directed_controllable(
    const FlowNetwork& net) const {
  std::vector<DirEdge> out;
  for (const auto& d : directed_edges(net)) {
    if (controllable_[d.edge]) out.push_back(d);
  }
  return out;
}

std::vector<int> OrientationView::controllable_edge_indices() const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(controllable_.size()); ++e) {
    if (controllable_[e]) out.push_back(e);
  }
  return out;
}

std::vector<char> OrientationView::controllable_vertices(
    const FlowNetwork& net) const {
  std::vector<char> in(net.num_nodes(), 0);
  for (int e = 0; e < net.num_edges(); ++e) {
    if (controllable_[e]) {
      in[net.edge(e).a] = 1;
      in[net.edge(e).b] = 1;
    }
  }
  return in;
}

OrientationView controllable_edges(const FlowNetwork& net,
                                   const FlowAssignment& flows) {
  return OrientationView(net, flows);
}

namespace {

// Flow-oriented controllable out-adjacency: node -> directed edges leaving it.
std::vector<std::vector<DirEdge>> controllable_out_adjacency(
    const FlowNetwork& net, const OrientationView& view) {
  std::vector<std::vector<DirEdge>> out(net.num_nodes());
  for (const auto& d : view.directed_controllable(net)) {
    out[d.from].push_back(d);
  }
  return out;
}

}  // namespace

std::vector<DirEdge> downstream(const FlowNetwork& net,
                                const OrientationView& view, NodeId i) {
  auto adj = controllable_out_adjacency(net, view);
  std::vector<DirEdge> result;
  std::vector<char> visited(net.num_nodes(), 0);
  std::deque<NodeId> queue{i};
  visited[i] = 1;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const auto& d : adj[u]) {
      result.push_back(d);
      if (!visited[d.to]) {
        visited[d.to] = 1;
        queue.push_back(d.to);
      }
    }
  }
  std::sort(result.begin(), result.end(),
            [](const DirEdge& x, const DirEdge& y) { return x.edge < y.edge; });
  return result;
}

double safety_margin(const FlowNetwork& net, const OrientationView& view,
                     const FlowAssignment& flows) {
  double j = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    if (view.controllable(e)) {
      j = std::max(j, std::abs(flows[e]) / net.capacity(e));
    }
  }
  return j;
}

DownstreamReport max_downstream_flows(const FlowNetwork& net,
                                      const OrientationView& view,
                                      const FlowAssignment& flows) {
  const int n = net.num_nodes();
  DownstreamReport report;
  report.downstream.resize(n);
  report.phi.assign(n, 0.0);
  report.mde.resize(n);

  auto ratio = [&](const DirEdge& d) {
    return std::abs(flows[d.edge]) / net.capacity(d.edge);
  };

  for (NodeId i = 0; i < n; ++i) {
    report.downstream[i] = downstream(net, view, i);
    for (const auto& d : report.downstream[i]) {
      double r = ratio(d);
      // Ties resolved toward the smallest enumerated edge: the downstream
      // list is edge-sorted, so only a strict improvement replaces the MDE.
      if (!report.mde[i] || r > report.phi[i]) {
        report.phi[i] = r;
        report.mde[i] = d;
      }
    }
    if (report.downstream[i].empty()) report.phi[i] = 0.0;
  }

  std::vector<char> is_mdes(net.num_edges(), 0);
  for (NodeId s : net.suppliers()) {
    if (report.mde[s]) {
      const DirEdge& d = *report.mde[s];
      if (!is_mdes[d.edge]) {
        is_mdes[d.edge] = 1;
        report.mdes_set.push_back(d);
      }
    }
  }
  std::sort(report.mdes_set.begin(), report.mdes_set.end(),
            [](const DirEdge& x, const DirEdge& y) { return x.edge < y.edge; });
  for (const auto& d : report.mdes_set) {
    if (!net.is_supplier(d.to)) report.mdes_to_consumer.push_back(d);
  }

  // Consumer clusters: union consumers in V_cf over controllable
  // consumer-consumer edges that are not MDESs, then keep components with an
  // inbound MDES from M_{s->c}.
  auto in_vcf = view.controllable_vertices(net);
  std::vector<int> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (comp[x] != x) x = comp[x] = comp[comp[x]];
    return x;
  };
  for (int e = 0; e < net.num_edges(); ++e) {
    if (!view.controllable(e) || is_mdes[e]) continue;
    NodeId a = net.edge(e).a, b = net.edge(e).b;
    if (!net.is_supplier(a) && !net.is_supplier(b)) comp[find(a)] = find(b);
  }
  std::vector<std::vector<NodeId>> groups(n);
  for (NodeId v = 0; v < n; ++v) {
    if (in_vcf[v] && !net.is_supplier(v)) groups[find(v)].push_back(v);
  }
  std::vector<char> in_msc(net.num_edges(), 0);
  for (const auto& d : report.mdes_to_consumer) in_msc[d.edge] = 1;

  auto dir_cf = view.directed_controllable(net);
  for (auto& members : groups) {
    if (members.empty()) continue;
    std::vector<char> in_cluster(n, 0);
    for (NodeId v : members) in_cluster[v] = 1;
    bool has_inbound_msc = false;
    for (const auto& d : report.mdes_to_consumer) {
      if (in_cluster[d.to] && !in_cluster[d.from]) has_inbound_msc = true;
    }
    if (!has_inbound_msc) continue;  // Definition condition (iv)
    bool critical = true;
    for (const auto& d : dir_cf) {
      bool from_in = in_cluster[d.from], to_in = in_cluster[d.to];
      if (from_in == to_in) continue;  // not a boundary edge
      if (!to_in || !in_msc[d.edge]) critical = false;
    }
    report.cluster_critical.push_back(critical);
    report.consumer_clusters.push_back(std::move(members));
  }

  report.safety_margin = safety_margin(net, view, flows);
  return report;
}

std::vector<double> phi_by_recursion(const FlowNetwork& net,
                                     const OrientationView& view,
                                     const FlowAssignment& flows) {
  const int n = net.num_nodes();
  auto dir = view.directed_edges(net);
  std::vector<std::vector<DirEdge>> out(n);
  std::vector<int> out_pending(n, 0);
  std::vector<std::vector<NodeId>> in(n);
  for (const auto& d : dir) {
    out[d.from].push_back(d);
    ++out_pending[d.from];
    in[d.to].push_back(d.from);
  }
  std::vector<double> phi(n, 0.0);
  std::deque<NodeId> queue;
  for (NodeId i = 0; i < n; ++i) {
    if (out_pending[i] == 0) queue.push_back(i);
  }
  int done = 0;
  while (!queue.empty()) {
    NodeId j = queue.front();
    queue.pop_front();
    ++done;
    double value = 0.0;  // max over the empty set
    for (const auto& d : out[j]) {
      double term = view.beta(net, d.from, d.to)
                        ? std::abs(flows[d.edge]) / net.capacity(d.edge)
                        : 0.0;
      value = std::max({value, term, phi[d.to]});
    }
    phi[j] = value;
    for (NodeId p : in[j]) {
      if (--out_pending[p] == 0) queue.push_back(p);
    }
  }
  if (done != n) throw Error("flow orientation is not acyclic");
  return phi;
}

}  // namespace treeflow
