/*
  Per-node distributed machinery: Boolean supplier-indicator propagation,
  the first-order estimator of maximum downstream flows, global aggregate
  statistics (idealized as instantaneous), and the saturation-aware
  supplier control law in both P and D flavors.
*/
#pragma once

#include <vector>

#include "treeflow/downstream.hpp"
#include "treeflow/flow_network.hpp"

namespace treeflow {

struct UnstableStep : Error {
  using Error::Error;
};

struct GainConfig {
  double k_phi = 200.0;
  double k_p = 40.0;
  double k_p_gamma = 40.0;
};

// Distributed fixed-point computation of the supplier indicator over the
// extended directed edge set. Each entry holds the estimate for both
// orientations of an enumerated edge.
class BetaPropagation {
 public:
  explicit BetaPropagation(const FlowNetwork& net);

  // Synchronous sweeps until fixed point; returns the sweep count.
  int run(const FlowNetwork& net);

  bool value(const FlowNetwork& net, NodeId i, NodeId j) const;
  bool forward(int e) const { return fwd_[e]; }   // (a, b) orientation
  bool backward(int e) const { return bwd_[e]; }  // (b, a) orientation

 private:
  std::vector<char> fwd_, bwd_;
};

// What node i sees on one outgoing (flow-directed) edge.
struct OutEdgeView {
  double indicated_ratio = 0.0;  // beta_ij * f_ij / capacity_ij
  double neighbor_phi = 0.0;     // phi_hat of the edge's head
};

// Target of the estimator dynamics; max over an empty view list is 0.
double estimator_target(const std::vector<OutEdgeView>& views);

struct EstimatorState {
  std::vector<double> phi_hat;  // per node, initialized to zero

  explicit EstimatorState(int num_nodes) : phi_hat(num_nodes, 0.0) {}
};

// One explicit Euler step of the phi-hat dynamics, reading only each node's
// outgoing flows, indicator values, and out-neighbor estimates. `beta` may be
// either the converged propagation result or the exact indicator.
template <class BetaSource>
void step_estimator(const FlowNetwork& net, const BetaSource& beta,
                    const FlowAssignment& flows, EstimatorState& state,
                    double dt, double k_phi) {
  if (dt * k_phi >= 2.0) {
    throw UnstableStep("dt * k_phi >= 2 breaks the explicit Euler update");
  }
  const int n = net.num_nodes();
  std::vector<double> target(n, 0.0);
  std::vector<OutEdgeView> views;
  for (NodeId i = 0; i < n; ++i) {
    views.clear();
    for (const auto& [j, e] : net.neighbors(i)) {
      double f = flows.at(net, i, j);
      if (f <= flow_zero_tol(net.capacity(e))) continue;  // not an out-edge
      OutEdgeView v;
      v.indicated_ratio =
          beta.value(net, i, j) ? f / net.capacity(e) : 0.0;
      v.neighbor_phi = state.phi_hat[j];
      views.push_back(v);
    }
    target[i] = estimator_target(views);
  }
  for (NodeId i = 0; i < n; ++i) {
    state.phi_hat[i] += dt * (-k_phi * (state.phi_hat[i] - target[i]));
  }
}

// Adapter so OrientationView can feed the estimator directly.
struct ExactBeta {
  const OrientationView* view;
  bool value(const FlowNetwork& net, NodeId i, NodeId j) const {
    return view->beta(net, i, j);
  }
};

struct AggregateStats {
  double phi_avg = 0.0;                     // mean over all suppliers
  std::vector<double> phi_avg_nonsat;       // per supplier, self always in
  std::vector<double> phi_max_sat;          // per supplier, max(empty) = 0
};

AggregateStats compute_aggregates(const std::vector<double>& phi_hat,
                                  const std::vector<char>& gamma);

enum class ControlMode { Power, Droop };

// Controlled supplier outputs with box bounds and saturation bookkeeping.
struct SupplierControl {
  ControlMode mode = ControlMode::Power;
  std::vector<double> value;  // P_i or D_i per supplier
  std::vector<double> lower, upper;
  std::vector<char> gamma;  // 1 while strictly inside the box
  std::vector<char> zeta;   // 1 when a saturated value would re-enter

  SupplierControl() = default;
  SupplierControl(ControlMode mode, std::vector<double> value,
                  std::vector<double> lower, std::vector<double> upper);

  void refresh_gamma();
};

// One explicit Euler step of the control law; values are clamped to the box
// and the saturation flags recomputed from the clamped state.
void control_step(SupplierControl& ctrl, const std::vector<double>& phi_hat,
                  const AggregateStats& stats, double dt,
                  const GainConfig& gains);

}  // namespace treeflow
