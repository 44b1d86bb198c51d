/*
  Droop-controlled AC microgrid on a tree: generator angles follow first-order
  droop dynamics, load angles satisfy an algebraic power balance, line flows
  are xi_ij = A_ij sin(delta_i - delta_j).
*/
#pragma once

#include <vector>

#include "treeflow/flow_network.hpp"

namespace treeflow {

struct InfeasibleSynchronization : Error {
  using Error::Error;
};
struct NewtonDivergence : Error {
  using Error::Error;
};
struct StepTooLarge : Error {
  using Error::Error;
};

struct GridModel {
  FlowNetwork net;               // topology, roles, capacities
  std::vector<double> coupling;  // A per edge, > 0
  std::vector<double> droop;     // D per node (0 at loads)
  std::vector<double> power;     // current P per node
  std::vector<double> p_min, p_max;  // generator power box
  std::vector<double> d_min, d_max;  // droop box (for D-mode control)
};

struct SteadyState {
  FlowAssignment flows;
  double omega = 0.0;
  bool feasible = true;  // |f| / A < 1 on every edge
};

// Synchronized steady state: omega = sum(P) / sum(D), flows from the tree
// balance B f = P - omega D. Throws InfeasibleSynchronization when a line
// would need |f| >= A.
SteadyState steady_state(const GridModel& model);

// Phase angles realizing the given tree flows (node 0 grounded at zero).
std::vector<double> equilibrium_angles(const GridModel& model,
                                       const FlowAssignment& flows);

class GridSimulator {
 public:
  explicit GridSimulator(const GridModel* model);

  // Start from the synchronized steady state of the current powers.
  void init_equilibrium();
  // Start from zero generator angles; load angles solved consistently.
  void init_flat();

  void step(double dt);

  double time() const { return t_; }
  const std::vector<double>& angles() const { return delta_; }

  // Line flows at the current angles, along the reference orientation.
  FlowAssignment line_flows() const;
  // Instantaneous generator frequency deviations (d delta / dt).
  std::vector<double> generator_frequencies() const;
  // Largest load balance residual at the current angles.
  double load_residual() const;

  // Re-solves the load angles (after a power event or initialization).
  void solve_loads();

  // Offsets one generator angle and re-solves the loads.
  void perturb_angle(NodeId i, double offset);

 private:
  double node_residual(NodeId i) const;

  const GridModel* model_;
  std::vector<double> delta_;
  std::vector<NodeId> loads_;
  double t_ = 0.0;
};

}  // namespace treeflow
