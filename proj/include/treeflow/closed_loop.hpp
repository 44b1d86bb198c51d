/*
  Closed loop coupling the grid (full dynamics or quasi-static steady flows)
  with the distributed estimator and the supplier control law.
*/
#pragma once

#include <memory>
#include <vector>

#include "treeflow/distributed.hpp"
#include "treeflow/microgrid.hpp"

namespace treeflow {

enum class FlowBackend {
  QuasiStatic,  // flows jump to the synchronized steady state every tick
  Dynamic,      // full angle dynamics with algebraic loads
};

class ClosedLoop {
 public:
  ClosedLoop(GridModel model, ControlMode mode, bool control_enabled,
             GainConfig gains, FlowBackend backend, double dt);

  void step();

  double time() const { return t_; }
  double dt() const { return dt_; }
  const GridModel& model() const { return model_; }

  // Event hooks.
  void set_node_power(NodeId i, double p);
  void apply_supplier_values(const std::vector<double>& values);

  const FlowAssignment& flows() const { return flows_; }
  double j_xi() const;     // max over E_cf of |flow| / capacity
  double omega() const { return omega_; }
  bool controllable_edge(int e) const { return controllable_[e]; }

  const std::vector<NodeId>& suppliers() const { return suppliers_; }
  std::vector<double> supplier_phi_hat() const;
  double supplier_phi_spread() const;
  const SupplierControl& control() const { return control_; }
  const EstimatorState& estimator() const { return estimator_; }
  int beta_sweeps() const { return beta_sweeps_; }

 private:
  void refresh_flows();

  GridModel model_;
  GainConfig gains_;
  FlowBackend backend_;
  bool control_enabled_;
  double dt_;
  int estimator_substeps_;
  double t_ = 0.0;

  std::vector<NodeId> suppliers_;
  std::vector<char> controllable_;
  BetaPropagation beta_;
  int beta_sweeps_ = 0;
  EstimatorState estimator_;
  SupplierControl control_;
  std::unique_ptr<GridSimulator> sim_;
  FlowAssignment flows_;
  double omega_ = 0.0;
};

// Advances until both the controlled values and J stop drifting between
// checkpoints (every `check_every` ticks), or t_max is reached. Returns true
// when converged.
bool run_until_steady(ClosedLoop& loop, double t_max, double value_tol,
                      double j_drift_tol, int check_every = 200);

}  // namespace treeflow
