/*
  Centralized oracle for the minimax flow problem: epigraph LP over the
  supplier commodities, with flows eliminated through the tree solve.
*/
#pragma once

#include <string>
#include <vector>

#include "treeflow/downstream.hpp"
#include "treeflow/flow_network.hpp"

namespace treeflow {

enum class MinimaxStatus { Optimal, Infeasible };

struct MinimaxSolution {
  MinimaxStatus status = MinimaxStatus::Infeasible;
  std::vector<double> supplier_commodity;  // per supplier, in supplier order
  double objective = 0.0;                  // J* over E_cf
  FlowAssignment flows;
  // Any |f_e| >= capacity * (1 - 1e-9); the strict capacity constraint is
  // only met in the closed-LP sense.
  bool boundary_feasible = false;
  std::string certificate;  // populated when infeasible
};

// Problem: min over m_s of max_{e in E_cf} |f_e| / capacity_e, subject to
// conservation, zero total commodity, capacities, and box bounds.
MinimaxSolution solve_minimax(const FlowNetwork& net);

// Microgrid particularization: effective injections m = P - omega * D with
// omega = sum(P) / sum over generators of D. Consumer P are fixed; generator
// P are the decision variables within [p_min, p_max].
//
// droop, p_min, p_max are per node (zero / ignored at consumers).
MinimaxSolution solve_minimax_microgrid(const FlowNetwork& net,
                                        const std::vector<double>& droop,
                                        const std::vector<double>& p_min,
                                        const std::vector<double>& p_max);

// Sensitivity of every edge flow to each supplier injection: flows(m) =
// gain * m_s + offset, with consumers held at the network's commodity.
struct FlowSensitivity {
  Eigen::MatrixXd gain;     // num_edges x num_suppliers
  Eigen::VectorXd offset;   // num_edges
  std::vector<NodeId> suppliers;
};
FlowSensitivity flow_sensitivity(const FlowNetwork& net);

}  // namespace treeflow
