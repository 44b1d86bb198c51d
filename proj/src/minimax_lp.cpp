#include "treeflow/minimax_lp.hpp"

#include <cmath>

#include "treeflow/simplex.hpp"

namespace treeflow {

namespace {

// Per-node flow gain columns g_i = B' (grounded solve of e_i). Any balanced
// combination sum_i g_i m_i reproduces the pseudoinverse flows exactly.
Eigen::MatrixXd node_flow_gains(const FlowNetwork& net) {
  const int n = net.num_nodes();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (const auto& e : net.edges()) {
    int a = e.a, b = e.b;
    if (a != 0) lap(a - 1, a - 1) += 1.0;
    if (b != 0) lap(b - 1, b - 1) += 1.0;
    if (a != 0 && b != 0) {
      lap(a - 1, b - 1) -= 1.0;
      lap(b - 1, a - 1) -= 1.0;
    }
  }
  auto solver = lap.ldlt();
  Eigen::MatrixXd gains(net.num_edges(), n);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    x.setZero();
    if (i != 0) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
      rhs(i - 1) = 1.0;
      x.tail(n - 1) = solver.solve(rhs);
    }
    for (int e = 0; e < net.num_edges(); ++e) {
      gains(e, i) = x(net.edge(e).a) - x(net.edge(e).b);
    }
  }
  return gains;
}

struct EpigraphProblem {
  // flows(e) = coef.row(e) . a + constant(e), with a = decision - lower.
  Eigen::MatrixXd coef;
  Eigen::VectorXd constant;
  std::vector<double> lower, upper;  // per decision variable
  std::vector<int> controllable;     // edge indices entering the objective
  // Optional equality sum(a) = balance_rhs.
  bool has_balance = false;
  double balance_rhs = 0.0;
};

struct EpigraphOutcome {
  bool feasible = false;
  double t = 0.0;
  Eigen::VectorXd decision;  // absolute values (lower + a)
};

// min t s.t. |flows(a)| / capacity <= t on controllable edges, 0 <= a <= range,
// optionally sum(a) = balance_rhs; then a secondary pass pins the solution to
// the box-centered representative of the optimal face (1-norm distance).
EpigraphOutcome solve_epigraph(const FlowNetwork& net, const EpigraphProblem& p) {
  const int nv = static_cast<int>(p.lower.size());
  EpigraphOutcome out;

  auto build = [&](bool secondary, double t_star) {
    // Variables: a_0..a_{nv-1}, t, then (secondary) p_i, q_i splits.
    int total = nv + 1 + (secondary ? 2 * nv : 0);
    LpBuilder lp(total);
    const int t_var = nv;
    if (p.has_balance) {
      std::vector<std::pair<int, double>> row;
      for (int i = 0; i < nv; ++i) row.emplace_back(i, 1.0);
      lp.add_equality(row, p.balance_rhs);
    }
    for (int i = 0; i < nv; ++i) {
      lp.add_leq({{i, 1.0}}, p.upper[i] - p.lower[i]);
    }
    for (int e : p.controllable) {
      double cap = net.capacity(e);
      std::vector<std::pair<int, double>> pos, neg;
      for (int i = 0; i < nv; ++i) {
        double g = p.coef(e, i) / cap;
        if (g != 0.0) {
          pos.emplace_back(i, g);
          neg.emplace_back(i, -g);
        }
      }
      pos.emplace_back(t_var, -1.0);
      neg.emplace_back(t_var, -1.0);
      lp.add_leq(pos, -p.constant(e) / cap);
      lp.add_leq(neg, p.constant(e) / cap);
    }
    if (!secondary) {
      lp.set_objective(t_var, 1.0);
    } else {
      lp.add_leq({{t_var, 1.0}}, t_star + 1e-9 * std::max(1.0, t_star));
      for (int i = 0; i < nv; ++i) {
        double center = 0.5 * (p.lower[i] + p.upper[i]) - p.lower[i];
        lp.add_equality({{i, 1.0}, {nv + 1 + 2 * i, -1.0}, {nv + 2 + 2 * i, 1.0}},
                        center);
        lp.set_objective(nv + 1 + 2 * i, 1.0);
        lp.set_objective(nv + 2 + 2 * i, 1.0);
      }
    }
    return lp.solve();
  };

  auto primary = build(false, 0.0);
  if (primary.status != LpStatus::Optimal) return out;
  out.feasible = true;
  out.t = primary.x(nv);
  out.decision = primary.x.head(nv);

  auto secondary = build(true, out.t);
  if (secondary.status == LpStatus::Optimal) {
    out.decision = secondary.x.head(nv);
  }
  for (int i = 0; i < nv; ++i) out.decision(i) += p.lower[i];
  return out;
}

// Walks along zero-sum consensus directions (lower the suppliers whose max
// downstream flow is above average, raise those below) starting from the LP
// vertex. The largest max-downstream-flow is non-increasing along this
// direction, so the walk stays on the optimal face; it stops early when a box
// bound is reached, which is exactly the case where equalization may be
// impossible.
Eigen::VectorXd equalize_phi(const FlowNetwork& net, const EpigraphProblem& p,
                             Eigen::VectorXd a) {
  const int nv = static_cast<int>(p.lower.size());
  if (nv < 2 || p.controllable.empty()) return a;
  auto suppliers = net.suppliers();
  double lmax = 0.0;
  for (int e : p.controllable) {
    for (int k = 0; k < nv; ++k) {
      lmax = std::max(lmax, std::abs(p.coef(e, k)) / net.capacity(e));
    }
  }
  if (!(lmax > 0.0)) return a;
  const double eta = 0.5 / (lmax * nv);
  const Eigen::VectorXd start = a;

  auto eval = [&](const Eigen::VectorXd& point, Eigen::VectorXd& phi) {
    Eigen::VectorXd f = p.coef * point + p.constant;
    FlowAssignment flows(std::vector<double>(f.data(), f.data() + f.size()));
    OrientationView view(net, flows);
    auto report = max_downstream_flows(net, view, flows);
    double j = 0.0;
    for (int e : p.controllable) {
      j = std::max(j, std::abs(f(e)) / net.capacity(e));
    }
    for (int k = 0; k < nv; ++k) phi(k) = report.phi[suppliers[k]];
    return j;
  };

  Eigen::VectorXd phi(nv);
  double t_star = eval(a, phi);
  double spread0 = phi.maxCoeff() - phi.minCoeff();
  for (int iter = 0; iter < 200000; ++iter) {
    if (phi.maxCoeff() - phi.minCoeff() <= 1e-9) break;
    Eigen::VectorXd dir = Eigen::VectorXd::Constant(nv, phi.mean()) - phi;
    // Scale the step down so the iterate stays inside the box.
    double scale = 1.0;
    for (int k = 0; k < nv; ++k) {
      double step = eta * dir(k);
      double range = p.upper[k] - p.lower[k];
      if (step > 0.0 && step > range - a(k)) {
        scale = std::min(scale, (range - a(k)) / step);
      }
      if (step < 0.0 && step < -a(k)) scale = std::min(scale, -a(k) / step);
    }
    if (scale < 1e-9) break;  // a bound binds; equalization may be impossible
    a += (scale * eta) * dir;
    eval(a, phi);
  }

  // Accept the walk only if it actually equalized without giving up
  // optimality; otherwise keep the LP vertex.
  double j_final = eval(a, phi);
  double spread_final = phi.maxCoeff() - phi.minCoeff();
  bool optimal = j_final <= t_star + 1e-7 * std::max(1.0, t_star);
  if (!optimal || spread_final > std::min(spread0, 1e-6)) return start;
  return a;
}

MinimaxSolution finalize(const FlowNetwork& net, const OrientationView& view,
                         const EpigraphOutcome& lp,
                         const std::vector<double>& m_full) {
  MinimaxSolution sol;
  sol.status = MinimaxStatus::Optimal;
  sol.objective = lp.t;
  sol.flows = solve_flows(net, m_full);
  for (int e = 0; e < net.num_edges(); ++e) {
    double cap = net.capacity(e);
    double mag = std::abs(sol.flows[e]);
    if (mag >= cap * (1.0 - 1e-9)) {
      sol.boundary_feasible = true;
      if (mag >= cap) {
        sol.status = MinimaxStatus::Infeasible;
        sol.certificate = "capacity violated on edge {" +
                          std::to_string(net.edge(e).a) + ", " +
                          std::to_string(net.edge(e).b) + "}: |f| = " +
                          std::to_string(mag) + " >= " + std::to_string(cap);
      }
    }
  }
  (void)view;
  return sol;
}

}  // namespace

FlowSensitivity flow_sensitivity(const FlowNetwork& net) {
  FlowSensitivity s;
  s.suppliers = net.suppliers();
  Eigen::MatrixXd gains = node_flow_gains(net);
  s.gain.resize(net.num_edges(), static_cast<int>(s.suppliers.size()));
  for (size_t k = 0; k < s.suppliers.size(); ++k) {
    s.gain.col(static_cast<int>(k)) = gains.col(s.suppliers[k]);
  }
  s.offset = Eigen::VectorXd::Zero(net.num_edges());
  for (NodeId c : net.consumers()) {
    s.offset += gains.col(c) * net.commodity(c);
  }
  return s;
}

MinimaxSolution solve_minimax(const FlowNetwork& net) {
  auto suppliers = net.suppliers();
  const int ns = static_cast<int>(suppliers.size());

  double demand = 0.0;
  for (NodeId c : net.consumers()) demand -= net.commodity(c);
  double min_sum = 0.0, max_sum = 0.0;
  for (NodeId s : suppliers) {
    min_sum += net.supply_min(s);
    max_sum += net.supply_max(s);
  }
  double tol = 1e-9 * std::max(1.0, demand);
  if (demand < min_sum - tol || demand > max_sum + tol) {
    MinimaxSolution sol;
    sol.certificate = "total demand " + std::to_string(demand) +
                      " outside supplier box sum [" + std::to_string(min_sum) +
                      ", " + std::to_string(max_sum) + "]";
    return sol;
  }

  auto sens = flow_sensitivity(net);
  OrientationView view(net, solve_flows(net, [&] {
    // Any balanced commodity gives the same beta; use an even split.
    auto m = net.commodity();
    for (NodeId s : suppliers) m[s] = demand / ns;
    return m;
  }()));

  EpigraphProblem p;
  p.coef = sens.gain;
  p.constant = sens.offset;
  for (int k = 0; k < ns; ++k) {
    NodeId s = suppliers[k];
    p.lower.push_back(net.supply_min(s));
    p.upper.push_back(net.supply_max(s));
    p.constant += sens.gain.col(k) * net.supply_min(s);
  }
  // Decision variables are offsets above the lower bounds.
  double lower_total = 0.0;
  for (double lo : p.lower) lower_total += lo;
  p.has_balance = true;
  p.balance_rhs = demand - lower_total;
  p.controllable = view.controllable_edge_indices();

  auto lp = solve_epigraph(net, p);
  if (!lp.feasible) {
    MinimaxSolution sol;
    sol.certificate = "epigraph program infeasible";
    return sol;
  }

  lp.decision = equalize_phi(net, p, lp.decision - Eigen::VectorXd::Map(
                                          p.lower.data(), ns));
  for (int k = 0; k < ns; ++k) lp.decision(k) += p.lower[k];

  auto m = net.commodity();
  MinimaxSolution sol;
  for (int k = 0; k < ns; ++k) {
    m[suppliers[k]] = lp.decision(k);
  }
  sol = finalize(net, view, lp, m);
  sol.supplier_commodity.assign(lp.decision.data(), lp.decision.data() + ns);
  return sol;
}

MinimaxSolution solve_minimax_microgrid(const FlowNetwork& net,
                                        const std::vector<double>& droop,
                                        const std::vector<double>& p_min,
                                        const std::vector<double>& p_max) {
  auto suppliers = net.suppliers();
  const int ns = static_cast<int>(suppliers.size());
  const int n = net.num_nodes();

  double droop_sum = 0.0;
  for (NodeId s : suppliers) {
    if (!(droop[s] > 0.0)) throw InvalidNetwork("droop must be positive");
    droop_sum += droop[s];
  }

  Eigen::MatrixXd gains = node_flow_gains(net);
  // g_omega(e) = sum_i gains(e, i) * D_i: the flow response to a uniform
  // frequency shift.
  Eigen::VectorXd g_omega = Eigen::VectorXd::Zero(net.num_edges());
  for (NodeId s : suppliers) g_omega += gains.col(s) * droop[s];

  double load_total = 0.0;
  Eigen::VectorXd constant = Eigen::VectorXd::Zero(net.num_edges());
  for (NodeId c : net.consumers()) {
    constant += gains.col(c) * net.commodity(c);
    load_total += net.commodity(c);
  }
  constant -= g_omega * (load_total / droop_sum);

  EpigraphProblem p;
  p.coef.resize(net.num_edges(), ns);
  for (int k = 0; k < ns; ++k) {
    NodeId s = suppliers[k];
    p.coef.col(k) = gains.col(s) - g_omega / droop_sum;
    p.lower.push_back(p_min[s]);
    p.upper.push_back(p_max[s]);
    constant += p.coef.col(k) * p_min[s];
  }
  p.constant = constant;

  // Beta depends on roles only; evaluate the view at an arbitrary box point.
  std::vector<double> m0(n);
  {
    double p_sum = load_total;
    for (NodeId s : suppliers) p_sum += p_min[s];
    double omega = p_sum / droop_sum;
    for (NodeId i = 0; i < n; ++i) {
      m0[i] = (net.is_supplier(i) ? p_min[i] : net.commodity(i)) -
              omega * (net.is_supplier(i) ? droop[i] : 0.0);
    }
  }
  OrientationView view(net, solve_flows(net, m0));
  p.controllable = view.controllable_edge_indices();

  auto lp = solve_epigraph(net, p);
  if (!lp.feasible) {
    MinimaxSolution sol;
    sol.certificate = "epigraph program infeasible";
    return sol;
  }

  lp.decision = equalize_phi(net, p, lp.decision - Eigen::VectorXd::Map(
                                          p.lower.data(), ns));
  for (int k = 0; k < ns; ++k) lp.decision(k) += p.lower[k];

  // Reconstruct effective injections at the optimal generator powers.
  std::vector<double> m(n);
  double p_sum = load_total;
  for (int k = 0; k < ns; ++k) p_sum += lp.decision(k);
  double omega = p_sum / droop_sum;
  for (NodeId i = 0; i < n; ++i) {
    m[i] = net.is_supplier(i) ? -omega * droop[i] : net.commodity(i);
  }
  for (int k = 0; k < ns; ++k) m[suppliers[k]] += lp.decision(k);

  auto sol = finalize(net, view, lp, m);
  sol.supplier_commodity.assign(lp.decision.data(), lp.decision.data() + ns);
  return sol;
}

}  // namespace treeflow
