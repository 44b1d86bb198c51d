#include "treeflow/microgrid.hpp"

#include <cmath>
#include <deque>

#include <Eigen/Dense>

namespace treeflow {

SteadyState steady_state(const GridModel& model) {
  const auto& net = model.net;
  double p_sum = 0.0, d_sum = 0.0;
  for (NodeId i = 0; i < net.num_nodes(); ++i) {
    p_sum += model.power[i];
    if (net.is_supplier(i)) d_sum += model.droop[i];
  }
  SteadyState ss;
  ss.omega = p_sum / d_sum;
  std::vector<double> m(net.num_nodes());
  for (NodeId i = 0; i < net.num_nodes(); ++i) {
    m[i] = model.power[i] -
           (net.is_supplier(i) ? ss.omega * model.droop[i] : 0.0);
  }
  // Leaf elimination is exact on trees and cheap enough for per-tick use.
  ss.flows = leaf_elimination_oracle(net, m);
  for (int e = 0; e < net.num_edges(); ++e) {
    if (std::abs(ss.flows[e]) >= model.coupling[e]) {
      ss.feasible = false;
      throw InfeasibleSynchronization(
          "|f| >= A on edge {" + std::to_string(net.edge(e).a) + ", " +
          std::to_string(net.edge(e).b) + "}: no phase-locked solution");
    }
  }
  return ss;
}

std::vector<double> equilibrium_angles(const GridModel& model,
                                       const FlowAssignment& flows) {
  const auto& net = model.net;
  std::vector<double> delta(net.num_nodes(), 0.0);
  std::vector<char> seen(net.num_nodes(), 0);
  std::deque<NodeId> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : net.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = 1;
      // f_uv = A sin(delta_u - delta_v)
      double f_uv = flows.at(net, u, v);
      delta[v] = delta[u] - std::asin(f_uv / model.coupling[e]);
      queue.push_back(v);
    }
  }
  return delta;
}

GridSimulator::GridSimulator(const GridModel* model)
    : model_(model), delta_(model->net.num_nodes(), 0.0) {
  for (NodeId i = 0; i < model->net.num_nodes(); ++i) {
    if (!model->net.is_supplier(i)) loads_.push_back(i);
  }
}

void GridSimulator::init_equilibrium() {
  auto ss = steady_state(*model_);
  delta_ = equilibrium_angles(*model_, ss.flows);
  solve_loads();
}

void GridSimulator::init_flat() {
  std::fill(delta_.begin(), delta_.end(), 0.0);
  solve_loads();
}

double GridSimulator::node_residual(NodeId i) const {
  double r = model_->power[i];
  for (const auto& [j, e] : model_->net.neighbors(i)) {
    r -= model_->coupling[e] * std::sin(delta_[i] - delta_[j]);
  }
  return r;
}

double GridSimulator::load_residual() const {
  double worst = 0.0;
  for (NodeId i : loads_) worst = std::max(worst, std::abs(node_residual(i)));
  return worst;
}

void GridSimulator::solve_loads() {
  const auto& net = model_->net;
  const int nl = static_cast<int>(loads_.size());
  if (nl == 0) return;
  std::vector<int> load_index(net.num_nodes(), -1);
  for (int k = 0; k < nl; ++k) load_index[loads_[k]] = k;

  double scale = 1.0;
  for (double p : model_->power) scale = std::max(scale, std::abs(p));
  const double tol = 1e-10 * scale;

  Eigen::VectorXd r(nl);
  auto fill_residual = [&] {
    for (int k = 0; k < nl; ++k) r(k) = node_residual(loads_[k]);
  };
  fill_residual();

  std::vector<double> history;
  for (int iter = 0; iter < 50; ++iter) {
    double norm = r.cwiseAbs().maxCoeff();
    history.push_back(norm);
    if (norm <= tol) return;

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nl, nl);
    for (int k = 0; k < nl; ++k) {
      NodeId i = loads_[k];
      for (const auto& [j, e] : net.neighbors(i)) {
        double c = model_->coupling[e] * std::cos(delta_[i] - delta_[j]);
        jac(k, k) -= c;
        if (load_index[j] >= 0) jac(k, load_index[j]) += c;
      }
    }
    Eigen::VectorXd step = jac.fullPivLu().solve(-r);

    // Damping by halving until the residual norm drops.
    double lambda = 1.0;
    std::vector<double> saved = delta_;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      for (int k = 0; k < nl; ++k) delta_[loads_[k]] = saved[loads_[k]] + lambda * step(k);
      fill_residual();
      if (r.cwiseAbs().maxCoeff() < norm) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      delta_ = saved;
      std::string msg = "load angle solve stalled; residual history:";
      for (double h : history) msg += " " + std::to_string(h);
      throw NewtonDivergence(msg);
    }
  }
  throw NewtonDivergence("load angle solve did not reach tolerance in 50 iterations");
}

void GridSimulator::perturb_angle(NodeId i, double offset) {
  delta_[i] += offset;
  solve_loads();
}

void GridSimulator::step(double dt) {
  const auto& net = model_->net;
  double rate = 0.0;
  for (NodeId i = 0; i < net.num_nodes(); ++i) {
    if (!net.is_supplier(i)) continue;
    double coupling_sum = 0.0;
    for (const auto& [j, e] : net.neighbors(i)) coupling_sum += model_->coupling[e];
    rate = std::max(rate, coupling_sum / model_->droop[i]);
  }
  if (dt * rate >= 0.5) {
    throw StepTooLarge("dt exceeds the explicit stability bound for the droop dynamics");
  }
  std::vector<double> next = delta_;
  for (NodeId i = 0; i < net.num_nodes(); ++i) {
    if (net.is_supplier(i)) {
      next[i] = delta_[i] + dt * node_residual(i) / model_->droop[i];
    }
  }
  delta_ = std::move(next);
  solve_loads();
  t_ += dt;
}

FlowAssignment GridSimulator::line_flows() const {
  const auto& net = model_->net;
  std::vector<double> xi(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    xi[e] = model_->coupling[e] *
            std::sin(delta_[net.edge(e).a] - delta_[net.edge(e).b]);
  }
  return FlowAssignment(std::move(xi));
}

std::vector<double> GridSimulator::generator_frequencies() const {
  std::vector<double> freq;
  for (NodeId i = 0; i < model_->net.num_nodes(); ++i) {
    if (model_->net.is_supplier(i)) {
      freq.push_back(node_residual(i) / model_->droop[i]);
    }
  }
  return freq;
}

}  // namespace treeflow
