#include "treeflow/closed_loop.hpp"

#include <algorithm>
#include <cmath>

namespace treeflow {

ClosedLoop::ClosedLoop(GridModel model, ControlMode mode, bool control_enabled,
                       GainConfig gains, FlowBackend backend, double dt)
    : model_(std::move(model)),
      gains_(gains),
      backend_(backend),
      control_enabled_(control_enabled),
      dt_(dt),
      suppliers_(model_.net.suppliers()),
      beta_(model_.net),
      estimator_(model_.net.num_nodes()) {
  beta_sweeps_ = beta_.run(model_.net);
  controllable_.resize(model_.net.num_edges());
  for (int e = 0; e < model_.net.num_edges(); ++e) {
    controllable_[e] = beta_.forward(e) && beta_.backward(e);
  }
  estimator_substeps_ =
      std::max(1, static_cast<int>(std::ceil(dt_ * gains_.k_phi / 0.1)));

  std::vector<double> value, lo, hi;
  for (NodeId s : suppliers_) {
    if (mode == ControlMode::Power) {
      value.push_back(model_.power[s]);
      lo.push_back(model_.p_min[s]);
      hi.push_back(model_.p_max[s]);
    } else {
      value.push_back(model_.droop[s]);
      lo.push_back(model_.d_min[s]);
      hi.push_back(model_.d_max[s]);
    }
  }
  control_ = SupplierControl(mode, std::move(value), std::move(lo), std::move(hi));

  if (backend_ == FlowBackend::Dynamic) {
    sim_ = std::make_unique<GridSimulator>(&model_);
    sim_->init_equilibrium();
  }
  refresh_flows();
  // Warm-start the estimator at its fixed point so the controller does not
  // react to the artificial ramp-up of estimates from zero; agents are
  // assumed to have been tracking flows before control engages.
  OrientationView view(model_.net, flows_);
  estimator_.phi_hat = phi_by_recursion(model_.net, view, flows_);
}

void ClosedLoop::refresh_flows() {
  if (backend_ == FlowBackend::QuasiStatic) {
    auto ss = steady_state(model_);
    flows_ = std::move(ss.flows);
    omega_ = ss.omega;
  } else {
    flows_ = sim_->line_flows();
    auto freq = sim_->generator_frequencies();
    omega_ = 0.0;
    for (double f : freq) omega_ += f;
    omega_ /= static_cast<double>(freq.size());
  }
}

void ClosedLoop::set_node_power(NodeId i, double p) {
  model_.power[i] = p;
  if (sim_) sim_->solve_loads();
  refresh_flows();
}

void ClosedLoop::apply_supplier_values(const std::vector<double>& values) {
  for (size_t k = 0; k < suppliers_.size(); ++k) {
    if (control_.mode == ControlMode::Power) {
      model_.power[suppliers_[k]] = values[k];
    } else {
      model_.droop[suppliers_[k]] = values[k];
    }
    control_.value[k] = values[k];
  }
  control_.refresh_gamma();
  if (sim_) sim_->solve_loads();
  refresh_flows();
}

void ClosedLoop::step() {
  if (backend_ == FlowBackend::Dynamic) {
    sim_->step(dt_);
  }
  refresh_flows();

  double sub_dt = dt_ / estimator_substeps_;
  for (int k = 0; k < estimator_substeps_; ++k) {
    step_estimator(model_.net, beta_, flows_, estimator_, sub_dt, gains_.k_phi);
  }

  if (control_enabled_) {
    auto phi = supplier_phi_hat();
    auto stats = compute_aggregates(phi, control_.gamma);
    control_step(control_, phi, stats, dt_, gains_);
    for (size_t k = 0; k < suppliers_.size(); ++k) {
      if (control_.mode == ControlMode::Power) {
        model_.power[suppliers_[k]] = control_.value[k];
      } else {
        model_.droop[suppliers_[k]] = control_.value[k];
      }
    }
  }
  t_ += dt_;
}

double ClosedLoop::j_xi() const {
  double j = 0.0;
  for (int e = 0; e < model_.net.num_edges(); ++e) {
    if (controllable_[e]) {
      j = std::max(j, std::abs(flows_[e]) / model_.net.capacity(e));
    }
  }
  return j;
}

std::vector<double> ClosedLoop::supplier_phi_hat() const {
  std::vector<double> phi;
  phi.reserve(suppliers_.size());
  for (NodeId s : suppliers_) phi.push_back(estimator_.phi_hat[s]);
  return phi;
}

double ClosedLoop::supplier_phi_spread() const {
  auto phi = supplier_phi_hat();
  auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  return *hi - *lo;
}

bool run_until_steady(ClosedLoop& loop, double t_max, double value_tol,
                      double j_drift_tol, int check_every) {
  double last_j = loop.j_xi();
  std::vector<double> last_values = loop.control().value;
  int tick = 0;
  while (loop.time() < t_max) {
    loop.step();
    if (++tick % check_every == 0) {
      double j = loop.j_xi();
      const auto& values = loop.control().value;
      double drift = 0.0;
      for (size_t i = 0; i < values.size(); ++i) {
        drift = std::max(drift, std::abs(values[i] - last_values[i]));
      }
      bool done = drift <= value_tol && std::abs(j - last_j) <= j_drift_tol;
      last_j = j;
      last_values = values;
      if (done) return true;
    }
  }
  return false;
}

}  // namespace treeflow
