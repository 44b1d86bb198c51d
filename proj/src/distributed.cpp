#include "treeflow/distributed.hpp"

#include <algorithm>
#include <cmath>

namespace treeflow {

BetaPropagation::BetaPropagation(const FlowNetwork& net)
    : fwd_(net.num_edges()), bwd_(net.num_edges()) {
  for (int e = 0; e < net.num_edges(); ++e) {
    fwd_[e] = net.is_supplier(net.edge(e).b);  // (a, b): head is b
    bwd_[e] = net.is_supplier(net.edge(e).a);  // (b, a): head is a
  }
}

int BetaPropagation::run(const FlowNetwork& net) {
  int sweeps = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<char> next_fwd = fwd_, next_bwd = bwd_;
    for (int e = 0; e < net.num_edges(); ++e) {
      NodeId a = net.edge(e).a, b = net.edge(e).b;
      // (i, j) = (a, b): OR over beta_hat_{b,k} for neighbors k != a of b.
      if (!fwd_[e]) {
        for (const auto& [k, e2] : net.neighbors(b)) {
          if (k == a) continue;
          bool hop = (net.edge(e2).a == b) ? fwd_[e2] : bwd_[e2];
          if (hop) {
            next_fwd[e] = 1;
            changed = true;
            break;
          }
        }
      }
      if (!bwd_[e]) {
        for (const auto& [k, e2] : net.neighbors(a)) {
          if (k == b) continue;
          bool hop = (net.edge(e2).a == a) ? fwd_[e2] : bwd_[e2];
          if (hop) {
            next_bwd[e] = 1;
            changed = true;
            break;
          }
        }
      }
    }
    if (changed) {
      fwd_ = std::move(next_fwd);
      bwd_ = std::move(next_bwd);
      ++sweeps;
    }
  }
  return sweeps;
}

bool BetaPropagation::value(const FlowNetwork& net, NodeId i, NodeId j) const {
  int e = net.edge_index(i, j);
  return net.edge(e).a == i ? fwd_[e] : bwd_[e];
}

double estimator_target(const std::vector<OutEdgeView>& views) {
  double target = 0.0;
  for (const auto& v : views) {
    target = std::max({target, v.indicated_ratio, v.neighbor_phi});
  }
  return target;
}

AggregateStats compute_aggregates(const std::vector<double>& phi_hat,
                                  const std::vector<char>& gamma) {
  const int ns = static_cast<int>(phi_hat.size());
  AggregateStats stats;
  double sum = 0.0;
  for (double v : phi_hat) sum += v;
  stats.phi_avg = sum / ns;
  stats.phi_avg_nonsat.resize(ns);
  stats.phi_max_sat.resize(ns);
  for (int i = 0; i < ns; ++i) {
    double acc = phi_hat[i];
    int count = 1;
    double sat_max = 0.0;
    for (int j = 0; j < ns; ++j) {
      if (j == i) continue;
      if (gamma[j]) {
        acc += phi_hat[j];
        ++count;
      } else {
        sat_max = std::max(sat_max, phi_hat[j]);
      }
    }
    stats.phi_avg_nonsat[i] = acc / count;
    stats.phi_max_sat[i] = sat_max;
  }
  return stats;
}

SupplierControl::SupplierControl(ControlMode mode, std::vector<double> value,
                                 std::vector<double> lower,
                                 std::vector<double> upper)
    : mode(mode),
      value(std::move(value)),
      lower(std::move(lower)),
      upper(std::move(upper)),
      gamma(this->value.size(), 1),
      zeta(this->value.size(), 0) {
  refresh_gamma();
}

void SupplierControl::refresh_gamma() {
  for (size_t i = 0; i < value.size(); ++i) {
    gamma[i] = (value[i] > lower[i] && value[i] < upper[i]) ? 1 : 0;
  }
}

void control_step(SupplierControl& ctrl, const std::vector<double>& phi_hat,
                  const AggregateStats& stats, double dt,
                  const GainConfig& gains) {
  const int ns = static_cast<int>(ctrl.value.size());
  const double sign = (ctrl.mode == ControlMode::Power) ? 1.0 : -1.0;
  bool any_saturated =
      std::any_of(ctrl.gamma.begin(), ctrl.gamma.end(), [](char g) { return !g; });

  std::vector<double> deriv(ns, 0.0);
  for (int i = 0; i < ns; ++i) {
    double correction =
        sign * (-gains.k_p * (phi_hat[i] - stats.phi_avg_nonsat[i]) -
                gains.k_p_gamma * (stats.phi_avg_nonsat[i] - stats.phi_max_sat[i]));
    ctrl.zeta[i] = ((ctrl.value[i] <= ctrl.lower[i] && correction > 0.0) ||
                    (ctrl.value[i] >= ctrl.upper[i] && correction < 0.0))
                       ? 1
                       : 0;
    if (!any_saturated) {
      deriv[i] = sign * -gains.k_p * (phi_hat[i] - stats.phi_avg);
    } else if (ctrl.gamma[i] || ctrl.zeta[i]) {
      deriv[i] = correction;
    } else {
      deriv[i] = 0.0;  // hold while saturated with no way back in
    }
  }
  for (int i = 0; i < ns; ++i) {
    ctrl.value[i] =
        std::clamp(ctrl.value[i] + dt * deriv[i], ctrl.lower[i], ctrl.upper[i]);
  }
  ctrl.refresh_gamma();
}

}  // namespace treeflow
