#include "treeflow/simplex.hpp"

#include <cmath>
#include <limits>

namespace treeflow {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
  Eigen::MatrixXd t;        // m x (n + 1), last column is the rhs
  Eigen::RowVectorXd cost;  // 1 x (n + 1), reduced costs + negated objective
  std::vector<int> basis;
  int num_real = -1;  // columns >= num_real (artificials) may never enter

  int rows() const { return static_cast<int>(t.rows()); }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && std::abs(t(i, c)) > 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    if (std::abs(cost(c)) > 0.0) cost -= cost(c) * t.row(r);
    basis[r] = c;
  }

  // Bland's rule; returns false when optimal, throws nothing.
  bool iterate(bool& unbounded) {
    int entering = -1;
    int limit = num_real >= 0 ? num_real : cols();
    for (int j = 0; j < limit; ++j) {
      if (cost(j) < -kTol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return false;
    int leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows(); ++i) {
      if (t(i, entering) > kTol) {
        double ratio = t(i, cols()) / t(i, entering);
        if (ratio < best_ratio - kTol ||
            (ratio < best_ratio + kTol &&
             (leaving < 0 || basis[i] < basis[leaving]))) {
          best_ratio = ratio;
          leaving = i;
        }
      }
    }
    if (leaving < 0) {
      unbounded = true;
      return false;
    }
    pivot(leaving, entering);
    return true;
  }
};

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());

  Tableau tab;
  tab.t.setZero(m, n + m + 1);
  tab.t.leftCols(n) = a;
  tab.t.col(n + m) = b;
  // Normalize signs before installing the artificial identity block so each
  // artificial enters its row with coefficient +1.
  for (int i = 0; i < m; ++i) {
    if (tab.t(i, n + m) < 0.0) tab.t.row(i) = -tab.t.row(i);
  }
  tab.t.middleCols(n, m) = Eigen::MatrixXd::Identity(m, m);
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) tab.basis[i] = n + i;
  tab.num_real = n;

  // Phase 1: minimize the sum of artificials.
  tab.cost = Eigen::RowVectorXd::Zero(n + m + 1);
  for (int i = 0; i < m; ++i) tab.cost -= tab.t.row(i);
  tab.cost.segment(n, m).setZero();

  bool unbounded = false;
  while (tab.iterate(unbounded)) {
  }

  LpResult result;
  double phase1 = -tab.cost(n + m);
  double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (phase1 > 1e-7 * scale) {
    result.status = LpStatus::Infeasible;
    result.infeasibility = phase1;
    return result;
  }

  // Drive remaining artificials out of the basis; a row with no admissible
  // pivot is redundant and can be zeroed in place.
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > kTol) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
    } else {
      tab.t.row(i).setZero();
      tab.basis[i] = n + i;  // harmless: the row is identically zero
    }
  }

  // Phase 2: rebuild reduced costs from the real objective, forbid artificials.
  tab.cost.setZero();
  tab.cost.head(n) = c.transpose();
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n && std::abs(tab.cost(tab.basis[i])) > 0.0) {
      tab.cost -= tab.cost(tab.basis[i]) * tab.t.row(i);
    }
  }
  tab.cost.segment(n, m).setConstant(1.0);  // never re-enter

  while (tab.iterate(unbounded)) {
  }
  if (unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) result.x(tab.basis[i]) = tab.t(i, n + m);
  }
  result.objective = c.dot(result.x);
  return result;
}

int LpBuilder::add_slack() { return num_vars_ + extra_vars_++; }

void LpBuilder::add_equality(const std::vector<std::pair<int, double>>& row,
                             double rhs) {
  rows_.push_back({row, rhs});
}

void LpBuilder::add_leq(const std::vector<std::pair<int, double>>& row,
                        double rhs) {
  auto with_slack = row;
  with_slack.emplace_back(add_slack(), 1.0);
  rows_.push_back({std::move(with_slack), rhs});
}

void LpBuilder::set_objective(int var, double coeff) {
  objective_.emplace_back(var, coeff);
}

LpResult LpBuilder::solve() const {
  const int n = num_vars_ + extra_vars_;
  const int m = static_cast<int>(rows_.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& [j, v] : rows_[i].entries) a(i, j) += v;
    b(i) = rows_[i].rhs;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (const auto& [j, v] : objective_) c(j) += v;
  auto result = solve_lp(a, b, c);
  if (result.status == LpStatus::Optimal) {
    result.x.conservativeResize(num_vars_);
  }
  return result;
}

}  // namespace treeflow
