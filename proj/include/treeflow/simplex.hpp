/*
  Dense two-phase simplex for small LPs in standard form:

      min c'x   s.t.  A x = b,  x >= 0.

  Bland's rule throughout, so pivoting is deterministic and cycle-free.
  Problem sizes here are tiny (tens to a few hundred rows), so a dense
  tableau is plenty.
*/
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace treeflow {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  // For infeasible problems: the phase-1 residual (how far from feasibility).
  double infeasibility = 0.0;
};

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& c);

// Helper to assemble standard-form programs row by row.
class LpBuilder {
 public:
  explicit LpBuilder(int num_vars) : num_vars_(num_vars) {}

  int num_vars() const { return num_vars_; }

  // Adds a fresh slack variable and returns its index.
  int add_slack();

  // row . x (+ slack if provided) = rhs
  void add_equality(const std::vector<std::pair<int, double>>& row, double rhs);
  // row . x <= rhs  (slack added internally)
  void add_leq(const std::vector<std::pair<int, double>>& row, double rhs);

  void set_objective(int var, double coeff);

  LpResult solve() const;

 private:
  struct Row {
    std::vector<std::pair<int, double>> entries;
    double rhs;
  };
  int num_vars_;
  int extra_vars_ = 0;
  std::vector<Row> rows_;
  std::vector<std::pair<int, double>> objective_;
};

}  // namespace treeflow
