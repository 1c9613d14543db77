#pragma once

// Small dense linear programs, solved to optimality with primal and dual
// certificates.

#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace stochmatch::lp {

enum class Sense { kLe, kEq, kGe };

// maximize c.x  subject to  a_i.x (sense_i) b_i,  lower <= x <= upper.
// Lower bounds must be finite; upper bounds may be +inf.
class LpProblem {
 public:
  int add_variable(double objective, double lower = 0.0, double upper = kInf);
  // Sparse row; repeated indices are summed.
  int add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs);

  int num_variables() const { return static_cast<int>(objective_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    Sense sense;
    double rhs;
  };

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

std::string to_string(Status status);

struct LpSolution {
  Status status = Status::kInfeasible;
  double value = 0.0;
  std::vector<double> x;
  // Row duals: >= 0 on <= rows, <= 0 on >= rows, free on = rows.
  std::vector<double> y;
  // c - A^T y per variable.
  std::vector<double> reduced_costs;
  double dual_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  long iterations = 0;
};

struct SolveOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  // Iterations of normalized Dantzig pricing before switching to Bland's
  // rule; 0 means 10 * (rows + columns).
  long bland_after = 0;
  long max_iterations = 2'000'000;
};

// Two-phase bounded-variable revised simplex on an explicit dense basis
// inverse. Deterministic. Throws Error(kInvalidArgument) on malformed input.
LpSolution solve(const LpProblem& problem, const SolveOptions& options = {});

// Process-wide tally of solve() calls; the gap is over optimal solves.
struct SolveStats {
  long solves = 0;
  long optimal = 0;
  double max_duality_gap = 0.0;
};
SolveStats solve_stats();
void reset_solve_stats();

// Residuals and gap for a candidate primal/dual pair; used by solve() and by
// tests that want an independent check.
void certify(const LpProblem& problem, LpSolution& solution);

}  // namespace stochmatch::lp
