#include "lpcore.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace stochmatch::lp {

int LpProblem::add_variable(double objective, double lower, double upper) {
  objective_.push_back(objective);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return num_variables() - 1;
}

int LpProblem::add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs) {
  rows_.push_back({std::move(coeffs), sense, rhs});
  return num_rows() - 1;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::kOptimal:
      return "optimal";
    case Status::kInfeasible:
      return "infeasible";
    case Status::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

enum class VarState : unsigned char { kBasic, kAtLower, kAtUpper };

class Simplex {
 public:
  Simplex(const LpProblem& problem, const SolveOptions& options)
      : problem_(problem), opt_(options) {
    m_ = problem.num_rows();
    n_ = problem.num_variables();
    dense_.assign(static_cast<std::size_t>(m_) * n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (const auto& [j, a] : problem.rows()[i].coeffs) dense_[col_offset(j) + i] += a;
    }
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) rhs_[i] = problem.rows()[i].rhs;
  }

  LpSolution run() {
    setup();
    LpSolution sol;
    if (num_artificial_ > 0) {
      std::vector<double> cost(num_vars_, 0.0);
      for (int j = artificial_begin_; j < num_vars_; ++j) cost[j] = -1.0;
      const Status s = iterate(cost, /*phase_one=*/true);
      (void)s;
      double infeas = 0.0;
      for (int j = artificial_begin_; j < num_vars_; ++j) infeas += x_[j];
      double scale = 1.0;
      for (double b : rhs_) scale = std::max(scale, std::fabs(b));
      if (infeas > opt_.feasibility_tol * scale * 10.0) {
        sol.status = Status::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
      // Artificials may stay basic at zero but can never grow again.
      for (int j = artificial_begin_; j < num_vars_; ++j) {
        upper_[j] = 0.0;
        if (state_[j] != VarState::kBasic) {
          x_[j] = 0.0;
          state_[j] = VarState::kAtLower;
        }
      }
    }
    std::vector<double> cost(num_vars_, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = problem_.objective()[j];
    const Status s = iterate(cost, /*phase_one=*/false);
    sol.iterations = iterations_;
    if (s == Status::kUnbounded) {
      sol.status = Status::kUnbounded;
      return sol;
    }
    sol.status = Status::kOptimal;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      sol.x[j] = std::clamp(sol.x[j], problem_.lower()[j], problem_.upper()[j]);
    }
    compute_duals(cost);
    sol.y = y_;
    certify(problem_, sol);
    return sol;
  }

 private:
  std::size_t col_offset(int j) const { return static_cast<std::size_t>(j) * m_; }

  // Unit columns (slacks and artificials) are stored as (row, sign).
  bool is_unit(int j) const { return j >= n_; }

  void setup() {
    // Variable layout: structurals, one slack per inequality row, artificials.
    lower_.assign(problem_.lower().begin(), problem_.lower().end());
    upper_.assign(problem_.upper().begin(), problem_.upper().end());
    for (int j = 0; j < n_; ++j) {
      require(std::isfinite(problem_.objective()[j]), "LP objective coefficient is not finite");
      require(std::isfinite(lower_[j]), "LP variable lower bounds must be finite");
      require(!std::isnan(upper_[j]) && upper_[j] >= lower_[j], "LP variable bounds are inconsistent");
    }
    for (int i = 0; i < m_; ++i) {
      require(std::isfinite(rhs_[i]), "LP right-hand side is not finite");
      for (const auto& [j, a] : problem_.rows()[i].coeffs) {
        require(j >= 0 && j < n_, "LP row references an unknown variable");
        require(std::isfinite(a), "LP coefficient is not finite");
      }
    }
    unit_row_.assign(n_, -1);
    unit_sign_.assign(n_, 0.0);
    std::vector<int> slack_of(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const Sense s = problem_.rows()[i].sense;
      if (s == Sense::kEq) continue;
      slack_of[i] = static_cast<int>(lower_.size());
      lower_.push_back(0.0);
      upper_.push_back(kInf);
      unit_row_.push_back(i);
      unit_sign_.push_back(s == Sense::kLe ? 1.0 : -1.0);
    }
    artificial_begin_ = static_cast<int>(lower_.size());

    x_.assign(lower_.begin(), lower_.end());
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      const double* col = &dense_[col_offset(j)];
      for (int i = 0; i < m_; ++i) resid[i] -= col[i] * x_[j];
    }

    head_.assign(m_, -1);
    std::vector<double> diag(m_, 1.0);
    for (int i = 0; i < m_; ++i) {
      const int s = slack_of[i];
      if (s >= 0 && resid[i] * unit_sign_[s] >= 0.0) {
        head_[i] = s;
        x_[s] = resid[i] * unit_sign_[s];
        diag[i] = unit_sign_[s];
        continue;
      }
      const double sign = resid[i] >= 0.0 ? 1.0 : -1.0;
      const int a = static_cast<int>(lower_.size());
      lower_.push_back(0.0);
      upper_.push_back(kInf);
      unit_row_.push_back(i);
      unit_sign_.push_back(sign);
      x_.push_back(std::fabs(resid[i]));
      head_[i] = a;
      diag[i] = sign;
    }
    num_vars_ = static_cast<int>(lower_.size());
    num_artificial_ = num_vars_ - artificial_begin_;
    x_.resize(num_vars_);

    state_.assign(num_vars_, VarState::kAtLower);
    for (int i = 0; i < m_; ++i) state_[head_[i]] = VarState::kBasic;

    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0 / diag[i];

    col_weight_.resize(num_vars_);
    for (int j = 0; j < num_vars_; ++j) {
      if (is_unit(j)) {
        col_weight_[j] = std::sqrt(2.0);
      } else {
        double s = 1.0;
        const double* col = &dense_[col_offset(j)];
        for (int i = 0; i < m_; ++i) s += col[i] * col[i];
        col_weight_[j] = std::sqrt(s);
      }
    }
    y_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
  }

  double column_dot(int j, const std::vector<double>& v) const {
    if (is_unit(j)) return unit_sign_[j] * v[unit_row_[j]];
    const double* col = &dense_[col_offset(j)];
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += col[i] * v[i];
    return s;
  }

  // alpha = B^{-1} A_j
  void ftran(int j) {
    if (is_unit(j)) {
      const int r = unit_row_[j];
      const double s = unit_sign_[j];
      for (int i = 0; i < m_; ++i) alpha_[i] = s * binv_[static_cast<std::size_t>(i) * m_ + r];
      return;
    }
    const double* col = &dense_[col_offset(j)];
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += row[k] * col[k];
      alpha_[i] = s;
    }
  }

  void compute_duals(const std::vector<double>& cost) {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[head_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) y_[k] += cb * row[k];
    }
  }

  // x_B = B^{-1} (b - N x_N)
  void recompute_basic_values() {
    std::vector<double> r = rhs_;
    for (int j = 0; j < num_vars_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      if (is_unit(j)) {
        r[unit_row_[j]] -= unit_sign_[j] * x_[j];
      } else {
        const double* col = &dense_[col_offset(j)];
        for (int i = 0; i < m_; ++i) r[i] -= col[i] * x_[j];
      }
    }
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      double s = 0.0;
      for (int k = 0; k < m_; ++k) s += row[k] * r[k];
      x_[head_[i]] = s;
    }
  }

  // Gauss-Jordan inversion of the current basis with partial pivoting.
  bool reinvert() {
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int c = 0; c < m_; ++c) {
      const int j = head_[c];
      if (is_unit(j)) {
        b[static_cast<std::size_t>(unit_row_[j]) * m_ + c] = unit_sign_[j];
      } else {
        const double* col = &dense_[col_offset(j)];
        for (int i = 0; i < m_; ++i) b[static_cast<std::size_t>(i) * m_ + c] = col[i];
      }
    }
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    auto at = [this](std::vector<double>& v, int r, int c) -> double& {
      return v[static_cast<std::size_t>(r) * m_ + c];
    };
    for (int c = 0; c < m_; ++c) {
      int piv = c;
      for (int r = c + 1; r < m_; ++r) {
        if (std::fabs(at(b, r, c)) > std::fabs(at(b, piv, c))) piv = r;
      }
      if (std::fabs(at(b, piv, c)) < 1e-14) return false;
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(at(b, piv, k), at(b, c, k));
          std::swap(at(inv, piv, k), at(inv, c, k));
        }
      }
      const double d = at(b, c, c);
      for (int k = 0; k < m_; ++k) {
        at(b, c, k) /= d;
        at(inv, c, k) /= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = at(b, r, c);
        if (f == 0.0) continue;
        double* br = &b[static_cast<std::size_t>(r) * m_];
        double* ir = &inv[static_cast<std::size_t>(r) * m_];
        const double* bc = &b[static_cast<std::size_t>(c) * m_];
        const double* ic = &inv[static_cast<std::size_t>(c) * m_];
        for (int k = 0; k < m_; ++k) {
          br[k] -= f * bc[k];
          ir[k] -= f * ic[k];
        }
      }
    }
    // Rows of inv are indexed by basis column position = basis row position.
    binv_ = std::move(inv);
    return true;
  }

  void pivot(int r) {
    const double piv = alpha_[r];
    double* prow = &binv_[static_cast<std::size_t>(r) * m_];
    for (int k = 0; k < m_; ++k) prow[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = alpha_[i];
      if (f == 0.0) continue;
      double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
    }
  }

  Status iterate(const std::vector<double>& cost, bool phase_one) {
    const long bland_after =
        opt_.bland_after > 0 ? opt_.bland_after : 10L * (m_ + num_vars_);
    const long refactor_every = std::max(64, m_);
    long phase_iterations = 0;
    long since_refactor = 0;
    int optimal_confirmations = 0;
    for (;;) {
      if (iterations_ >= opt_.max_iterations) {
        fail(ErrorCode::kLpFailure, "simplex iteration limit reached");
      }
      const bool bland = phase_iterations >= bland_after;
      compute_duals(cost);

      int enter = -1;
      double enter_dir = 0.0;
      double best = 0.0;
      for (int j = 0; j < num_vars_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        if (upper_[j] - lower_[j] <= 0.0) continue;
        const double d = cost[j] - column_dot(j, y_);
        double dir = 0.0;
        if (state_[j] == VarState::kAtLower && d > opt_.optimality_tol) dir = 1.0;
        if (state_[j] == VarState::kAtUpper && d < -opt_.optimality_tol) dir = -1.0;
        if (dir == 0.0) continue;
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        const double score = std::fabs(d) / col_weight_[j];
        if (score > best) {
          best = score;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) {
        // Confirm optimality on a fresh factorization before stopping.
        if (optimal_confirmations == 0 && since_refactor > 0) {
          ++optimal_confirmations;
          if (reinvert()) recompute_basic_values();
          since_refactor = 0;
          continue;
        }
        return Status::kOptimal;
      }
      optimal_confirmations = 0;

      ftran(enter);
      const double ptol = 1e-9;
      // Harris two-pass ratio test (plain min-ratio with index ties under Bland).
      double t_bound = upper_[enter] - lower_[enter];
      double harris = kInf;
      if (!bland) {
        for (int i = 0; i < m_; ++i) {
          const double a = enter_dir * alpha_[i];
          const int b = head_[i];
          if (a > ptol) {
            harris = std::min(harris, (x_[b] - lower_[b] + opt_.feasibility_tol) / a);
          } else if (a < -ptol && std::isfinite(upper_[b])) {
            harris = std::min(harris, (upper_[b] - x_[b] + opt_.feasibility_tol) / -a);
          }
        }
      }
      int leave = -1;
      double t = kInf;
      double leave_mag = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = enter_dir * alpha_[i];
        const int b = head_[i];
        double ratio;
        if (a > ptol) {
          ratio = (x_[b] - lower_[b]) / a;
        } else if (a < -ptol && std::isfinite(upper_[b])) {
          ratio = (upper_[b] - x_[b]) / -a;
        } else {
          continue;
        }
        ratio = std::max(ratio, 0.0);
        if (bland) {
          if (ratio < t || (ratio == t && leave >= 0 && head_[i] < head_[leave])) {
            t = ratio;
            leave = i;
          }
        } else if (ratio <= harris && std::fabs(a) > leave_mag) {
          leave_mag = std::fabs(a);
          t = ratio;
          leave = i;
        }
      }
      if (leave < 0 && !std::isfinite(t_bound)) {
        if (phase_one) fail(ErrorCode::kLpFailure, "phase one reported unbounded");
        return Status::kUnbounded;
      }

      ++iterations_;
      ++phase_iterations;
      ++since_refactor;
      const bool flip = leave < 0 || t_bound <= t;
      const double step = flip ? t_bound : t;
      x_[enter] += enter_dir * step;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * enter_dir * alpha_[i];
      if (flip) {
        if (state_[enter] == VarState::kAtLower) {
          state_[enter] = VarState::kAtUpper;
          x_[enter] = upper_[enter];
        } else {
          state_[enter] = VarState::kAtLower;
          x_[enter] = lower_[enter];
        }
        continue;
      }
      const int out = head_[leave];
      if (enter_dir * alpha_[leave] > 0) {
        state_[out] = VarState::kAtLower;
        x_[out] = lower_[out];
      } else {
        state_[out] = VarState::kAtUpper;
        x_[out] = upper_[out];
      }
      state_[enter] = VarState::kBasic;
      head_[leave] = enter;
      pivot(leave);

      if (since_refactor >= refactor_every) {
        if (reinvert()) recompute_basic_values();
        since_refactor = 0;
      } else if (since_refactor % 32 == 0) {
        recompute_basic_values();
      }
    }
  }

  const LpProblem& problem_;
  SolveOptions opt_;
  int m_ = 0;
  int n_ = 0;
  int num_vars_ = 0;
  int artificial_begin_ = 0;
  int num_artificial_ = 0;
  long iterations_ = 0;
  std::vector<double> dense_;
  std::vector<double> rhs_;
  std::vector<double> lower_, upper_;
  std::vector<int> unit_row_;
  std::vector<double> unit_sign_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> binv_;
  std::vector<double> col_weight_;
  std::vector<double> y_;
  std::vector<double> alpha_;
};

}  // namespace

void certify(const LpProblem& problem, LpSolution& sol) {
  const int n = problem.num_variables();
  const int m = problem.num_rows();
  const auto& c = problem.objective();
  double primal = 0.0;
  for (int j = 0; j < n; ++j) {
    primal = std::max(primal, problem.lower()[j] - sol.x[j]);
    primal = std::max(primal, sol.x[j] - problem.upper()[j]);
  }
  sol.reduced_costs.assign(c.begin(), c.end());
  double dual = 0.0;
  double dual_value = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& row = problem.rows()[i];
    double lhs = 0.0;
    for (const auto& [j, a] : row.coeffs) {
      lhs += a * sol.x[j];
      sol.reduced_costs[j] -= a * sol.y[i];
    }
    switch (row.sense) {
      case Sense::kLe:
        primal = std::max(primal, lhs - row.rhs);
        dual = std::max(dual, -sol.y[i]);
        break;
      case Sense::kGe:
        primal = std::max(primal, row.rhs - lhs);
        dual = std::max(dual, sol.y[i]);
        break;
      case Sense::kEq:
        primal = std::max(primal, std::fabs(lhs - row.rhs));
        break;
    }
    dual_value += row.rhs * sol.y[i];
  }
  double value = 0.0;
  for (int j = 0; j < n; ++j) {
    value += c[j] * sol.x[j];
    const double r = sol.reduced_costs[j];
    if (r > 0.0 && std::isfinite(problem.upper()[j])) {
      dual_value += problem.upper()[j] * r;
    } else {
      if (r > 0.0) dual = std::max(dual, r);
      dual_value += problem.lower()[j] * r;
    }
  }
  sol.value = value;
  sol.dual_value = dual_value;
  sol.primal_residual = primal;
  sol.dual_residual = dual;
  sol.duality_gap = std::fabs(value - dual_value);
}

namespace {

std::mutex stats_mu;
SolveStats stats;

LpSolution record(LpSolution sol) {
  std::lock_guard<std::mutex> lock(stats_mu);
  ++stats.solves;
  if (sol.status == Status::kOptimal) {
    ++stats.optimal;
    stats.max_duality_gap = std::max(stats.max_duality_gap, sol.duality_gap);
  }
  return sol;
}

}  // namespace

SolveStats solve_stats() {
  std::lock_guard<std::mutex> lock(stats_mu);
  return stats;
}

void reset_solve_stats() {
  std::lock_guard<std::mutex> lock(stats_mu);
  stats = SolveStats{};
}

LpSolution solve(const LpProblem& problem, const SolveOptions& options) {
  for (const auto& row : problem.rows()) {
    require(!std::isnan(row.rhs), "LP right-hand side is NaN");
  }
  if (problem.num_rows() == 0) {
    // Only bounds: each variable sits at whichever bound its cost prefers.
    LpSolution sol;
    sol.status = Status::kOptimal;
    sol.x.resize(problem.num_variables());
    for (int j = 0; j < problem.num_variables(); ++j) {
      const double c = problem.objective()[j];
      require(std::isfinite(c) && std::isfinite(problem.lower()[j]), "malformed LP variable");
      if (c > 0.0) {
        if (!std::isfinite(problem.upper()[j])) {
          sol.status = Status::kUnbounded;
          return record(std::move(sol));
        }
        sol.x[j] = problem.upper()[j];
      } else {
        sol.x[j] = problem.lower()[j];
      }
    }
    certify(problem, sol);
    return record(std::move(sol));
  }
  Simplex simplex(problem, options);
  return record(simplex.run());
}

}  // namespace stochmatch::lp
