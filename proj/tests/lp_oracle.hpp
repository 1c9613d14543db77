#pragma once

// Independent LP oracle shared by the LP tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "lpcore.hpp"

namespace stochmatch::lp::oracle {

// Brute force over bases: every vertex of {Ax (sense) b, l <= x <= u} with
// finite bounds is the solution of n linearly independent active constraints.
inline std::optional<double> vertex_enumeration(const LpProblem& lp) {
  const int n = lp.num_variables();
  struct Hyper {
    std::vector<double> a;
    double b;
  };
  std::vector<Hyper> all;
  std::vector<bool> forced;
  for (const auto& row : lp.rows()) {
    Hyper h{std::vector<double>(n, 0.0), row.rhs};
    for (const auto& [j, c] : row.coeffs) h.a[j] += c;
    all.push_back(h);
    forced.push_back(row.sense == Sense::kEq);
  }
  for (int j = 0; j < n; ++j) {
    Hyper lo{std::vector<double>(n, 0.0), lp.lower()[j]};
    lo.a[j] = 1.0;
    all.push_back(lo);
    forced.push_back(false);
    Hyper hi{std::vector<double>(n, 0.0), lp.upper()[j]};
    hi.a[j] = 1.0;
    all.push_back(hi);
    forced.push_back(false);
  }
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      if (x[j] < lp.lower()[j] - 1e-9 || x[j] > lp.upper()[j] + 1e-9) return false;
    }
    for (const auto& row : lp.rows()) {
      double lhs = 0.0;
      for (const auto& [j, c] : row.coeffs) lhs += c * x[j];
      if (row.sense != Sense::kGe && lhs > row.rhs + 1e-9) return false;
      if (row.sense != Sense::kLe && lhs < row.rhs - 1e-9) return false;
    }
    return true;
  };
  std::optional<double> best;
  const int k = static_cast<int>(all.size());
  std::vector<int> pick(n);
  // Enumerate n-subsets of the hyperplanes in lexicographic order.
  for (int i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    bool uses_forced = true;
    for (int i = 0; i < k; ++i) {
      if (forced[i] && std::find(pick.begin(), pick.end(), i) == pick.end()) uses_forced = false;
    }
    if (uses_forced) {
      std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) m[r][c] = all[pick[r]].a[c];
        m[r][n] = all[pick[r]].b;
      }
      bool singular = false;
      for (int c = 0; c < n && !singular; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r) {
          if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        }
        if (std::fabs(m[piv][c]) < 1e-10) {
          singular = true;
          break;
        }
        std::swap(m[c], m[piv]);
        for (int r = 0; r < n; ++r) {
          if (r == c) continue;
          const double f = m[r][c] / m[c][c];
          for (int cc = c; cc <= n; ++cc) m[r][cc] -= f * m[c][cc];
        }
      }
      if (!singular) {
        std::vector<double> x(n);
        for (int r = 0; r < n; ++r) x[r] = m[r][n] / m[r][r];
        if (feasible(x)) {
          double v = 0.0;
          for (int j = 0; j < n; ++j) v += lp.objective()[j] * x[j];
          if (!best || v > *best) best = v;
        }
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == k - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

// Random LP with 1..4 bounded variables and 1..4 rows of mixed sense.
inline LpProblem random_small_lp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> small(1, 4);
  LpProblem lp;
  const int n = small(rng);
  const int rows = small(rng);
  for (int j = 0; j < n; ++j) {
    const double lo = (rng() % 3 == 0) ? coef(rng) : 0.0;
    lp.add_variable(coef(rng), lo, lo + 0.5 + std::fabs(coef(rng)));
  }
  for (int r = 0; r < rows; ++r) {
    std::vector<std::pair<int, double>> c;
    for (int j = 0; j < n; ++j) {
      if (rng() % 4 != 0) c.emplace_back(j, std::round(coef(rng) * 4.0) / 4.0);
    }
    const Sense s = static_cast<Sense>(rng() % 5 == 0 ? 1 : (rng() % 2 == 0 ? 0 : 2));
    lp.add_row(c, s, coef(rng));
  }
  return lp;
}

}  // namespace stochmatch::lp::oracle
