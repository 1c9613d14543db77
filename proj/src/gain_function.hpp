#pragma once

#include <string>
#include <vector>

namespace stochmatch {

enum class GainKind {
  kRanking,            // min{c / (e - (e-1) rho), 1 - 1/e} on [0,1), 1 at rho = 1
  kRankingStochastic,  // e^{x - 1}
  kBalanceEqual,       // f(e^{-theta}) with the closed-form f of the equal-p analysis
  kStep,               // piecewise constant on a grid
};

// Rank-domain functions live on [0,1]; load-domain functions on [0, inf).
enum class GainDomain { kRank, kLoad };

// Non-decreasing gain splitting function g with range in [0,1].
//
// Step functions take value values[i] on [grid[i], grid[i+1]) and values.back()
// from grid.back() onwards, so a load-domain step function is extended by its
// last value past the end of the grid.
class GainFunction {
 public:
  static GainFunction ranking(double c);
  static GainFunction ranking_stochastic();
  static GainFunction balance_equal();
  static GainFunction step(std::vector<double> grid, std::vector<double> values,
                           GainDomain domain = GainDomain::kLoad);
  static GainFunction constant(double value, GainDomain domain = GainDomain::kLoad);

  GainKind kind() const { return kind_; }
  GainDomain domain() const { return domain_; }
  double parameter() const { return c_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const;

  // Integral of g over [a, b]. The point value g(1) = 1 of the rank-domain
  // closed form does not contribute.
  double integral(double a, double b) const;
  // G(x) = integral of g over [0, x].
  double cumulative(double x) const { return integral(0.0, x); }
  // Integral of e^{-z} g(z) over [a, b]; exact for step functions, adaptive
  // Simpson for closed forms.
  double exp_weighted_integral(double a, double b) const;

  // Scans [0, scan_end] with the given step and throws if g decreases or
  // leaves [0, 1].
  void validate(double step = 1e-4, double scan_end = 20.0) const;

  std::string describe() const;

 private:
  GainFunction(GainKind kind, GainDomain domain) : kind_(kind), domain_(domain) {}
  void check_domain(double x) const;
  std::size_t cell_of(double x) const;

  GainKind kind_;
  GainDomain domain_;
  double c_ = 0.0;
  std::vector<double> grid_;
  std::vector<double> values_;
};

}  // namespace stochmatch
