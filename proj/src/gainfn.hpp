#pragma once

// Gain splitting functions and the constants they certify: the Ranking
// function against OPT and S-OPT, the closed form for equal-probability
// Balance, and the factor-revealing LP for general-probability Balance.

#include <string>
#include <vector>

#include "critical_profile.hpp"
#include "gain_function.hpp"
#include "lpcore.hpp"

namespace stochmatch {

// min{c / (e - (e-1) rho), 1 - 1/e} on [0, 1); 1 at rho = 1.
double g_ranking(double rho, double c);

struct RankingConstant {
  double c = 0.0;
  double gamma = 0.0;    // 1 - c/e = 1 - g(0)
  double mu_low = 0.0;   // smallest rho with g(rho) = 1 - 1/e
  double residual = 0.0; // integral of g minus (1 - g(0)) at the returned c
  int iterations = 0;
};

// Bisection on c in [1, e] for  integral_0^1 g(., c) = 1 - c/e.  The left side
// grows with c and the right side shrinks, so the root is unique.
RankingConstant solve_ranking_constant();

// e^{x-1}, the gain function for Ranking against S-OPT.
double g_ranking_stochastic(double x);

// integral_0^mu e^{rho-1} drho + 1 - e^{mu-1}, by quadrature.
double star_constant(double mu);

// f(mu) = 2(2 - sqrt mu)(ln 2 - ln(2 - sqrt mu)) / sqrt mu - 1, f(0) = 1.
double f_balance_equal(double mu);
// f(e^{-theta}).
double g_balance_equal(double theta);
// 2(1 - ln 2).
double balance_equal_gamma();

// Residual of  integral_lambda^1 f + (2 sqrt(lambda) - lambda)(1 - f(lambda)) = Gamma
// at one lambda, and its maximum over grid_size evenly spaced points of [0,1].
double balance_equal_ode_residual(double lambda);
double verify_balance_equal_ode(int grid_size);

// integral_0^l e^{-t} g(t) dt
//   + (1 - g(l)) integral_0^inf e^{-t} (min{q, t} - (l - t)^+)^+ dt.
// q may be +inf.
double balance_equal_inequality_lhs(double l, double q, const GainFunction& g);

// integral_0^l e^{-t} g(t) dt - integral_h^l (e^{-h} - e^{-z})(1 - g(z)) dz
//   + (1 + h) e^{-h} (1 - g(l)),   0 <= h <= l.
double balance_general_lhs(double l, const GainFunction& g, double h);

// Smallest h in [0, l] with h (1 - g(l)) - integral_h^l (1 - g) >= 0, per point.
// The left side is non-decreasing in h.
std::vector<double> update_h(const GainFunction& g, const std::vector<double>& points);

// Grid 0, step, ..., lmax and the check points: the grid followed by
// lmax + 0.5 k for k = 1..20, where g is extended by its last value.
std::vector<double> uniform_grid(double step, double lmax);
std::vector<double> check_points(const std::vector<double>& grid);

struct GainLpResult {
  GainFunction g = GainFunction::constant(0.0);
  double gamma = 0.0;
  long iterations = 0;
  double duality_gap = 0.0;
  double primal_residual = 0.0;
};

// Maximizes Gamma over step functions g on `grid` (values in [0,1],
// non-decreasing) subject to balance_general_lhs(points[j], g, h[j]) >= Gamma.
GainLpResult optimize_g_given_h(const std::vector<double>& grid,
                                const std::vector<double>& points,
                                const std::vector<double>& h);

struct AltOptState {
  double step = 0.0;
  double lmax = 0.0;
  int round = 0;
  std::vector<double> grid;
  std::vector<double> points;
  GainFunction g = GainFunction::constant(0.0);
  std::vector<double> h;  // per point, the h the final g was optimized against
  double gamma = 0.0;
  std::vector<double> gamma_history;
  // min over points of balance_general_lhs - gamma, recomputed from g and h.
  double min_slack = 0.0;
  double max_duality_gap = 0.0;
};

// Round 1 uses h = 0; each later round sets h from the previous g and
// re-optimizes g.
AltOptState alternate_optimize(double step, double lmax, int rounds);

// Right side of the Ranking dual-feasibility bound for one offline vertex with
// equal probabilities p:
//   integral_0^1 (1 - e^{-p|N(rho)|}) g + sum_{v in S} p (1 - g(mu_v))
//   + sum_{v in S} integral_0^{mu_v} e^{-p|N(rho,v)|} (1 - e^{-p}) (g(mu_v) - g(rho)),
// where N(rho) are the neighbors with mu >= rho and N(rho, v) those of them
// arriving before v.
double ranking_bound_eval(const CriticalProfile& profile, double p, const GainFunction& g);

// integral_0^{mu0} g + (1 - g(rho0)) + (1 - 1/e)(rho0 - mu0) g(rho0), g = g_ranking(., c).
double ranking_final_inequality(double mu0, double rho0, double c);
// Minimum of the above over mu0 = i/res, rho0 = j/res with 0 <= i < j <= res.
double ranking_final_inequality_min(int res, double c);

// f(mu_1..mu_n) = integral_0^{mu0} g + sum_i p (1 - g(mu_i))
//   + sum_j (mu_j - mu_{j-1}) sum_{i >= j} p e^{-p(i-j)} g(mu_i),
// with g = g_ranking(., c) and n p = 1.
double f_discrete(double mu0, const std::vector<double>& mu, double p, double c);

struct BruteMinResult {
  std::vector<double> argmin;
  double min_value = 0.0;
  double cell = 0.0;
  bool all_equal = false;      // argmin entries within one cell of each other
  bool at_mu_low_or_one = false;  // and within one cell of mu_low or of 1
  double lipschitz = 0.0;      // max |finite difference| / cell over the grid
  double slack = 0.0;          // n * lipschitz * cell / 2
  long evaluated = 0;
};

// Exhaustive minimum of f_discrete over sorted vectors on a res-point grid of
// [0, 1] restricted to [mu0, 1], with p = 1/n.
BruteMinResult brute_min_f(int n, int res, double mu0, double c, int jobs = 1);

// JSON certificate {"kind", "grid", "values", "gamma"} and a per-point slack table.
std::string gain_to_json(const GainFunction& g, double gamma);
std::string alt_opt_to_json(const AltOptState& state);
std::string alt_opt_slack_csv(const AltOptState& state);

}  // namespace stochmatch
