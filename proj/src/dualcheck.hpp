#pragma once

// Empirical checks of approximate dual feasibility and of the structural
// lemmas behind it, on concrete instances.

#include <cstdint>
#include <string>
#include <vector>

#include "bench.hpp"
#include "common.hpp"
#include "gain_function.hpp"
#include "instance.hpp"
#include "simul.hpp"

namespace stochmatch {

struct DualEstimate {
  int m = 0;
  int n = 0;
  std::uint64_t trials = 0;
  std::vector<double> alpha_mean, alpha_se;
  std::vector<double> beta_mean, beta_se;
  // Sample covariance of the per-trial vector (alpha_0..alpha_{m-1}, beta_0..beta_{n-1}).
  std::vector<double> cov;
  double value_mean = 0.0;
  double value_se = 0.0;
  double dual_total_mean = 0.0;  // mean of sum alpha + sum beta
  // Standard error of the mean of (value - dual total); the two agree in
  // expectation since each match's gain x p is split between alpha and beta.
  double conservation_se = 0.0;

  // Standard error of the mean of alpha_u + sum_v w_v beta_v.
  double combination_se(int u, const std::vector<std::pair<int, double>>& weights) const;
};

// Monte Carlo means of the ledgers: Ranking uses a rank-domain g, the Balance
// variants a load-domain g. Deterministic given (inst, seed, trials).
DualEstimate estimate_duals(const Instance& inst, Algorithm alg, const GainFunction& g,
                            std::uint64_t trials, std::uint64_t seed, int jobs = 1);

enum class Verdict { kOk, kInconclusive, kViolation };
std::string to_string(Verdict v);

struct PairSlack {
  int u = 0;
  std::uint32_t mask = 0;  // bit v set when online vertex v is in S
  double lhs = 0.0;
  double target = 0.0;
  double slack = 0.0;
  double se = 0.0;
  Verdict verdict = Verdict::kOk;
};

struct FeasibilityReport {
  double gamma = 0.0;
  std::vector<PairSlack> pairs;
  int worst = -1;            // index of the pair with the smallest lhs / target
  double worst_ratio = kInf;  // no pair with a positive target
  int violations = 0;        // slack < -3 se
  int inconclusive = 0;      // -3 se <= slack < 0
};

// E[alpha_u] + sum_{v in S} E[beta_v] >= Gamma p-bar_uS for all u and S within
// u's neighbors. n <= 12.
FeasibilityReport check_config_feasibility(const Instance& inst, const DualEstimate& est,
                                           double gamma);
// E[alpha_u] + sum_{v in S} (1 - p~_{uS(v)}) E[beta_v] >= Gamma p~_uS. n <= 12.
FeasibilityReport check_reduced_feasibility(const Instance& inst, const DualEstimate& est,
                                            double gamma);

struct FullCheck {
  double ell_inf = 0.0;   // load of u with an infinite budget
  double alpha = 0.0;     // E over theta_u of alpha_u = integral_0^{ell_inf} e^{-t} g
  double beta = 0.0;      // E over theta_u of sum_{v in S, theta_u >= p_{uS(v)}} beta_v
  double target = 0.0;    // Gamma p~_uS
  double slack = 0.0;
  int runs = 0;
};

// The conditional condition for fractional Balance with the other budgets
// fixed. The beta term is integrated against e^{-theta} by composite
// Gauss-Legendre on [0, ell_inf) split where the summation range changes,
// with one run per node (`nodes` in total); beyond ell_inf the run no longer
// depends on theta_u and the remaining integral is exact.
FullCheck check_full_stochastic_feasibility(const Instance& inst, int u, const std::vector<int>& s,
                                            const std::vector<double>& budgets,
                                            const GainFunction& g, double gamma, int nodes = 64,
                                            double delta = 0.0);

enum class AlphaMode { kRanking, kBalance, kBalanceDiscrete };

// kRanking: alpha_u = ell_u g(rho_u); kBalance: alpha_u = G(ell_u);
// kBalanceDiscrete: alpha_u = sum_{k < c_u} p g(k p) for c_u matches at equal p.
// Returns the largest absolute deviation.
double alpha_invariant_error(const Trace& trace, const DualLedger& ledger, const GainFunction& g,
                             AlphaMode mode, const RandomDraw* draw = nullptr);
bool verify_alpha_invariant(const Trace& trace, const DualLedger& ledger, const GainFunction& g,
                            AlphaMode mode, const RandomDraw* draw = nullptr, double tol = 1e-12);

struct AlphaExpectation {
  double ell_inf = 0.0;
  double exact = 0.0;     // integral_0^{ell_inf} e^{-t} g(t) dt
  double mc_mean = 0.0;
  double mc_se = 0.0;
  double residual = 0.0;  // |mc_mean - exact|
};

// Samples theta_u ~ Exp(1) with the other budgets fixed and averages alpha_u
// of fractional Balance.
AlphaExpectation verify_balance_alpha_expectation(const Instance& inst, int u,
                                                  const std::vector<double>& budgets,
                                                  const GainFunction& g, std::uint64_t samples,
                                                  std::uint64_t seed, int jobs = 1,
                                                  double delta = 0.0);

struct BetaBound {
  double ell_inf = 0.0;
  double realized = 0.0;      // sum_{v in S, theta_u >= p_{uS(v)}} beta_v
  double bound = 0.0;         // general-probability bound
  double equal_bound = 0.0;   // equal-probability bound (equal-p instances only)
  bool budget_covers = false; // theta_u >= ell_inf
  bool holds = false;
};

// budgets includes theta_u. Runs fractional Balance with the actual budgets
// and with theta_u = inf and compares the realized beta sum with the bounds
// (minus `tol`, which absorbs the chunked discretization).
BetaBound verify_balance_beta_bound(const Instance& inst, int u, const std::vector<int>& s,
                                    const std::vector<double>& budgets, const GainFunction& g,
                                    double tol = 1e-9, double delta = 0.0);

struct RankingOutcome {
  std::vector<int> matched;   // online vertices matched to u, in arrival order
  std::vector<int> predicted; // first min{i, |N_u(rho_u)|} of N_u(rho_u)
  bool holds = false;
};

// Threshold success model; i is the number of matches after which u's
// threshold is reached.
RankingOutcome verify_ranking_outcome(const Instance& inst, const RandomDraw& draw, int u);

struct LemmaTrials {
  std::uint64_t trials = 0;
  int ranking_outcome_violations = 0;
  int beta_bound_violations = 0;
  long alpha_invariant_runs = 0;
  double alpha_invariant_max_error = 0.0;  // over Ranking, Balance and fractional runs
};

// Random small instances (m <= 5, n <= 6). Each trial checks the Ranking
// outcome on an equal-p instance, the beta bound on an instance with equal or
// spread p (budgets of u shrunk on half of them), and the alpha invariant of
// every run involved.
LemmaTrials run_lemma_trials(std::uint64_t trials, std::uint64_t seed);

std::string feasibility_to_json(const FeasibilityReport& report);
std::string feasibility_to_csv(const FeasibilityReport& report);
std::string duals_to_json(const DualEstimate& est);

}  // namespace stochmatch
