#include "dualcheck.hpp"

#include <cmath>
#include <vector>

#include "common.hpp"
#include "gainfn.hpp"
#include "gtest/gtest.h"
#include "rng.hpp"

namespace stochmatch {
namespace {

Instance single_edge(double p) {
  const std::vector<Edge> e = {{0, 0, p}};
  return build_instance(1, 1, e);
}

Instance random_equal(std::uint64_t seed, int max_m, int max_n) {
  Rng rng = make_rng(seed, 0);
  const int m = 1 + static_cast<int>(rng() % max_m);
  const int n = 1 + static_cast<int>(rng() % max_n);
  const double ps[] = {0.2, 0.5, 1.0};
  const double p = ps[seed % 3];
  return gen_random(m, n, 0.6, p, p, rng());
}

TEST(EstimateDualsTest, SingleEdgeConservation) {
  const GainFunction g = GainFunction::ranking(solve_ranking_constant().c);
  const DualEstimate est = estimate_duals(single_edge(1.0), Algorithm::kRanking, g, 20000, 4);
  EXPECT_NEAR(est.alpha_mean[0] + est.beta_mean[0], 1.0, 1e-12);
  EXPECT_NEAR(est.alpha_mean[0], g.integral(0.0, 1.0), 3 * est.alpha_se[0]);
  EXPECT_NEAR(est.value_mean, 1.0, 1e-15);
  EXPECT_NEAR(est.dual_total_mean, est.value_mean, 1e-12);
}

TEST(EstimateDualsTest, EmptyGraph) {
  const Instance empty = build_instance(2, 3, {});
  const DualEstimate est = estimate_duals(empty, Algorithm::kBalanceEqual, GainFunction::balance_equal(), 100, 1);
  for (double a : est.alpha_mean) EXPECT_EQ(a, 0.0);
  for (double b : est.beta_mean) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(est.value_mean, 0.0);
}

TEST(EstimateDualsTest, StderrScalesWithTrials) {
  const Instance inst = gen_random(3, 4, 0.8, 0.5, 0.5, 21);
  const GainFunction g = GainFunction::ranking(1.161);
  const DualEstimate a = estimate_duals(inst, Algorithm::kRanking, g, 20000, 1);
  const DualEstimate b = estimate_duals(inst, Algorithm::kRanking, g, 40000, 2);
  for (int u = 0; u < 3; ++u) {
    if (a.alpha_se[u] == 0.0) continue;
    const double ratio = a.alpha_se[u] * a.alpha_se[u] / (b.alpha_se[u] * b.alpha_se[u]);
    EXPECT_GT(ratio, 1.7);
    EXPECT_LT(ratio, 2.3);
  }
}

TEST(EstimateDualsTest, LedgerConservationAndDeterminism) {
  const GainFunction g = GainFunction::balance_equal();
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Instance inst = random_equal(40 + s, 4, 5);
    const DualEstimate est = estimate_duals(inst, Algorithm::kBalanceEqual, g, 5000, s);
    EXPECT_LE(std::fabs(est.value_mean - est.dual_total_mean), 3 * est.conservation_se + 1e-12) << s;
    for (double a : est.alpha_mean) EXPECT_GE(a, 0.0);
    for (double b : est.beta_mean) EXPECT_GE(b, 0.0);
    const DualEstimate again = estimate_duals(inst, Algorithm::kBalanceEqual, g, 5000, s, 3);
    EXPECT_EQ(est.alpha_mean, again.alpha_mean);
    EXPECT_EQ(est.cov, again.cov);
  }
}

TEST(EstimateDualsTest, RejectsWrongDomain) {
  EXPECT_THROW(estimate_duals(single_edge(1.0), Algorithm::kRanking, GainFunction::balance_equal(), 10, 1), Error);
  EXPECT_THROW(estimate_duals(single_edge(1.0), Algorithm::kBalanceEqual, GainFunction::ranking(1.2), 10, 1), Error);
  EXPECT_THROW(estimate_duals(single_edge(1.0), Algorithm::kGreedy, GainFunction::balance_equal(), 10, 1), Error);
}

TEST(FeasibilityTest, SingleEdge) {
  const double gamma = 0.572;
  for (double p : {0.3, 1.0}) {
    const Instance inst = single_edge(p);
    const DualEstimate est = estimate_duals(inst, Algorithm::kRanking, GainFunction::ranking(1.161), 2000, 5);
    const FeasibilityReport cfg = check_config_feasibility(inst, est, gamma);
    ASSERT_EQ(cfg.pairs.size(), 2u);
    EXPECT_EQ(cfg.pairs[0].mask, 0u);
    EXPECT_EQ(cfg.pairs[0].target, 0.0);
    EXPECT_EQ(cfg.pairs[0].verdict, Verdict::kOk);
    EXPECT_NEAR(cfg.worst_ratio, 1.0 / gamma, 1e-12);
    EXPECT_EQ(cfg.violations, 0);
    const FeasibilityReport red = check_reduced_feasibility(inst, est, gamma);
    EXPECT_NEAR(red.pairs[1].lhs, p, 1e-12);
    EXPECT_NEAR(red.pairs[1].target, gamma * p, 1e-15);
  }
}

TEST(FeasibilityTest, ZeroGammaAlwaysPasses) {
  const Instance inst = gen_random(3, 5, 0.7, 0.5, 0.5, 2);
  const DualEstimate est = estimate_duals(inst, Algorithm::kRanking, GainFunction::ranking(1.161), 500, 5);
  const FeasibilityReport r = check_config_feasibility(inst, est, 0.0);
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.inconclusive, 0);
}

TEST(FeasibilityTest, ReducedWeights) {
  // u0 sees v0, v1, v2 with p = 0.5: the weights are 1, 0.5, 0.25.
  std::vector<Edge> e;
  for (int v = 0; v < 3; ++v) e.push_back({0, v, 0.5});
  const Instance inst = build_instance(1, 3, e);
  DualEstimate est;
  est.m = 1;
  est.n = 3;
  est.trials = 10;
  est.alpha_mean = {0.1};
  est.beta_mean = {0.2, 0.4, 0.8};
  est.cov.assign(16, 0.0);
  const FeasibilityReport r = check_reduced_feasibility(inst, est, 1.0);
  ASSERT_EQ(r.pairs.size(), 8u);
  EXPECT_NEAR(r.pairs[7].lhs, 0.1 + 0.2 + 0.5 * 0.4 + 0.25 * 0.8, 1e-15);
  EXPECT_NEAR(r.pairs[7].target, 0.875, 1e-15);
  // S = {v1}: its first member has weight 1.
  EXPECT_EQ(r.pairs[2].mask, 2u);
  EXPECT_NEAR(r.pairs[2].lhs, 0.1 + 0.4, 1e-15);
  // Targets grow with S.
  EXPECT_LE(r.pairs[1].target, r.pairs[3].target);
  EXPECT_LE(r.pairs[3].target, r.pairs[7].target);
}

TEST(FeasibilityTest, RankingAgainstOpt) {
  const GainFunction g = GainFunction::ranking(solve_ranking_constant().c);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Instance inst = random_equal(100 + s, 4, 6);
    const DualEstimate est = estimate_duals(inst, Algorithm::kRanking, g, 20000, s);
    const FeasibilityReport r = check_config_feasibility(inst, est, 0.572);
    EXPECT_EQ(r.violations, 0) << s;
  }
}

TEST(FeasibilityTest, RankingAgainstSOpt) {
  const GainFunction g = GainFunction::ranking_stochastic();
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Instance inst = random_equal(200 + s, 4, 5);
    const DualEstimate est = estimate_duals(inst, Algorithm::kRanking, g, 20000, s);
    const FeasibilityReport r = check_reduced_feasibility(inst, est, 1.0 - std::exp(-1.0));
    EXPECT_EQ(r.violations, 0) << s;
  }
}

TEST(FeasibilityTest, ExportFormats) {
  const Instance inst = single_edge(0.5);
  const DualEstimate est = estimate_duals(inst, Algorithm::kRanking, GainFunction::ranking(1.161), 100, 5);
  const FeasibilityReport r = check_config_feasibility(inst, est, 0.5);
  const std::string csv = feasibility_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "u,S_mask,lhs,target,slack,stderr,verdict");
  EXPECT_NE(feasibility_to_json(r).find("\"worst\""), std::string::npos);
  EXPECT_NE(duals_to_json(est).find("\"alpha\""), std::string::npos);
}

TEST(FullCheckTest, EmptySet) {
  const Instance inst = gen_random(2, 5, 0.8, 0.1, 0.1, 4);
  const GainFunction g = GainFunction::balance_equal();
  const FullCheck r = check_full_stochastic_feasibility(inst, 0, {}, {0.5, 0.7}, g, 0.61);
  EXPECT_EQ(r.beta, 0.0);
  EXPECT_EQ(r.target, 0.0);
  EXPECT_NEAR(r.slack, r.alpha, 1e-15);
  EXPECT_GE(r.slack, 0.0);
}

TEST(FullCheckTest, SingleVertexReduction) {
  // One offline vertex: alpha and the integrated beta add up to 1 - e^{-q}
  // for any g, above the closed-form bound built from the beta lemmas.
  const GainFunction g = GainFunction::balance_equal();
  for (int n : {10, 25}) {
    const double p = 0.04;
    std::vector<Edge> e;
    std::vector<int> s;
    for (int v = 0; v < n; ++v) {
      e.push_back({0, v, p});
      s.push_back(v);
    }
    const Instance inst = build_instance(1, n, e);
    const double q = n * p;
    const FullCheck r = check_full_stochastic_feasibility(inst, 0, s, {0.0}, g, 0.0, 64, 1e-2);
    EXPECT_NEAR(r.ell_inf, q, 1e-12);
    EXPECT_NEAR(r.alpha + r.beta, 1.0 - std::exp(-q), 1e-9) << n;
    EXPECT_GE(r.alpha + r.beta, balance_equal_inequality_lhs(q, q, g) - 1e-9) << n;
  }
}

TEST(FullCheckTest, SmallProbabilityInstances) {
  const GainFunction g = GainFunction::balance_equal();
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng = make_rng(300 + s, 0);
    const Instance inst = gen_random(2, 12, 0.7, 0.01, 0.01, rng());
    std::vector<double> budgets = {-std::log1p(-uniform01(rng)), -std::log1p(-uniform01(rng))};
    const auto& nbrs = inst.offline_neighbors(0);
    const std::vector<int> sub(nbrs.begin(), nbrs.begin() + static_cast<long>(nbrs.size() + 1) / 2);
    const FullCheck r = check_full_stochastic_feasibility(inst, 0, sub, budgets, g, 0.61, 32, 1e-2);
    RecordProperty("slack_" + std::to_string(s), std::to_string(r.slack));
    EXPECT_GT(r.runs, 1);
    EXPECT_GE(r.alpha, 0.0);
  }
}

TEST(AlphaExpectationTest, Cases) {
  const std::vector<Edge> none = {{1, 0, 0.3}};
  const Instance iso = build_instance(2, 1, none);
  const GainFunction g = GainFunction::balance_equal();
  const AlphaExpectation zero = verify_balance_alpha_expectation(iso, 0, {kInf, 1.0}, g, 100, 1);
  EXPECT_EQ(zero.ell_inf, 0.0);
  EXPECT_EQ(zero.exact, 0.0);
  EXPECT_EQ(zero.mc_mean, 0.0);

  const Instance inst = gen_random(2, 5, 0.8, 0.1, 0.3, 6);
  const GainFunction k = GainFunction::constant(0.4);
  const AlphaExpectation c = verify_balance_alpha_expectation(inst, 0, {kInf, 0.6}, k, 1000, 2, 1, 1e-2);
  EXPECT_NEAR(c.exact, 0.4 * (1.0 - std::exp(-c.ell_inf)), 1e-15);

  const AlphaExpectation mc = verify_balance_alpha_expectation(inst, 0, {kInf, 0.6}, g, 100000, 3, 1, 1e-2);
  EXPECT_LE(mc.residual, 3 * mc.mc_se);
}

TEST(BetaBoundTest, Cases) {
  const Instance inst = gen_random(2, 6, 0.8, 0.2, 0.2, 8);
  const GainFunction g = GainFunction::balance_equal();
  const auto& nbrs = inst.offline_neighbors(0);
  const std::vector<int> s(nbrs.begin(), nbrs.end());
  const BetaBound covered = verify_balance_beta_bound(inst, 0, s, {50.0, 0.5}, g, 1e-9, 1e-3);
  EXPECT_TRUE(covered.budget_covers);
  EXPECT_NEAR(covered.bound, std::min(p_sum(inst, 0, s), 50.0) * (1.0 - g(covered.ell_inf)), 1e-15);
  EXPECT_TRUE(covered.holds);
  const BetaBound zero = verify_balance_beta_bound(inst, 0, s, {0.0, 0.5}, g, 1e-9, 1e-3);
  EXPECT_EQ(zero.bound, 0.0);
  EXPECT_TRUE(zero.holds);
}

TEST(BetaBoundTest, RandomTrials) {
  const GainFunction g = GainFunction::balance_equal();
  int violations = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng = make_rng(77, t);
    const int m = 1 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 6);
    double lo = 0.02 + 0.1 * uniform01(rng);
    double hi = lo;
    if (t % 2 == 1) hi = lo + 0.15;
    const Instance inst = gen_random(m, n, 0.7, lo, hi, rng());
    const int u = static_cast<int>(rng() % m);
    std::vector<int> s;
    for (int v : inst.offline_neighbors(u)) {
      if (rng() % 2) s.push_back(v);
    }
    std::vector<double> budgets(m);
    for (double& b : budgets) b = -std::log1p(-uniform01(rng));
    if (t % 4 < 2) budgets[u] *= 0.3;
    if (!verify_balance_beta_bound(inst, u, s, budgets, g, 1e-9, 1e-2).holds) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(RankingOutcomeTest, Cases) {
  const std::vector<Edge> e = {{1, 0, 0.5}};
  const Instance iso = build_instance(2, 1, e);
  RandomDraw d = sample_draw(iso, 1, DrawMode::kAll);
  const RankingOutcome empty = verify_ranking_outcome(iso, d, 0);
  EXPECT_TRUE(empty.matched.empty());
  EXPECT_TRUE(empty.predicted.empty());
  EXPECT_TRUE(empty.holds);

  // Thresholds of 1 are never reached at p < 1: u takes every vertex of N.
  const Instance inst = gen_random(3, 6, 0.8, 0.5, 0.5, 12);
  d = sample_draw(inst, 2, DrawMode::kAll);
  d.thresholds.assign(3, 1.0);
  for (int u = 0; u < 3; ++u) {
    const RankingOutcome r = verify_ranking_outcome(inst, d, u);
    EXPECT_TRUE(r.holds) << u;
    const CriticalProfile prof = critical_ranks(inst, u, d);
    std::vector<int> reach;
    for (std::size_t i = 0; i < prof.mu.size(); ++i) {
      if (prof.mu[i] >= d.ranks[u]) reach.push_back(prof.neighbors[i]);
    }
    EXPECT_EQ(r.matched, reach) << u;
  }
}

TEST(RankingOutcomeTest, RandomTrials) {
  int violations = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng = make_rng(78, t);
    const int m = 1 + static_cast<int>(rng() % 5);
    const int n = 1 + static_cast<int>(rng() % 6);
    const double ps[] = {0.2, 0.5, 1.0};
    const double p = ps[rng() % 3];
    const Instance inst = gen_random(m, n, 0.6, p, p, rng());
    const RandomDraw d = sample_draw(inst, rng(), DrawMode::kAll);
    if (!verify_ranking_outcome(inst, d, static_cast<int>(rng() % m)).holds) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(AlphaInvariantTest, AllRunsExact) {
  const GainFunction gr = GainFunction::ranking(1.161);
  const GainFunction gb = GainFunction::balance_equal();
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Instance inst = random_equal(500 + t, 5, 6);
    const RandomDraw d = sample_draw(inst, t, DrawMode::kAll);
    const Trace r = run_ranking(inst, d);
    EXPECT_LE(alpha_invariant_error(r, ranking_ledger(inst, r, d, gr), gr, AlphaMode::kRanking, &d), 1e-12);
    const Trace b = run_balance_equal(inst, d);
    EXPECT_LE(alpha_invariant_error(b, balance_discrete_ledger(b, gb), gb, AlphaMode::kBalanceDiscrete), 1e-12);
    const Trace f = run_balance_fractional(inst, d.budgets, gb, 1e-2);
    EXPECT_LE(alpha_invariant_error(f, fractional_ledger(f, gb), gb, AlphaMode::kBalance), 1e-12);
  }
  const Instance inst = single_edge(0.5);
  const RandomDraw d = sample_draw(inst, 1, DrawMode::kAll);
  const Trace r = run_ranking(inst, d);
  EXPECT_THROW(alpha_invariant_error(r, ranking_ledger(inst, r, d, gr), gr, AlphaMode::kRanking), Error);
  EXPECT_THROW(alpha_invariant_error(r, ranking_ledger(inst, r, d, gr), gr, AlphaMode::kBalance), Error);
}

TEST(LemmaTrialsTest, DriverIsCleanAndDeterministic) {
  const LemmaTrials a = run_lemma_trials(200, 9);
  EXPECT_EQ(a.ranking_outcome_violations, 0);
  EXPECT_EQ(a.beta_bound_violations, 0);
  EXPECT_EQ(a.alpha_invariant_runs, 600);
  EXPECT_LE(a.alpha_invariant_max_error, 1e-12);
  const LemmaTrials b = run_lemma_trials(200, 9);
  EXPECT_EQ(a.alpha_invariant_max_error, b.alpha_invariant_max_error);
}

}  // namespace
}  // namespace stochmatch
