// Exercises the shared library through its C header only.

#include <cmath>
#include <string>

#include "gtest/gtest.h"
#include "stochmatch/stochmatch.h"

namespace {

std::string take(char* s) {
  std::string out = s;
  sm_string_free(s);
  return out;
}

TEST(CApiTest, InstanceLifecycle) {
  const int us[] = {0, 1};
  const int vs[] = {0, 1};
  const double ps[] = {0.5, 0.5};
  sm_instance* inst = nullptr;
  ASSERT_EQ(sm_instance_build(2, 2, us, vs, ps, 2, &inst), SM_OK);
  EXPECT_EQ(sm_instance_num_offline(inst), 2);
  EXPECT_EQ(sm_instance_num_online(inst), 2);
  EXPECT_EQ(sm_instance_num_edges(inst), 2);
  double p = 0.0;
  EXPECT_EQ(sm_instance_equal_p(inst, &p), 1);
  EXPECT_EQ(p, 0.5);
  EXPECT_EQ(sm_instance_prob(inst, 0, 1, &p), SM_OK);
  EXPECT_EQ(p, 0.0);
  EXPECT_EQ(sm_instance_prob(inst, 5, 0, &p), SM_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(sm_last_error()).find("range"), std::string::npos);

  char* json = nullptr;
  ASSERT_EQ(sm_instance_to_json(inst, &json), SM_OK);
  sm_instance* back = nullptr;
  ASSERT_EQ(sm_instance_parse(json, &back), SM_OK);
  sm_string_free(json);
  EXPECT_EQ(sm_instance_num_edges(back), 2);
  sm_instance_free(back);
  sm_instance_free(inst);
}

TEST(CApiTest, StatusCodes) {
  sm_instance* inst = nullptr;
  EXPECT_EQ(sm_instance_parse("not json", &inst), SM_ERR_PARSE);
  EXPECT_EQ(inst, nullptr);
  EXPECT_EQ(sm_instance_read("/nonexistent/x.json", &inst), SM_ERR_IO);
  const int us[] = {0};
  const int vs[] = {0};
  const double ps[] = {1.5};
  EXPECT_EQ(sm_instance_build(1, 1, us, vs, ps, 1, &inst), SM_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sm_instance_gen_upper_triangular(2, 0.5, nullptr), SM_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(sm_instance_gen_random(2, 14, 1.0, 0.5, 0.5, 1, &inst), SM_OK);
  double v = 0.0;
  EXPECT_EQ(sm_config_lp_value(inst, &v), SM_ERR_TOO_LARGE);
  sm_instance_free(inst);
  sm_algorithm alg;
  EXPECT_EQ(sm_algorithm_parse("nope", &alg), SM_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(sm_algorithm_parse("balance_equal", &alg), SM_OK);
  EXPECT_EQ(alg, SM_ALG_BALANCE_EQUAL);
  EXPECT_STREQ(sm_algorithm_name(SM_ALG_GREEDY), "greedy");
}

TEST(CApiTest, BenchUpperTriangular) {
  sm_instance* inst = nullptr;
  ASSERT_EQ(sm_instance_gen_upper_triangular(2, 1.0, &inst), SM_OK);
  sm_bench_options o;
  sm_bench_options_init(&o);
  o.seed = 3;
  sm_bench_report* r = nullptr;
  ASSERT_EQ(sm_bench(inst, &o, &r), SM_OK);
  double v = 0.0, se = -1.0;
  ASSERT_EQ(sm_bench_report_get(r, "matching_lp", &v, nullptr), SM_OK);
  EXPECT_NEAR(v, 2.0, 1e-9);
  ASSERT_EQ(sm_bench_report_get(r, "ranking", &v, &se), SM_OK);
  EXPECT_NEAR(v, 1.5, 1e-12);
  EXPECT_EQ(se, 0.0);
  EXPECT_EQ(sm_bench_report_get(r, "bogus", &v, nullptr), SM_ERR_INVALID_ARGUMENT);
  char* csv = nullptr;
  ASSERT_EQ(sm_bench_report_export(r, SM_FORMAT_CSV, &csv), SM_OK);
  EXPECT_NE(take(csv).find("matching_lp"), std::string::npos);
  sm_bench_report_free(r);

  double mean = 0.0;
  ASSERT_EQ(sm_mc_value(inst, SM_ALG_RANKING, 1, 1, 1, &mean, &se), SM_OK);
  EXPECT_TRUE(std::isinf(se));
  ASSERT_EQ(sm_s_opt_value(inst, &v), SM_OK);
  EXPECT_NEAR(v, 2.0, 1e-12);
  ASSERT_EQ(sm_exact_value(inst, SM_ALG_BALANCE_EQUAL, &v), SM_OK);
  EXPECT_NEAR(v, 2.0, 1e-12);
  sm_instance_free(inst);
}

TEST(CApiTest, RunAndTrace) {
  sm_instance* inst = nullptr;
  ASSERT_EQ(sm_instance_gen_upper_triangular(3, 1.0, &inst), SM_OK);
  sm_trace* t = nullptr;
  ASSERT_EQ(sm_run(inst, SM_ALG_BALANCE_EQUAL, 7, nullptr, &t), SM_OK);
  EXPECT_EQ(sm_trace_value(t), 3.0);
  char* csv = nullptr;
  ASSERT_EQ(sm_trace_export(t, SM_FORMAT_CSV, &csv), SM_OK);
  EXPECT_EQ(take(csv).rfind("step,matched_u,fraction,success_flag\n", 0), 0u);
  sm_trace_free(t);
  ASSERT_EQ(sm_run(inst, SM_ALG_BALANCE_FRACTIONAL, 7, nullptr, &t), SM_OK);
  EXPECT_GT(sm_trace_value(t), 0.0);
  sm_trace_free(t);
  sm_instance_free(inst);
}

TEST(CApiTest, Constants) {
  sm_ranking_constant rc;
  ASSERT_EQ(sm_solve_ranking_constant(&rc), SM_OK);
  EXPECT_NEAR(rc.c, 1.161, 1e-3);
  EXPECT_GE(rc.gamma, 0.572);
  double s = 0.0;
  ASSERT_EQ(sm_star_constant(0.3, &s), SM_OK);
  EXPECT_NEAR(s, 1.0 - std::exp(-1.0), 1e-12);
  EXPECT_NEAR(sm_balance_equal_gamma(), 2.0 * (1.0 - std::log(2.0)), 1e-15);
  double res = 1.0;
  ASSERT_EQ(sm_verify_balance_equal_ode(100, &res), SM_OK);
  EXPECT_LE(res, 1e-6);

  sm_altopt* st = nullptr;
  ASSERT_EQ(sm_alternate_optimize(0.1, 4.0, 2, &st), SM_OK);
  EXPECT_EQ(sm_altopt_rounds(st), 2);
  double g1 = 0.0;
  ASSERT_EQ(sm_altopt_round_gamma(st, 1, &g1), SM_OK);
  EXPECT_NEAR(g1, 0.604241265878277, 1e-9);
  EXPECT_EQ(sm_altopt_gamma(st), g1);
  EXPECT_EQ(sm_altopt_round_gamma(st, 2, &g1), SM_ERR_INVALID_ARGUMENT);
  char* json = nullptr;
  ASSERT_EQ(sm_altopt_export(st, SM_FORMAT_JSON, &json), SM_OK);
  EXPECT_NE(take(json).find("\"gamma\""), std::string::npos);
  sm_altopt_free(st);

  sm_brute_min b;
  double argmin[2];
  ASSERT_EQ(sm_brute_min_f(2, 21, 0.0, rc.c, 1, &b, argmin), SM_OK);
  EXPECT_EQ(b.all_equal, 1);
  EXPECT_EQ(argmin[0], argmin[1]);
}

TEST(CApiTest, DualsAndFeasibility) {
  sm_instance* inst = nullptr;
  ASSERT_EQ(sm_instance_gen_random(3, 4, 0.7, 0.5, 0.5, 2, &inst), SM_OK);
  sm_gain* g = nullptr;
  ASSERT_EQ(sm_gain_ranking(1.161, &g), SM_OK);
  double x = 0.0;
  ASSERT_EQ(sm_gain_eval(g, 0.0, &x), SM_OK);
  EXPECT_NEAR(x, 1.161 / std::exp(1.0), 1e-12);
  sm_duals* d = nullptr;
  ASSERT_EQ(sm_estimate_duals(inst, SM_ALG_RANKING, g, 2000, 1, 1, &d), SM_OK);
  sm_feasibility_report* r = nullptr;
  ASSERT_EQ(sm_check_feasibility(inst, d, SM_CHECK_CONFIG, 0.572, &r), SM_OK);
  EXPECT_EQ(sm_feasibility_violations(r), 0);
  EXPECT_GT(sm_feasibility_num_pairs(r), 0u);
  char* csv = nullptr;
  ASSERT_EQ(sm_feasibility_export(r, SM_FORMAT_CSV, &csv), SM_OK);
  EXPECT_EQ(take(csv).rfind("u,S_mask,lhs,target,slack,stderr,verdict\n", 0), 0u);
  sm_feasibility_report_free(r);
  char* json = nullptr;
  ASSERT_EQ(sm_duals_to_json(d, &json), SM_OK);
  sm_string_free(json);
  sm_duals_free(d);

  sm_gain* load = nullptr;
  ASSERT_EQ(sm_gain_balance_equal(&load), SM_OK);
  EXPECT_EQ(sm_estimate_duals(inst, SM_ALG_RANKING, load, 10, 1, 1, &d), SM_ERR_INVALID_ARGUMENT);
  sm_gain_free(load);
  sm_gain_free(g);
  sm_instance_free(inst);

  sm_lemma_trials lt;
  ASSERT_EQ(sm_run_lemma_trials(50, 4, &lt), SM_OK);
  EXPECT_EQ(lt.ranking_outcome_violations, 0);
  EXPECT_EQ(lt.beta_bound_violations, 0);
  EXPECT_LE(lt.alpha_invariant_max_error, 1e-12);
}

TEST(CApiTest, NullFreeIsSafe) {
  sm_instance_free(nullptr);
  sm_gain_free(nullptr);
  sm_trace_free(nullptr);
  sm_bench_report_free(nullptr);
  sm_duals_free(nullptr);
  sm_feasibility_report_free(nullptr);
  sm_altopt_free(nullptr);
  sm_string_free(nullptr);
  EXPECT_STREQ(sm_version(), "0.1.0");
  EXPECT_GE(sm_default_jobs(), 1);
}

}  // namespace
