#ifndef STOCHMATCH_STOCHMATCH_H
#define STOCHMATCH_STOCHMATCH_H

/* C interface to the stochmatch library: online matching with stochastic
 * rewards. Objects are opaque handles released with their *_free function.
 * Every fallible call returns an sm_status; on failure sm_last_error() holds
 * a message for the calling thread. Strings returned through char** are
 * owned by the caller and released with sm_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SM_API __declspec(dllexport)
#else
#define SM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SM_OK = 0,
  SM_ERR_INVALID_ARGUMENT = 1,
  SM_ERR_PARSE = 2,
  SM_ERR_IO = 3,
  SM_ERR_TOO_LARGE = 4,
  SM_ERR_LP = 5,
  SM_ERR_INTERNAL = 6
} sm_status;

typedef enum { SM_FORMAT_JSON = 0, SM_FORMAT_CSV = 1 } sm_format;

typedef enum {
  SM_ALG_RANKING = 0,
  SM_ALG_BALANCE_EQUAL = 1,
  SM_ALG_GREEDY = 2,
  SM_ALG_BALANCE_FRACTIONAL = 3
} sm_algorithm;

typedef struct sm_instance sm_instance;
typedef struct sm_gain sm_gain;
typedef struct sm_trace sm_trace;
typedef struct sm_bench_report sm_bench_report;
typedef struct sm_duals sm_duals;
typedef struct sm_feasibility_report sm_feasibility_report;
typedef struct sm_altopt sm_altopt;

SM_API const char* sm_version(void);
SM_API const char* sm_last_error(void);
SM_API void sm_string_free(char* s);
SM_API int sm_default_jobs(void);

/* Names are "ranking", "balance_equal", "greedy", "balance_fractional". */
SM_API const char* sm_algorithm_name(sm_algorithm alg);
SM_API sm_status sm_algorithm_parse(const char* name, sm_algorithm* out);

/* ---- instances ---- */

/* Edge i joins offline us[i] and online vs[i] with success probability ps[i]. */
SM_API sm_status sm_instance_build(int m, int n, const int* us, const int* vs, const double* ps,
                                   size_t count, sm_instance** out);
SM_API sm_status sm_instance_gen_upper_triangular(int k, double p, sm_instance** out);
SM_API sm_status sm_instance_gen_random(int m, int n, double density, double p_low, double p_high,
                                        uint64_t seed, sm_instance** out);
SM_API sm_status sm_instance_read(const char* path, sm_instance** out);
SM_API sm_status sm_instance_parse(const char* json, sm_instance** out);
SM_API sm_status sm_instance_write(const sm_instance* inst, const char* path);
SM_API sm_status sm_instance_to_json(const sm_instance* inst, char** out);
SM_API void sm_instance_free(sm_instance* inst);

SM_API int sm_instance_num_offline(const sm_instance* inst);
SM_API int sm_instance_num_online(const sm_instance* inst);
SM_API int sm_instance_num_edges(const sm_instance* inst);
SM_API sm_status sm_instance_prob(const sm_instance* inst, int u, int v, double* out);
/* 1 and *p set when all edges share one probability, else 0. */
SM_API int sm_instance_equal_p(const sm_instance* inst, double* p);

/* ---- gain functions ---- */

SM_API sm_status sm_gain_ranking(double c, sm_gain** out);
SM_API sm_status sm_gain_ranking_stochastic(sm_gain** out);
SM_API sm_status sm_gain_balance_equal(sm_gain** out);
/* Step function: values[i] on [grid[i], grid[i+1]); load domain unless rank_domain. */
SM_API sm_status sm_gain_step(const double* grid, const double* values, size_t count,
                              int rank_domain, sm_gain** out);
SM_API sm_status sm_gain_eval(const sm_gain* g, double x, double* out);
SM_API sm_status sm_gain_to_json(const sm_gain* g, double gamma, char** out);
SM_API void sm_gain_free(sm_gain* g);

/* ---- algorithms ---- */

/* One run on the draw seeded by seed. g may be NULL: the fractional algorithm
 * then uses the equal-p closed form. */
SM_API sm_status sm_run(const sm_instance* inst, sm_algorithm alg, uint64_t seed, const sm_gain* g,
                        sm_trace** out);
SM_API double sm_trace_value(const sm_trace* trace);
SM_API sm_status sm_trace_export(const sm_trace* trace, sm_format format, char** out);
SM_API void sm_trace_free(sm_trace* trace);

/* ---- benchmarks ---- */

SM_API sm_status sm_matching_lp_value(const sm_instance* inst, double* out);
SM_API sm_status sm_config_lp_value(const sm_instance* inst, double* out);
SM_API sm_status sm_reduced_lp_value(const sm_instance* inst, double* out);
SM_API sm_status sm_s_opt_value(const sm_instance* inst, double* out);
SM_API sm_status sm_exact_value(const sm_instance* inst, sm_algorithm alg, double* out);
/* stderr_out is +inf for a single trial. */
SM_API sm_status sm_mc_value(const sm_instance* inst, sm_algorithm alg, uint64_t trials,
                             uint64_t seed, int jobs, double* mean, double* stderr_out);

typedef struct {
  const sm_algorithm* algorithms; /* NULL: every applicable algorithm */
  size_t num_algorithms;
  uint64_t trials;
  uint64_t seed;
  int jobs;
  int prefer_exact;
} sm_bench_options;

SM_API void sm_bench_options_init(sm_bench_options* options);
SM_API sm_status sm_bench(const sm_instance* inst, const sm_bench_options* options,
                          sm_bench_report** out);
/* Keys: "matching_lp", "config_lp", "reduced_lp", "s_opt" or an algorithm
 * name. Returns SM_ERR_INVALID_ARGUMENT for a benchmark the report lacks. */
SM_API sm_status sm_bench_report_get(const sm_bench_report* report, const char* key, double* value,
                                     double* stderr_out);
SM_API sm_status sm_bench_report_export(const sm_bench_report* report, sm_format format, char** out);
SM_API void sm_bench_report_free(sm_bench_report* report);

/* ---- gain-function constants ---- */

typedef struct {
  double c;
  double gamma;
  double mu_low;
  double residual;
  int iterations;
} sm_ranking_constant;

SM_API sm_status sm_solve_ranking_constant(sm_ranking_constant* out);
SM_API sm_status sm_star_constant(double mu, double* out);
SM_API double sm_balance_equal_gamma(void);
SM_API sm_status sm_verify_balance_equal_ode(int grid_size, double* max_residual);
SM_API sm_status sm_ranking_final_inequality_min(int res, double c, double* out);

typedef struct {
  double min_value;
  double cell;
  double lipschitz;
  double slack;
  int all_equal;
  long evaluated;
} sm_brute_min;

/* argmin receives n entries when not NULL. */
SM_API sm_status sm_brute_min_f(int n, int res, double mu0, double c, int jobs, sm_brute_min* out,
                                double* argmin);

SM_API sm_status sm_alternate_optimize(double step, double lmax, int rounds, sm_altopt** out);
SM_API double sm_altopt_gamma(const sm_altopt* state);
SM_API double sm_altopt_min_slack(const sm_altopt* state);
SM_API double sm_altopt_max_duality_gap(const sm_altopt* state);
SM_API int sm_altopt_rounds(const sm_altopt* state);
/* Gamma after round r (0-based). */
SM_API sm_status sm_altopt_round_gamma(const sm_altopt* state, int r, double* out);
/* JSON: the (g, h, Gamma) certificate; CSV: per-point slacks. */
SM_API sm_status sm_altopt_export(const sm_altopt* state, sm_format format, char** out);
SM_API void sm_altopt_free(sm_altopt* state);

/* ---- dual feasibility ---- */

/* Ranking needs a rank-domain g, the Balance variants a load-domain g. */
SM_API sm_status sm_estimate_duals(const sm_instance* inst, sm_algorithm alg, const sm_gain* g,
                                   uint64_t trials, uint64_t seed, int jobs, sm_duals** out);
SM_API sm_status sm_duals_to_json(const sm_duals* duals, char** out);
SM_API void sm_duals_free(sm_duals* duals);

typedef enum { SM_CHECK_CONFIG = 0, SM_CHECK_REDUCED = 1 } sm_check;

SM_API sm_status sm_check_feasibility(const sm_instance* inst, const sm_duals* duals, sm_check check,
                                      double gamma, sm_feasibility_report** out);
SM_API int sm_feasibility_violations(const sm_feasibility_report* report);
SM_API int sm_feasibility_inconclusive(const sm_feasibility_report* report);
SM_API double sm_feasibility_worst_ratio(const sm_feasibility_report* report);
SM_API size_t sm_feasibility_num_pairs(const sm_feasibility_report* report);
SM_API sm_status sm_feasibility_export(const sm_feasibility_report* report, sm_format format,
                                       char** out);
SM_API void sm_feasibility_report_free(sm_feasibility_report* report);

typedef struct {
  uint64_t trials;
  int ranking_outcome_violations;
  int beta_bound_violations;
  long alpha_invariant_runs;
  double alpha_invariant_max_error;
} sm_lemma_trials;

SM_API sm_status sm_run_lemma_trials(uint64_t trials, uint64_t seed, sm_lemma_trials* out);

#ifdef __cplusplus
}
#endif

#endif
