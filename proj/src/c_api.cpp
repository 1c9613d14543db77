#include "stochmatch/stochmatch.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <utility>

#include "bench.hpp"
#include "common.hpp"
#include "dualcheck.hpp"
#include "gainfn.hpp"
#include "instance.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simul.hpp"

using namespace stochmatch;

struct sm_instance {
  Instance value;
};
struct sm_gain {
  GainFunction value;
};
struct sm_trace {
  Trace value;
};
struct sm_bench_report {
  BenchReport value;
};
struct sm_duals {
  DualEstimate value;
};
struct sm_feasibility_report {
  FeasibilityReport value;
};
struct sm_altopt {
  AltOptState value;
};

namespace {

thread_local std::string last_error;

sm_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return SM_ERR_INVALID_ARGUMENT;
    case ErrorCode::kParse: return SM_ERR_PARSE;
    case ErrorCode::kIo: return SM_ERR_IO;
    case ErrorCode::kTooLarge: return SM_ERR_TOO_LARGE;
    case ErrorCode::kLpFailure: return SM_ERR_LP;
  }
  return SM_ERR_INTERNAL;
}

// Runs body and turns any exception into a status plus the thread's message.
template <typename Body>
sm_status guard(Body&& body) {
  try {
    body();
    last_error.clear();
    return SM_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return SM_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Algorithm to_alg(sm_algorithm alg) {
  switch (alg) {
    case SM_ALG_RANKING: return Algorithm::kRanking;
    case SM_ALG_BALANCE_EQUAL: return Algorithm::kBalanceEqual;
    case SM_ALG_GREEDY: return Algorithm::kGreedy;
    case SM_ALG_BALANCE_FRACTIONAL: return Algorithm::kBalanceFractional;
  }
  fail(ErrorCode::kInvalidArgument, "unknown algorithm");
}

sm_algorithm from_alg(Algorithm alg) {
  switch (alg) {
    case Algorithm::kRanking: return SM_ALG_RANKING;
    case Algorithm::kBalanceEqual: return SM_ALG_BALANCE_EQUAL;
    case Algorithm::kGreedy: return SM_ALG_GREEDY;
    case Algorithm::kBalanceFractional: return SM_ALG_BALANCE_FRACTIONAL;
  }
  return SM_ALG_RANKING;
}

template <typename T, typename V>
void emit(T** out, V&& value) {
  need(out, "output handle");
  *out = new T{std::forward<V>(value)};
}

template <typename F>
sm_status scalar(double* out, F&& f) {
  return guard([&] {
    need(out, "output");
    *out = f();
  });
}

}  // namespace

extern "C" {

const char* sm_version(void) { return kVersion; }
const char* sm_last_error(void) { return last_error.c_str(); }
void sm_string_free(char* s) { std::free(s); }
int sm_default_jobs(void) { return default_jobs(); }

const char* sm_algorithm_name(sm_algorithm alg) {
  switch (alg) {
    case SM_ALG_RANKING: return "ranking";
    case SM_ALG_BALANCE_EQUAL: return "balance_equal";
    case SM_ALG_GREEDY: return "greedy";
    case SM_ALG_BALANCE_FRACTIONAL: return "balance_fractional";
  }
  return "unknown";
}

sm_status sm_algorithm_parse(const char* name, sm_algorithm* out) {
  return guard([&] {
    need(name, "name");
    need(out, "output");
    *out = from_alg(parse_algorithm(name));
  });
}

sm_status sm_instance_build(int m, int n, const int* us, const int* vs, const double* ps,
                            size_t count, sm_instance** out) {
  return guard([&] {
    if (count > 0) {
      need(us, "us");
      need(vs, "vs");
      need(ps, "ps");
    }
    std::vector<Edge> edges(count);
    for (size_t i = 0; i < count; ++i) edges[i] = {us[i], vs[i], ps[i]};
    emit(out, build_instance(m, n, edges));
  });
}

sm_status sm_instance_gen_upper_triangular(int k, double p, sm_instance** out) {
  return guard([&] { emit(out, gen_upper_triangular(k, p)); });
}

sm_status sm_instance_gen_random(int m, int n, double density, double p_low, double p_high,
                                 uint64_t seed, sm_instance** out) {
  return guard([&] { emit(out, gen_random(m, n, density, p_low, p_high, seed)); });
}

sm_status sm_instance_read(const char* path, sm_instance** out) {
  return guard([&] {
    need(path, "path");
    emit(out, read_instance(path));
  });
}

sm_status sm_instance_parse(const char* json, sm_instance** out) {
  return guard([&] {
    need(json, "json");
    emit(out, instance_from_json(json));
  });
}

sm_status sm_instance_write(const sm_instance* inst, const char* path) {
  return guard([&] {
    need(inst, "instance");
    need(path, "path");
    write_instance(inst->value, path);
  });
}

sm_status sm_instance_to_json(const sm_instance* inst, char** out) {
  return guard([&] {
    need(inst, "instance");
    need(out, "output");
    *out = dup(instance_to_json(inst->value));
  });
}

void sm_instance_free(sm_instance* inst) { delete inst; }

int sm_instance_num_offline(const sm_instance* inst) { return inst ? inst->value.num_offline() : 0; }
int sm_instance_num_online(const sm_instance* inst) { return inst ? inst->value.num_online() : 0; }
int sm_instance_num_edges(const sm_instance* inst) { return inst ? inst->value.num_edges() : 0; }

sm_status sm_instance_prob(const sm_instance* inst, int u, int v, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    require(u >= 0 && u < inst->value.num_offline() && v >= 0 && v < inst->value.num_online(),
            "vertex out of range");
    return inst->value.prob(u, v);
  });
}

int sm_instance_equal_p(const sm_instance* inst, double* p) {
  if (inst == nullptr || !inst->value.equal_p()) return 0;
  if (p != nullptr) *p = *inst->value.equal_p();
  return 1;
}

sm_status sm_gain_ranking(double c, sm_gain** out) {
  return guard([&] { emit(out, GainFunction::ranking(c)); });
}

sm_status sm_gain_ranking_stochastic(sm_gain** out) {
  return guard([&] { emit(out, GainFunction::ranking_stochastic()); });
}

sm_status sm_gain_balance_equal(sm_gain** out) {
  return guard([&] { emit(out, GainFunction::balance_equal()); });
}

sm_status sm_gain_step(const double* grid, const double* values, size_t count, int rank_domain,
                       sm_gain** out) {
  return guard([&] {
    need(grid, "grid");
    need(values, "values");
    emit(out, GainFunction::step(std::vector<double>(grid, grid + count),
                                 std::vector<double>(values, values + count),
                                 rank_domain ? GainDomain::kRank : GainDomain::kLoad));
  });
}

sm_status sm_gain_eval(const sm_gain* g, double x, double* out) {
  return scalar(out, [&] {
    need(g, "gain function");
    return g->value(x);
  });
}

sm_status sm_gain_to_json(const sm_gain* g, double gamma, char** out) {
  return guard([&] {
    need(g, "gain function");
    need(out, "output");
    *out = dup(gain_to_json(g->value, gamma));
  });
}

void sm_gain_free(sm_gain* g) { delete g; }

sm_status sm_run(const sm_instance* inst, sm_algorithm alg, uint64_t seed, const sm_gain* g,
                 sm_trace** out) {
  return guard([&] {
    need(inst, "instance");
    const Algorithm a = to_alg(alg);
    const DrawMode mode = a == Algorithm::kBalanceFractional ? DrawMode::kBudgets : DrawMode::kCoins;
    const RandomDraw draw = sample_draw(inst->value, seed, mode);
    emit(out, run_algorithm(inst->value, draw, a, g ? &g->value : nullptr));
  });
}

double sm_trace_value(const sm_trace* trace) { return trace ? trace->value.value : 0.0; }

sm_status sm_trace_export(const sm_trace* trace, sm_format format, char** out) {
  return guard([&] {
    need(trace, "trace");
    need(out, "output");
    *out = dup(format == SM_FORMAT_CSV ? trace_to_csv(trace->value) : trace_to_json(trace->value));
  });
}

void sm_trace_free(sm_trace* trace) { delete trace; }

sm_status sm_matching_lp_value(const sm_instance* inst, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    return matching_lp_value(inst->value);
  });
}

sm_status sm_config_lp_value(const sm_instance* inst, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    return configuration_lp_value(inst->value);
  });
}

sm_status sm_reduced_lp_value(const sm_instance* inst, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    return reduced_stochastic_config_lp_value(inst->value);
  });
}

sm_status sm_s_opt_value(const sm_instance* inst, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    return s_opt_value(inst->value);
  });
}

sm_status sm_exact_value(const sm_instance* inst, sm_algorithm alg, double* out) {
  return scalar(out, [&] {
    need(inst, "instance");
    return exact_alg_value(inst->value, to_alg(alg));
  });
}

sm_status sm_mc_value(const sm_instance* inst, sm_algorithm alg, uint64_t trials, uint64_t seed,
                      int jobs, double* mean, double* stderr_out) {
  return guard([&] {
    need(inst, "instance");
    need(mean, "mean");
    const McEstimate est = mc_alg_value(inst->value, to_alg(alg), trials, seed, jobs);
    *mean = est.mean;
    if (stderr_out != nullptr) *stderr_out = est.stderr_;
  });
}

void sm_bench_options_init(sm_bench_options* options) {
  if (options == nullptr) return;
  const BenchOptions d;
  options->algorithms = nullptr;
  options->num_algorithms = 0;
  options->trials = d.trials;
  options->seed = d.seed;
  options->jobs = d.jobs;
  options->prefer_exact = d.prefer_exact ? 1 : 0;
}

sm_status sm_bench(const sm_instance* inst, const sm_bench_options* options, sm_bench_report** out) {
  return guard([&] {
    need(inst, "instance");
    need(options, "options");
    BenchOptions o;
    if (options->num_algorithms > 0) need(options->algorithms, "algorithms");
    for (size_t i = 0; i < options->num_algorithms; ++i) o.algorithms.push_back(to_alg(options->algorithms[i]));
    o.trials = options->trials;
    o.seed = options->seed;
    o.jobs = options->jobs;
    o.prefer_exact = options->prefer_exact != 0;
    emit(out, bench(inst->value, o));
  });
}

sm_status sm_bench_report_get(const sm_bench_report* report, const char* key, double* value,
                              double* stderr_out) {
  return guard([&] {
    need(report, "report");
    need(key, "key");
    need(value, "value");
    const BenchReport& r = report->value;
    const std::string k = key;
    std::optional<double> found;
    double se = 0.0;
    if (k == "matching_lp") {
      found = r.matching_lp;
    } else if (k == "config_lp") {
      found = r.config_lp;
    } else if (k == "reduced_lp") {
      found = r.reduced_lp;
    } else if (k == "s_opt") {
      found = r.s_opt;
    } else {
      const Algorithm alg = parse_algorithm(k);
      for (const AlgValue& a : r.algs) {
        if (a.alg == alg) {
          found = a.mean;
          se = a.stderr_;
        }
      }
    }
    require(found.has_value(), "report has no value for " + k);
    *value = *found;
    if (stderr_out != nullptr) *stderr_out = se;
  });
}

sm_status sm_bench_report_export(const sm_bench_report* report, sm_format format, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "output");
    *out = dup(format == SM_FORMAT_CSV ? bench_to_csv(report->value) : bench_to_json(report->value));
  });
}

void sm_bench_report_free(sm_bench_report* report) { delete report; }

sm_status sm_solve_ranking_constant(sm_ranking_constant* out) {
  return guard([&] {
    need(out, "output");
    const RankingConstant r = solve_ranking_constant();
    *out = {r.c, r.gamma, r.mu_low, r.residual, r.iterations};
  });
}

sm_status sm_star_constant(double mu, double* out) {
  return scalar(out, [&] { return star_constant(mu); });
}

double sm_balance_equal_gamma(void) { return balance_equal_gamma(); }

sm_status sm_verify_balance_equal_ode(int grid_size, double* max_residual) {
  return scalar(max_residual, [&] { return verify_balance_equal_ode(grid_size); });
}

sm_status sm_ranking_final_inequality_min(int res, double c, double* out) {
  return scalar(out, [&] { return ranking_final_inequality_min(res, c); });
}

sm_status sm_brute_min_f(int n, int res, double mu0, double c, int jobs, sm_brute_min* out,
                         double* argmin) {
  return guard([&] {
    need(out, "output");
    const BruteMinResult r = brute_min_f(n, res, mu0, c, jobs);
    *out = {r.min_value, r.cell, r.lipschitz, r.slack, r.all_equal ? 1 : 0, r.evaluated};
    if (argmin != nullptr) std::copy(r.argmin.begin(), r.argmin.end(), argmin);
  });
}

sm_status sm_alternate_optimize(double step, double lmax, int rounds, sm_altopt** out) {
  return guard([&] { emit(out, alternate_optimize(step, lmax, rounds)); });
}

double sm_altopt_gamma(const sm_altopt* state) { return state ? state->value.gamma : 0.0; }
double sm_altopt_min_slack(const sm_altopt* state) { return state ? state->value.min_slack : 0.0; }
double sm_altopt_max_duality_gap(const sm_altopt* state) {
  return state ? state->value.max_duality_gap : 0.0;
}
int sm_altopt_rounds(const sm_altopt* state) {
  return state ? static_cast<int>(state->value.gamma_history.size()) : 0;
}

sm_status sm_altopt_round_gamma(const sm_altopt* state, int r, double* out) {
  return scalar(out, [&] {
    need(state, "state");
    require(r >= 0 && r < static_cast<int>(state->value.gamma_history.size()), "round out of range");
    return state->value.gamma_history[r];
  });
}

sm_status sm_altopt_export(const sm_altopt* state, sm_format format, char** out) {
  return guard([&] {
    need(state, "state");
    need(out, "output");
    *out = dup(format == SM_FORMAT_CSV ? alt_opt_slack_csv(state->value) : alt_opt_to_json(state->value));
  });
}

void sm_altopt_free(sm_altopt* state) { delete state; }

sm_status sm_estimate_duals(const sm_instance* inst, sm_algorithm alg, const sm_gain* g,
                            uint64_t trials, uint64_t seed, int jobs, sm_duals** out) {
  return guard([&] {
    need(inst, "instance");
    need(g, "gain function");
    emit(out, estimate_duals(inst->value, to_alg(alg), g->value, trials, seed, jobs));
  });
}

sm_status sm_duals_to_json(const sm_duals* duals, char** out) {
  return guard([&] {
    need(duals, "duals");
    need(out, "output");
    *out = dup(duals_to_json(duals->value));
  });
}

void sm_duals_free(sm_duals* duals) { delete duals; }

sm_status sm_check_feasibility(const sm_instance* inst, const sm_duals* duals, sm_check check,
                               double gamma, sm_feasibility_report** out) {
  return guard([&] {
    need(inst, "instance");
    need(duals, "duals");
    require(check == SM_CHECK_CONFIG || check == SM_CHECK_REDUCED, "unknown check");
    emit(out, check == SM_CHECK_CONFIG ? check_config_feasibility(inst->value, duals->value, gamma)
                                       : check_reduced_feasibility(inst->value, duals->value, gamma));
  });
}

int sm_feasibility_violations(const sm_feasibility_report* report) {
  return report ? report->value.violations : 0;
}
int sm_feasibility_inconclusive(const sm_feasibility_report* report) {
  return report ? report->value.inconclusive : 0;
}
double sm_feasibility_worst_ratio(const sm_feasibility_report* report) {
  return report ? report->value.worst_ratio : kInf;
}
size_t sm_feasibility_num_pairs(const sm_feasibility_report* report) {
  return report ? report->value.pairs.size() : 0;
}

sm_status sm_feasibility_export(const sm_feasibility_report* report, sm_format format, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "output");
    *out = dup(format == SM_FORMAT_CSV ? feasibility_to_csv(report->value)
                                       : feasibility_to_json(report->value));
  });
}

void sm_feasibility_report_free(sm_feasibility_report* report) { delete report; }

sm_status sm_run_lemma_trials(uint64_t trials, uint64_t seed, sm_lemma_trials* out) {
  return guard([&] {
    need(out, "output");
    const LemmaTrials r = run_lemma_trials(trials, seed);
    *out = {r.trials, r.ranking_outcome_violations, r.beta_bound_violations, r.alpha_invariant_runs,
            r.alpha_invariant_max_error};
  });
}

}  // extern "C"
