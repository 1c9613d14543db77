#pragma once

// Benchmarks (LP optima and the stochastic offline optimum) and exact or
// sampled algorithm values on desk-scale instances.
//
// OPT is reported as the Matching LP optimum. With deterministic unit budgets
// an offline fractional allocation x collects sum_u min{sum_v p_uv x_uv, 1};
// an optimal x never pushes a load past 1, since the excess could be dropped
// without losing anything, so OPT is the LP maximum with the load constraint.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gain_function.hpp"
#include "instance.hpp"
#include "simul.hpp"

namespace stochmatch {

enum class Algorithm { kRanking, kBalanceEqual, kGreedy, kBalanceFractional };

std::string to_string(Algorithm alg);
Algorithm parse_algorithm(const std::string& name);

// Runs `alg` on one draw. Integral algorithms use the draw's coins; the
// fractional one uses its budgets and g (default: the equal-p closed form).
Trace run_algorithm(const Instance& inst, const RandomDraw& draw, Algorithm alg,
                    const GainFunction* g = nullptr);

double matching_lp_value(const Instance& inst);
// Columns are the subsets of u's neighbors; any other S is dominated by its
// intersection with the neighborhood. n <= 12.
double configuration_lp_value(const Instance& inst);
// Objective p~_uS y_uS, online rows weighted by 1 - p~_{uS(v)}. n <= 12.
double reduced_stochastic_config_lp_value(const Instance& inst);

// Optimal adaptive offline policy that follows the arrival order and sees
// successes as they happen, by backward induction over the set T of
// successful offline vertices:
//   V(j, T) = max{ V(j+1, T), max_{u not in T} p_uv (1 + V(j+1, T+u)) + (1 - p_uv) V(j+1, T) }.
// m <= 20.
double s_opt_value(const Instance& inst);

// Exact expectation by enumerating all rank orders (Ranking) and every coin
// outcome on the explored paths. m <= 7 and at most 20 edges.
double exact_alg_value(const Instance& inst, Algorithm alg);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // +inf when trials == 1
  std::uint64_t trials = 0;
};

// Trial t uses sample_draw(inst, split_seed(seed, t), mode) with coins for the
// integral algorithms and budgets for the fractional one; sums are reduced in
// a fixed block order, so the result does not depend on `jobs`.
McEstimate mc_alg_value(const Instance& inst, Algorithm alg, std::uint64_t trials,
                        std::uint64_t seed, int jobs = 1, const GainFunction* g = nullptr);

struct AlgValue {
  Algorithm alg;
  double mean = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
};

struct BenchReport {
  double matching_lp = 0.0;
  std::optional<double> config_lp;
  std::optional<double> reduced_lp;
  std::optional<double> s_opt;
  std::vector<AlgValue> algs;
};

struct BenchOptions {
  std::vector<Algorithm> algorithms;  // empty: every algorithm applicable to the instance
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool prefer_exact = true;  // use exact_alg_value where it is within limits
};

// Computes each benchmark that is within its size limit.
BenchReport bench(const Instance& inst, const BenchOptions& options);

std::string bench_to_json(const BenchReport& report);
std::string bench_to_csv(const BenchReport& report);

}  // namespace stochmatch
