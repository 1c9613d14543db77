#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "common.hpp"
#include "format.hpp"
#include "json.hpp"
#include "lpcore.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace stochmatch {

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kRanking:
      return "ranking";
    case Algorithm::kBalanceEqual:
      return "balance_equal";
    case Algorithm::kGreedy:
      return "greedy";
    case Algorithm::kBalanceFractional:
      return "balance_fractional";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::kRanking, Algorithm::kBalanceEqual, Algorithm::kGreedy,
                      Algorithm::kBalanceFractional}) {
    if (to_string(a) == name) return a;
  }
  fail(ErrorCode::kInvalidArgument, "unknown algorithm: " + name);
}

Trace run_algorithm(const Instance& inst, const RandomDraw& draw, Algorithm alg,
                    const GainFunction* g) {
  switch (alg) {
    case Algorithm::kRanking:
      return run_ranking(inst, draw);
    case Algorithm::kBalanceEqual:
      return run_balance_equal(inst, draw);
    case Algorithm::kGreedy:
      return run_greedy(inst, draw);
    case Algorithm::kBalanceFractional: {
      require(static_cast<int>(draw.budgets.size()) == inst.num_offline(), "draw has no budgets");
      if (g != nullptr) return run_balance_fractional(inst, draw.budgets, *g);
      return run_balance_fractional(inst, draw.budgets, GainFunction::balance_equal());
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown algorithm");
}

namespace {

double solve_value(const lp::LpProblem& problem, const char* what) {
  const lp::LpSolution sol = lp::solve(problem);
  if (sol.status != lp::Status::kOptimal) {
    fail(ErrorCode::kLpFailure, std::string(what) + " is " + lp::to_string(sol.status));
  }
  if (sol.duality_gap > 1e-7 || sol.primal_residual > 1e-9 || sol.dual_residual > 1e-9) {
    fail(ErrorCode::kLpFailure, std::string(what) + " certificate check failed");
  }
  return sol.value;
}

// Shared builder of the two configuration LPs. `weight(u, subset, v_index)`
// is the coefficient of y_uS in the row of the v_index-th member of S (in
// arrival order); `objective(u, subset)` the column's objective.
template <typename Objective, typename Weight>
double config_like_lp(const Instance& inst, Objective&& objective, Weight&& weight,
                      const char* what) {
  const int m = inst.num_offline();
  const int n = inst.num_online();
  if (n > 12) fail(ErrorCode::kTooLarge, std::string(what) + " supports at most 12 online vertices");
  lp::LpProblem problem;
  std::vector<std::vector<std::pair<int, double>>> online_rows(n);
  std::vector<int> subset;
  for (int u = 0; u < m; ++u) {
    const auto& nbrs = inst.offline_neighbors(u);
    const std::uint32_t count = 1u << nbrs.size();
    std::vector<std::pair<int, double>> offline_row;
    for (std::uint32_t mask = 1; mask < count; ++mask) {
      subset.clear();
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        if (mask >> i & 1u) subset.push_back(nbrs[i]);
      }
      const int var = problem.add_variable(objective(u, subset));
      offline_row.emplace_back(var, 1.0);
      for (std::size_t i = 0; i < subset.size(); ++i) {
        online_rows[subset[i]].emplace_back(var, weight(u, subset, i));
      }
    }
    if (!offline_row.empty()) problem.add_row(std::move(offline_row), lp::Sense::kLe, 1.0);
  }
  for (auto& row : online_rows) {
    if (!row.empty()) problem.add_row(std::move(row), lp::Sense::kLe, 1.0);
  }
  if (problem.num_variables() == 0) return 0.0;
  return solve_value(problem, what);
}

// Expected value of a deterministic-choice algorithm by branching on every
// match outcome. Loads are tracked as match counts, which order the same way
// as loads under equal probabilities.
class ExactEnumerator {
 public:
  ExactEnumerator(const Instance& inst, Algorithm alg, const std::vector<int>* rank_pos)
      : inst_(inst), alg_(alg), rank_pos_(rank_pos), count_(inst.num_offline(), 0) {}

  double value(int v, std::uint32_t succ) {
    if (v == inst_.num_online()) return 0.0;
    int best = -1;
    for (int u : inst_.online_neighbors(v)) {
      if (succ >> u & 1u) continue;
      if (best < 0 || better(u, best, v)) best = u;
    }
    if (best < 0) return value(v + 1, succ);
    const double p = inst_.prob(best, v);
    ++count_[best];
    double total = p * (1.0 + value(v + 1, succ | (1u << best)));
    if (p < 1.0) total += (1.0 - p) * value(v + 1, succ);
    --count_[best];
    return total;
  }

 private:
  // Candidates are visited by ascending id, so strict comparisons keep the
  // smallest id on ties.
  bool better(int u, int best, int v) const {
    switch (alg_) {
      case Algorithm::kRanking:
        return (*rank_pos_)[u] < (*rank_pos_)[best];
      case Algorithm::kBalanceEqual:
        return count_[u] < count_[best];
      case Algorithm::kGreedy:
        return inst_.prob(u, v) > inst_.prob(best, v);
      case Algorithm::kBalanceFractional:
        break;
    }
    return false;
  }

  const Instance& inst_;
  Algorithm alg_;
  const std::vector<int>* rank_pos_;
  std::vector<int> count_;
};

}  // namespace

double matching_lp_value(const Instance& inst) {
  const int m = inst.num_offline();
  const int n = inst.num_online();
  lp::LpProblem problem;
  std::vector<std::vector<std::pair<int, double>>> offline_rows(m), online_rows(n);
  for (const Edge& e : inst.edges()) {
    const int var = problem.add_variable(e.p);
    offline_rows[e.u].emplace_back(var, e.p);
    online_rows[e.v].emplace_back(var, 1.0);
  }
  if (problem.num_variables() == 0) return 0.0;
  for (auto& row : offline_rows) {
    if (!row.empty()) problem.add_row(std::move(row), lp::Sense::kLe, 1.0);
  }
  for (auto& row : online_rows) {
    if (!row.empty()) problem.add_row(std::move(row), lp::Sense::kLe, 1.0);
  }
  return solve_value(problem, "Matching LP");
}

double configuration_lp_value(const Instance& inst) {
  return config_like_lp(
      inst, [&](int u, const std::vector<int>& s) { return p_bar(inst, u, s); },
      [](int, const std::vector<int>&, std::size_t) { return 1.0; }, "Configuration LP");
}

double reduced_stochastic_config_lp_value(const Instance& inst) {
  return config_like_lp(
      inst, [&](int u, const std::vector<int>& s) { return p_tilde(inst, u, s); },
      [&](int u, const std::vector<int>& s, std::size_t i) {
        // S(v) is the prefix of S before its i-th member.
        return 1.0 - p_tilde(inst, u, std::span<const int>(s.data(), i));
      },
      "Reduced-form Stochastic Configuration LP");
}

double s_opt_value(const Instance& inst) {
  const int m = inst.num_offline();
  const int n = inst.num_online();
  if (m > 20) fail(ErrorCode::kTooLarge, "S-OPT supports at most 20 offline vertices");
  const std::size_t states = std::size_t{1} << m;
  std::vector<double> next(states, 0.0), cur(states);
  for (int v = n - 1; v >= 0; --v) {
    const auto& nbrs = inst.online_neighbors(v);
    for (std::size_t t = 0; t < states; ++t) {
      double best = next[t];
      for (int u : nbrs) {
        if (t >> u & 1u) continue;
        const double p = inst.prob(u, v);
        best = std::max(best, p * (1.0 + next[t | (std::size_t{1} << u)]) + (1.0 - p) * next[t]);
      }
      cur[t] = best;
    }
    std::swap(cur, next);
  }
  return next[0];
}

double exact_alg_value(const Instance& inst, Algorithm alg) {
  const int m = inst.num_offline();
  if (m > 7 || inst.num_edges() > 20) {
    fail(ErrorCode::kTooLarge, "exact enumeration supports m <= 7 and at most 20 edges");
  }
  require(alg != Algorithm::kBalanceFractional,
          "exact enumeration covers the integral algorithms only");
  if (alg != Algorithm::kGreedy) {
    require(inst.has_equal_probabilities(), to_string(alg) + " requires equal success probabilities");
  }
  if (alg != Algorithm::kRanking) {
    ExactEnumerator e(inst, alg, nullptr);
    return e.value(0, 0);
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> pos(m);
  double total = 0.0;
  long perms = 0;
  do {
    for (int i = 0; i < m; ++i) pos[order[i]] = i;
    ExactEnumerator e(inst, alg, &pos);
    total += e.value(0, 0);
    ++perms;
  } while (std::next_permutation(order.begin(), order.end()));
  return total / static_cast<double>(perms);
}

McEstimate mc_alg_value(const Instance& inst, Algorithm alg, std::uint64_t trials,
                        std::uint64_t seed, int jobs, const GainFunction* g) {
  require(trials >= 1, "need at least one trial");
  constexpr std::uint64_t kBlock = 256;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  struct Moments {
    double count = 0.0, mean = 0.0, m2 = 0.0;
  };
  std::vector<Moments> parts(blocks);
  const DrawMode mode = alg == Algorithm::kBalanceFractional ? DrawMode::kBudgets : DrawMode::kCoins;
  parallel_blocks(blocks, jobs, [&](std::size_t b) {
    Moments& mom = parts[b];
    const std::uint64_t end = std::min(trials, (b + 1) * kBlock);
    for (std::uint64_t t = b * kBlock; t < end; ++t) {
      const RandomDraw draw = sample_draw(inst, split_seed(seed, t), mode);
      const double x = run_algorithm(inst, draw, alg, g).value;
      mom.count += 1.0;
      const double d = x - mom.mean;
      mom.mean += d / mom.count;
      mom.m2 += d * (x - mom.mean);
    }
  });
  Moments total;
  for (const Moments& p : parts) {
    const double count = total.count + p.count;
    const double d = p.mean - total.mean;
    total.mean += d * p.count / count;
    total.m2 += p.m2 + d * d * total.count * p.count / count;
    total.count = count;
  }
  McEstimate out;
  out.trials = trials;
  out.mean = total.mean;
  out.stderr_ = trials > 1 ? std::sqrt(total.m2 / (total.count - 1.0) / total.count) : kInf;
  return out;
}

BenchReport bench(const Instance& inst, const BenchOptions& options) {
  BenchReport report;
  report.matching_lp = matching_lp_value(inst);
  if (inst.num_online() <= 12) {
    report.config_lp = configuration_lp_value(inst);
    report.reduced_lp = reduced_stochastic_config_lp_value(inst);
  }
  if (inst.num_offline() <= 20) report.s_opt = s_opt_value(inst);

  std::vector<Algorithm> algs = options.algorithms;
  if (algs.empty()) {
    if (inst.has_equal_probabilities()) {
      algs = {Algorithm::kRanking, Algorithm::kBalanceEqual, Algorithm::kGreedy};
    } else {
      algs = {Algorithm::kGreedy, Algorithm::kBalanceFractional};
    }
  }
  const bool small = inst.num_offline() <= 7 && inst.num_edges() <= 20;
  for (Algorithm alg : algs) {
    AlgValue val{alg};
    if (options.prefer_exact && small && alg != Algorithm::kBalanceFractional) {
      val.mean = exact_alg_value(inst, alg);
      val.exact = true;
    } else {
      const McEstimate est = mc_alg_value(inst, alg, options.trials, options.seed, options.jobs);
      val.mean = est.mean;
      val.stderr_ = est.stderr_;
    }
    report.algs.push_back(val);
  }
  return report;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& x) {
  return x ? nlohmann::json(round12(*x)) : nlohmann::json(nullptr);
}

}  // namespace

std::string bench_to_json(const BenchReport& report) {
  nlohmann::ordered_json j;
  j["matching_lp"] = round12(report.matching_lp);
  j["config_lp"] = opt_json(report.config_lp);
  j["reduced_lp"] = opt_json(report.reduced_lp);
  j["s_opt"] = opt_json(report.s_opt);
  auto algs = nlohmann::ordered_json::array();
  for (const AlgValue& a : report.algs) {
    nlohmann::ordered_json row;
    row["name"] = to_string(a.alg);
    row["mean"] = round12(a.mean);
    row["exact"] = a.exact;
    if (a.exact || !std::isfinite(a.stderr_)) {
      row["stderr"] = nullptr;
    } else {
      row["stderr"] = round12(a.stderr_);
    }
    algs.push_back(row);
  }
  j["algorithms"] = algs;
  return j.dump(2);
}

std::string bench_to_csv(const BenchReport& report) {
  std::ostringstream os;
  os << "benchmark,value,stderr,exact\n";
  os << "matching_lp," << fmt(report.matching_lp) << ",,1\n";
  auto opt = [&](const char* name, const std::optional<double>& x) {
    if (x) os << name << ',' << fmt(*x) << ",,1\n";
  };
  opt("config_lp", report.config_lp);
  opt("reduced_lp", report.reduced_lp);
  opt("s_opt", report.s_opt);
  for (const AlgValue& a : report.algs) {
    os << to_string(a.alg) << ',' << fmt(a.mean) << ',';
    if (!a.exact) os << fmt(a.stderr_);
    os << ',' << (a.exact ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace stochmatch
