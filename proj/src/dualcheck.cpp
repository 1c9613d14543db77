#include "dualcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "format.hpp"
#include "gainfn.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace stochmatch {

namespace {

constexpr std::uint64_t kBlock = 256;

// Running mean and centered cross-product matrix, merged block by block.
struct Moments {
  double count = 0.0;
  std::vector<double> mean;
  std::vector<double> c;  // d x d

  explicit Moments(std::size_t d = 0) : mean(d, 0.0), c(d * d, 0.0) {}

  void add(const std::vector<double>& x) {
    const std::size_t d = mean.size();
    count += 1.0;
    std::vector<double> before(d);
    for (std::size_t i = 0; i < d; ++i) {
      before[i] = x[i] - mean[i];
      mean[i] += before[i] / count;
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double after = x[i] - mean[i];
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += after * before[j];
    }
  }

  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const std::size_t d = mean.size();
    const double total = count + o.count;
    std::vector<double> delta(d);
    for (std::size_t i = 0; i < d; ++i) delta[i] = o.mean[i] - mean[i];
    const double f = count * o.count / total;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += o.c[i * d + j] + delta[i] * delta[j] * f;
    }
    for (std::size_t i = 0; i < d; ++i) mean[i] += delta[i] * o.count / total;
    count = total;
  }
};

DualLedger ledger_for(const Instance& inst, const Trace& trace, const RandomDraw& draw,
                      Algorithm alg, const GainFunction& g) {
  switch (alg) {
    case Algorithm::kRanking:
      return ranking_ledger(inst, trace, draw, g);
    case Algorithm::kBalanceEqual:
      return balance_discrete_ledger(trace, g);
    case Algorithm::kBalanceFractional:
      return fractional_ledger(trace, g);
    case Algorithm::kGreedy:
      break;
  }
  fail(ErrorCode::kInvalidArgument, "no dual ledger is defined for " + to_string(alg));
}

// Subsets of u's neighbors as masks over online ids, with members listed in
// arrival order. Includes the empty set.
template <typename Body>
void for_each_neighbor_subset(const Instance& inst, int u, Body&& body) {
  const auto& nbrs = inst.offline_neighbors(u);
  std::vector<int> members;
  for (std::uint32_t bits = 0; bits < (1u << nbrs.size()); ++bits) {
    members.clear();
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (bits >> i & 1u) {
        members.push_back(nbrs[i]);
        mask |= 1u << nbrs[i];
      }
    }
    body(mask, members);
  }
}

void classify(FeasibilityReport& report) {
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    PairSlack& ps = report.pairs[i];
    if (ps.slack >= -1e-12) {
      ps.verdict = Verdict::kOk;
    } else if (ps.slack >= -3.0 * ps.se) {
      ps.verdict = Verdict::kInconclusive;
      ++report.inconclusive;
    } else {
      ps.verdict = Verdict::kViolation;
      ++report.violations;
    }
    if (ps.target > 1e-15) {
      const double ratio = ps.lhs / ps.target;
      if (ratio < report.worst_ratio) {
        report.worst_ratio = ratio;
        report.worst = static_cast<int>(i);
      }
    }
  }
}

template <typename Weight, typename Target>
FeasibilityReport sweep(const Instance& inst, const DualEstimate& est, double gamma,
                        Weight&& weight, Target&& target) {
  require(est.m == inst.num_offline() && est.n == inst.num_online(),
          "dual estimate does not match the instance");
  if (inst.num_online() > 12) fail(ErrorCode::kTooLarge, "feasibility sweeps support n <= 12");
  FeasibilityReport report;
  report.gamma = gamma;
  std::vector<std::pair<int, double>> weights;
  for (int u = 0; u < inst.num_offline(); ++u) {
    for_each_neighbor_subset(inst, u, [&](std::uint32_t mask, const std::vector<int>& s) {
      weights.clear();
      PairSlack ps;
      ps.u = u;
      ps.mask = mask;
      ps.lhs = est.alpha_mean[u];
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double w = weight(u, s, i);
        weights.emplace_back(s[i], w);
        ps.lhs += w * est.beta_mean[s[i]];
      }
      ps.target = gamma * target(u, s);
      ps.slack = ps.lhs - ps.target;
      ps.se = est.combination_se(u, weights);
      report.pairs.push_back(ps);
    });
  }
  classify(report);
  return report;
}

// p_{uS(v)} for each member of S, in arrival order.
std::vector<double> prefix_loads(const Instance& inst, int u, const std::vector<int>& s) {
  std::vector<double> out;
  double acc = 0.0;
  for (int v : s) {
    out.push_back(acc);
    acc += inst.prob(u, v);
  }
  return out;
}

void check_subset(const Instance& inst, int u, const std::vector<int>& s) {
  require(u >= 0 && u < inst.num_offline(), "offline vertex out of range");
  for (std::size_t i = 0; i < s.size(); ++i) {
    require(s[i] >= 0 && s[i] < inst.num_online() && inst.prob(u, s[i]) > 0.0,
            "S must consist of neighbors of u");
    if (i > 0) require(s[i] > s[i - 1], "S must be listed in arrival order without repeats");
  }
}

}  // namespace

double DualEstimate::combination_se(int u, const std::vector<std::pair<int, double>>& weights) const {
  if (trials < 2) return kInf;
  const std::size_t d = static_cast<std::size_t>(m + n);
  std::vector<std::pair<std::size_t, double>> w;
  w.emplace_back(static_cast<std::size_t>(u), 1.0);
  for (const auto& [v, x] : weights) w.emplace_back(static_cast<std::size_t>(m + v), x);
  double var = 0.0;
  for (const auto& [i, wi] : w) {
    for (const auto& [j, wj] : w) var += wi * wj * cov[i * d + j];
  }
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(trials));
}

DualEstimate estimate_duals(const Instance& inst, Algorithm alg, const GainFunction& g,
                            std::uint64_t trials, std::uint64_t seed, int jobs) {
  require(trials >= 1, "need at least one trial");
  if (alg == Algorithm::kRanking) {
    require(g.domain() == GainDomain::kRank, "Ranking needs a rank-domain gain function");
  } else {
    require(g.domain() == GainDomain::kLoad, "Balance needs a load-domain gain function");
  }
  const int m = inst.num_offline();
  const int n = inst.num_online();
  const std::size_t d = static_cast<std::size_t>(m + n);
  const DrawMode mode = alg == Algorithm::kBalanceFractional ? DrawMode::kBudgets : DrawMode::kCoins;
  const std::uint64_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<Moments> parts(blocks, Moments(d + 2));
  parallel_blocks(blocks, jobs, [&](std::size_t b) {
    std::vector<double> x(d + 2);
    const std::uint64_t end = std::min(trials, (b + 1) * kBlock);
    for (std::uint64_t t = b * kBlock; t < end; ++t) {
      const RandomDraw draw = sample_draw(inst, split_seed(seed, t), mode);
      const Trace trace = run_algorithm(inst, draw, alg, &g);
      const DualLedger ledger = ledger_for(inst, trace, draw, alg, g);
      std::copy(ledger.alpha.begin(), ledger.alpha.end(), x.begin());
      std::copy(ledger.beta.begin(), ledger.beta.end(), x.begin() + m);
      x[d] = trace.value;
      x[d + 1] = ledger.total();
      parts[b].add(x);
    }
  });
  Moments total(d + 2);
  for (const Moments& p : parts) total.merge(p);

  DualEstimate est;
  est.m = m;
  est.n = n;
  est.trials = trials;
  const double T = static_cast<double>(trials);
  auto var_of = [&](std::size_t i) { return trials > 1 ? total.c[i * (d + 2) + i] / (T - 1.0) : kInf; };
  auto se_of = [&](std::size_t i) { return trials > 1 ? std::sqrt(std::max(var_of(i), 0.0) / T) : kInf; };
  for (int u = 0; u < m; ++u) {
    est.alpha_mean.push_back(total.mean[u]);
    est.alpha_se.push_back(se_of(u));
  }
  for (int v = 0; v < n; ++v) {
    est.beta_mean.push_back(total.mean[m + v]);
    est.beta_se.push_back(se_of(m + v));
  }
  est.cov.assign(d * d, 0.0);
  if (trials > 1) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) est.cov[i * d + j] = total.c[i * (d + 2) + j] / (T - 1.0);
    }
  }
  est.value_mean = total.mean[d];
  est.value_se = se_of(d);
  est.dual_total_mean = total.mean[d + 1];
  if (trials > 1) {
    const std::size_t w = d + 2;
    const double var = (total.c[d * w + d] + total.c[(d + 1) * w + d + 1] - 2.0 * total.c[d * w + d + 1]) / (T - 1.0);
    est.conservation_se = std::sqrt(std::max(var, 0.0) / T);
  } else {
    est.conservation_se = kInf;
  }
  return est;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kOk:
      return "ok";
    case Verdict::kInconclusive:
      return "inconclusive";
    case Verdict::kViolation:
      return "violation";
  }
  return "unknown";
}

FeasibilityReport check_config_feasibility(const Instance& inst, const DualEstimate& est,
                                           double gamma) {
  return sweep(
      inst, est, gamma, [](int, const std::vector<int>&, std::size_t) { return 1.0; },
      [&](int u, const std::vector<int>& s) { return p_bar(inst, u, s); });
}

FeasibilityReport check_reduced_feasibility(const Instance& inst, const DualEstimate& est,
                                            double gamma) {
  return sweep(
      inst, est, gamma,
      [&](int u, const std::vector<int>& s, std::size_t i) {
        return 1.0 - p_tilde(inst, u, std::span<const int>(s.data(), i));
      },
      [&](int u, const std::vector<int>& s) { return p_tilde(inst, u, s); });
}

FullCheck check_full_stochastic_feasibility(const Instance& inst, int u, const std::vector<int>& s,
                                            const std::vector<double>& budgets,
                                            const GainFunction& g, double gamma, int nodes,
                                            double delta) {
  check_subset(inst, u, s);
  require(nodes >= 4, "need at least 4 quadrature nodes");
  std::vector<double> theta = budgets;
  theta[u] = kInf;
  const Trace inf_trace = run_balance_fractional(inst, theta, g, delta);
  const DualLedger inf_ledger = fractional_ledger(inf_trace, g);
  FullCheck out;
  out.runs = 1;
  out.ell_inf = inf_trace.load[u];
  out.alpha = g.exp_weighted_integral(0.0, out.ell_inf);
  const std::vector<double> starts = prefix_loads(inst, u, s);

  auto beta_sum = [&](double t, const DualLedger& ledger) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (t >= starts[i]) total += ledger.beta[s[i]];
    }
    return total;
  };

  // theta_u >= ell_inf: the run equals the infinite-budget run.
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.beta += inf_ledger.beta[s[i]] * std::exp(-std::max(out.ell_inf, starts[i]));
  }

  if (out.ell_inf > 0.0) {
    std::vector<double> knots = {0.0, out.ell_inf};
    for (double t : starts) {
      if (t > 0.0 && t < out.ell_inf) knots.push_back(t);
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    const auto rule = quad::gauss_legendre(4);
    const int panels = std::max(nodes / 4, static_cast<int>(knots.size()) - 1);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double a = knots[k];
      const double b = knots[k + 1];
      const int count = std::max(1, static_cast<int>(std::lround(panels * (b - a) / out.ell_inf)));
      for (int c = 0; c < count; ++c) {
        const double lo = a + (b - a) * c / count;
        const double hi = c + 1 == count ? b : a + (b - a) * (c + 1) / count;
        out.beta += quad::gauss_legendre_integral(
            [&](double t) {
              theta[u] = t;
              const Trace tr = run_balance_fractional(inst, theta, g, delta);
              ++out.runs;
              return std::exp(-t) * beta_sum(t, fractional_ledger(tr, g));
            },
            lo, hi, rule);
      }
    }
  }
  out.target = gamma * p_tilde(inst, u, s);
  out.slack = out.alpha + out.beta - out.target;
  return out;
}

double alpha_invariant_error(const Trace& trace, const DualLedger& ledger, const GainFunction& g,
                             AlphaMode mode, const RandomDraw* draw) {
  const int m = trace.num_offline();
  require(static_cast<int>(ledger.alpha.size()) == m, "ledger does not match trace");
  if (mode == AlphaMode::kRanking) {
    require(draw != nullptr && static_cast<int>(draw->ranks.size()) == m, "ranking mode needs the ranks");
    require(g.domain() == GainDomain::kRank, "ranking mode needs a rank-domain g");
  } else {
    require(g.domain() == GainDomain::kLoad, "balance modes need a load-domain g");
  }
  std::vector<double> expected(m, 0.0);
  if (mode == AlphaMode::kBalanceDiscrete) {
    std::vector<double> load(m, 0.0);
    for (const auto& row : trace.match) {
      for (const Assignment& a : row) {
        expected[a.u] += a.gain * g(load[a.u]);
        load[a.u] += a.gain;
      }
    }
  }
  double worst = 0.0;
  for (int u = 0; u < m; ++u) {
    switch (mode) {
      case AlphaMode::kRanking:
        expected[u] = trace.load[u] * g(draw->ranks[u]);
        break;
      case AlphaMode::kBalance:
        expected[u] = g.cumulative(trace.load[u]);
        break;
      case AlphaMode::kBalanceDiscrete:
        break;
    }
    worst = std::max(worst, std::fabs(ledger.alpha[u] - expected[u]));
  }
  return worst;
}

bool verify_alpha_invariant(const Trace& trace, const DualLedger& ledger, const GainFunction& g,
                            AlphaMode mode, const RandomDraw* draw, double tol) {
  return alpha_invariant_error(trace, ledger, g, mode, draw) <= tol;
}

AlphaExpectation verify_balance_alpha_expectation(const Instance& inst, int u,
                                                  const std::vector<double>& budgets,
                                                  const GainFunction& g, std::uint64_t samples,
                                                  std::uint64_t seed, int jobs, double delta) {
  require(u >= 0 && u < inst.num_offline(), "offline vertex out of range");
  require(samples >= 2, "need at least two samples");
  std::vector<double> theta = budgets;
  theta[u] = kInf;
  const Trace inf_trace = run_balance_fractional(inst, theta, g, delta);
  const double inf_alpha = fractional_ledger(inf_trace, g).alpha[u];
  AlphaExpectation out;
  out.ell_inf = inf_trace.load[u];
  out.exact = g.exp_weighted_integral(0.0, out.ell_inf);

  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<Moments> parts(blocks, Moments(1));
  parallel_blocks(blocks, jobs, [&](std::size_t b) {
    std::vector<double> local = budgets;
    const std::uint64_t end = std::min(samples, (b + 1) * kBlock);
    for (std::uint64_t t = b * kBlock; t < end; ++t) {
      Rng rng = make_rng(seed, t);
      const double th = -std::log1p(-uniform01(rng));
      double alpha = inf_alpha;
      // A budget above ell_inf is never reached, so the run is unchanged.
      if (th < out.ell_inf) {
        local[u] = th;
        alpha = fractional_ledger(run_balance_fractional(inst, local, g, delta), g).alpha[u];
      }
      parts[b].add({alpha});
    }
  });
  Moments total(1);
  for (const Moments& p : parts) total.merge(p);
  out.mc_mean = total.mean[0];
  out.mc_se = std::sqrt(total.c[0] / (total.count - 1.0) / total.count);
  out.residual = std::fabs(out.mc_mean - out.exact);
  return out;
}

BetaBound verify_balance_beta_bound(const Instance& inst, int u, const std::vector<int>& s,
                                    const std::vector<double>& budgets, const GainFunction& g,
                                    double tol, double delta) {
  check_subset(inst, u, s);
  require(static_cast<int>(budgets.size()) == inst.num_offline(), "one budget per offline vertex");
  const double th = budgets[u];
  std::vector<double> theta = budgets;
  theta[u] = kInf;
  BetaBound out;
  out.ell_inf = run_balance_fractional(inst, theta, g, delta).load[u];
  const DualLedger ledger = fractional_ledger(run_balance_fractional(inst, budgets, g, delta), g);
  const std::vector<double> starts = prefix_loads(inst, u, s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (th >= starts[i]) out.realized += ledger.beta[s[i]];
  }
  const double q = p_sum(inst, u, s);
  const double keep = 1.0 - g(out.ell_inf);
  const double covered = std::min(q, th) * keep;
  out.budget_covers = th >= out.ell_inf;
  if (out.budget_covers) {
    out.bound = covered;
    out.equal_bound = covered;
  } else {
    const double lost = (out.ell_inf - th) - g.integral(th, out.ell_inf);
    out.bound = std::max(0.0, covered - lost);
    out.equal_bound = std::max(0.0, std::min(q, th) - (out.ell_inf - th)) * keep;
  }
  out.holds = out.realized >= out.bound - tol;
  if (inst.has_equal_probabilities()) {
    out.holds = out.holds && out.realized >= out.equal_bound - tol;
  } else {
    out.equal_bound = 0.0;
  }
  return out;
}

RankingOutcome verify_ranking_outcome(const Instance& inst, const RandomDraw& draw, int u) {
  require(u >= 0 && u < inst.num_offline(), "offline vertex out of range");
  const Trace trace = run_ranking(inst, draw, SuccessModel::kThresholds);
  RankingOutcome out;
  for (int v = 0; v < inst.num_online(); ++v) {
    if (!trace.match[v].empty() && trace.match[v].front().u == u) out.matched.push_back(v);
  }
  const CriticalProfile profile = critical_ranks(inst, u, draw);
  std::vector<int> reachable;  // N_u(rho_u)
  for (std::size_t i = 0; i < profile.neighbors.size(); ++i) {
    if (profile.mu[i] >= draw.ranks[u]) reachable.push_back(profile.neighbors[i]);
  }
  // Number of matches after which u's threshold is reached, capped at |N|.
  std::size_t i = 0;
  double survive = 1.0;
  const double p = inst.equal_p().value_or(0.0);
  while (i < reachable.size()) {
    ++i;
    survive *= 1.0 - p;
    if (1.0 - survive >= draw.thresholds[u]) break;
  }
  out.predicted.assign(reachable.begin(), reachable.begin() + static_cast<long>(i));
  out.holds = out.predicted == out.matched;
  return out;
}

LemmaTrials run_lemma_trials(std::uint64_t trials, std::uint64_t seed) {
  const GainFunction gr = GainFunction::ranking(solve_ranking_constant().c);
  const GainFunction gb = GainFunction::balance_equal();
  const double ps[] = {0.2, 0.5, 1.0};
  LemmaTrials out;
  out.trials = trials;
  auto track = [&](double err) {
    out.alpha_invariant_max_error = std::max(out.alpha_invariant_max_error, err);
    ++out.alpha_invariant_runs;
  };
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, t);
    {
      const int m = 1 + static_cast<int>(rng() % 5);
      const int n = 1 + static_cast<int>(rng() % 6);
      const double p = ps[rng() % 3];
      const Instance inst = gen_random(m, n, 0.6, p, p, rng());
      const RandomDraw d = sample_draw(inst, rng(), DrawMode::kAll);
      if (!verify_ranking_outcome(inst, d, static_cast<int>(rng() % m)).holds) {
        ++out.ranking_outcome_violations;
      }
      const Trace r = run_ranking(inst, d);
      track(alpha_invariant_error(r, ranking_ledger(inst, r, d, gr), gr, AlphaMode::kRanking, &d));
      const Trace b = run_balance_equal(inst, d);
      track(alpha_invariant_error(b, balance_discrete_ledger(b, gb), gb, AlphaMode::kBalanceDiscrete));
    }
    {
      const int m = 1 + static_cast<int>(rng() % 3);
      const int n = 1 + static_cast<int>(rng() % 6);
      const double lo = 0.02 + 0.1 * uniform01(rng);
      const double hi = t % 2 == 1 ? lo + 0.15 : lo;
      const Instance inst = gen_random(m, n, 0.7, lo, hi, rng());
      const int u = static_cast<int>(rng() % m);
      std::vector<int> s;
      for (int v : inst.offline_neighbors(u)) {
        if (rng() % 2) s.push_back(v);
      }
      std::vector<double> budgets(m);
      for (double& x : budgets) x = -std::log1p(-uniform01(rng));
      if (t % 4 < 2) budgets[u] *= 0.3;
      if (!verify_balance_beta_bound(inst, u, s, budgets, gb, 1e-9, 1e-2).holds) {
        ++out.beta_bound_violations;
      }
      const Trace f = run_balance_fractional(inst, budgets, gb, 1e-2);
      track(alpha_invariant_error(f, fractional_ledger(f, gb), gb, AlphaMode::kBalance));
    }
  }
  return out;
}

std::string feasibility_to_json(const FeasibilityReport& report) {
  nlohmann::ordered_json j;
  j["gamma"] = round12(report.gamma);
  j["violations"] = report.violations;
  j["inconclusive"] = report.inconclusive;
  if (report.worst >= 0) {
    const PairSlack& w = report.pairs[report.worst];
    j["worst"] = {{"u", w.u}, {"mask", w.mask}, {"ratio", round12(report.worst_ratio)}};
  } else {
    j["worst"] = nullptr;
  }
  auto pairs = nlohmann::ordered_json::array();
  for (const PairSlack& ps : report.pairs) {
    nlohmann::ordered_json row;
    row["u"] = ps.u;
    row["mask"] = ps.mask;
    row["lhs"] = round12(ps.lhs);
    row["target"] = round12(ps.target);
    row["slack"] = round12(ps.slack);
    row["stderr"] = std::isfinite(ps.se) ? nlohmann::ordered_json(round12(ps.se)) : nlohmann::ordered_json(nullptr);
    row["verdict"] = to_string(ps.verdict);
    pairs.push_back(row);
  }
  j["pairs"] = pairs;
  return j.dump(2);
}

std::string feasibility_to_csv(const FeasibilityReport& report) {
  std::ostringstream os;
  os << "u,S_mask,lhs,target,slack,stderr,verdict\n";
  for (const PairSlack& ps : report.pairs) {
    os << ps.u << ',' << ps.mask << ',' << fmt(ps.lhs) << ',' << fmt(ps.target) << ','
       << fmt(ps.slack) << ',' << fmt(ps.se) << ',' << to_string(ps.verdict) << '\n';
  }
  return os.str();
}

std::string duals_to_json(const DualEstimate& est) {
  auto arr = [](const std::vector<double>& xs) {
    auto out = nlohmann::ordered_json::array();
    for (double x : xs) out.push_back(std::isfinite(x) ? nlohmann::ordered_json(round12(x)) : nlohmann::ordered_json(nullptr));
    return out;
  };
  nlohmann::ordered_json j;
  j["trials"] = est.trials;
  j["alpha"] = arr(est.alpha_mean);
  j["alpha_stderr"] = arr(est.alpha_se);
  j["beta"] = arr(est.beta_mean);
  j["beta_stderr"] = arr(est.beta_se);
  j["value"] = round12(est.value_mean);
  j["value_stderr"] = std::isfinite(est.value_se) ? nlohmann::ordered_json(round12(est.value_se)) : nlohmann::ordered_json(nullptr);
  j["dual_total"] = round12(est.dual_total_mean);
  j["conservation_se"] = std::isfinite(est.conservation_se) ? nlohmann::ordered_json(round12(est.conservation_se)) : nlohmann::ordered_json(nullptr);
  return j.dump(2);
}

}  // namespace stochmatch
