#include "simul.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common.hpp"
#include "format.hpp"
#include "json.hpp"

namespace stochmatch {

double Trace::total_gain() const {
  double s = 0.0;
  for (const auto& row : match) {
    for (const Assignment& a : row) s += a.gain;
  }
  return s;
}

double DualLedger::total() const {
  double s = 0.0;
  for (double a : alpha) s += a;
  for (double b : beta) s += b;
  return s;
}

namespace {

void check_draw(const Instance& inst, const RandomDraw& draw, SuccessModel model) {
  require(static_cast<int>(draw.ranks.size()) == inst.num_offline(), "draw has no ranks for this instance");
  if (model == SuccessModel::kCoins) {
    require(draw.has_coins() && draw.n == inst.num_online() &&
                draw.coins.size() == static_cast<std::size_t>(inst.num_offline()) * inst.num_online(),
            "draw has no coins for this instance");
  } else {
    require(static_cast<int>(draw.thresholds.size()) == inst.num_offline(),
            "draw has no thresholds for this instance");
  }
}

// Shared loop of the integral algorithms. `choose(v, loads, alive)` picks an
// unsuccessful neighbor or returns -1. Offline vertex `removed` is invisible.
template <typename Choose>
Trace run_integral(const Instance& inst, const RandomDraw& draw, SuccessModel model, int removed,
                   Choose&& choose) {
  check_draw(inst, draw, model);
  const int m = inst.num_offline();
  const int n = inst.num_online();
  Trace trace;
  trace.match.assign(n, {});
  trace.load.assign(m, 0.0);
  trace.success_at.assign(m, -1);
  std::vector<double> survive(m, 1.0);  // prod of (1 - p) over matches
  std::vector<int> candidates;
  for (int v = 0; v < n; ++v) {
    candidates.clear();
    for (int u : inst.online_neighbors(v)) {
      if (u != removed && trace.success_at[u] < 0) candidates.push_back(u);
    }
    if (candidates.empty()) continue;
    const int u = choose(v, trace.load, candidates);
    if (u < 0) continue;
    const double p = inst.prob(u, v);
    Assignment a{u, 1.0, p, trace.load[u], false};
    trace.load[u] += p;
    if (model == SuccessModel::kCoins) {
      a.success = draw.coin(u, v);
    } else {
      survive[u] *= 1.0 - p;
      a.success = 1.0 - survive[u] >= draw.thresholds[u];
    }
    if (a.success) {
      trace.success_at[u] = v;
      trace.value += 1.0;
    }
    trace.match[v].push_back(a);
  }
  return trace;
}

int min_rank(const RandomDraw& draw, const std::vector<int>& candidates) {
  int best = candidates.front();
  for (int u : candidates) {
    if (draw.ranks[u] < draw.ranks[best]) best = u;
  }
  return best;
}

}  // namespace

Trace run_ranking(const Instance& inst, const RandomDraw& draw, SuccessModel model) {
  require(inst.has_equal_probabilities(), "Ranking requires equal success probabilities");
  return run_integral(inst, draw, model, -1, [&](int, const std::vector<double>&, const std::vector<int>& c) {
    return min_rank(draw, c);
  });
}

CriticalProfile critical_ranks(const Instance& inst, int u, const RandomDraw& draw) {
  require(u >= 0 && u < inst.num_offline(), "offline vertex out of range");
  require(inst.has_equal_probabilities(), "Ranking requires equal success probabilities");
  const Trace trace = run_integral(inst, draw, SuccessModel::kThresholds, u,
                                   [&](int, const std::vector<double>&, const std::vector<int>& c) {
                                     return min_rank(draw, c);
                                   });
  CriticalProfile profile;
  profile.u = u;
  for (int v : inst.offline_neighbors(u)) {
    profile.neighbors.push_back(v);
    profile.mu.push_back(trace.match[v].empty() ? 1.0 : draw.ranks[trace.match[v].front().u]);
    profile.in_s.push_back(false);
  }
  return profile;
}

Trace run_balance_equal(const Instance& inst, const RandomDraw& draw, SuccessModel model) {
  require(inst.has_equal_probabilities(), "Balance for equal probabilities requires equal p");
  return run_integral(inst, draw, model, -1,
                      [](int, const std::vector<double>& load, const std::vector<int>& c) {
                        int best = c.front();
                        for (int u : c) {
                          if (load[u] < load[best]) best = u;
                        }
                        return best;
                      });
}

Trace run_greedy(const Instance& inst, const RandomDraw& draw, SuccessModel model) {
  return run_integral(inst, draw, model, -1,
                      [&](int v, const std::vector<double>&, const std::vector<int>& c) {
                        int best = c.front();
                        for (int u : c) {
                          if (inst.prob(u, v) > inst.prob(best, v)) best = u;
                        }
                        return best;
                      });
}

Trace run_balance_fractional(const Instance& inst, const std::vector<double>& budgets,
                             const GainFunction& g, double delta) {
  const int m = inst.num_offline();
  const int n = inst.num_online();
  require(static_cast<int>(budgets.size()) == m, "one budget per offline vertex is required");
  for (double b : budgets) require(b >= 0.0, "budgets must be nonnegative");
  require(g.domain() == GainDomain::kLoad, "fractional Balance needs a load-domain g");
  if (delta <= 0.0) {
    require(delta == 0.0, "chunk size must be positive");
    delta = inst.num_edges() > 0 ? 1e-3 * inst.min_positive_prob() : 1.0;
  }
  require(std::isfinite(delta), "chunk size must be finite");

  Trace trace;
  trace.match.assign(n, {});
  trace.load.assign(m, 0.0);
  trace.success_at.assign(m, -1);
  for (int v = 0; v < n; ++v) {
    const auto& nbrs = inst.online_neighbors(v);
    auto& row = trace.match[v];
    double remaining = 1.0;
    while (remaining > 1e-12) {
      int best = -1;
      double best_score = -1.0;
      for (int u : nbrs) {
        if (trace.load[u] >= budgets[u]) continue;
        const double score = inst.prob(u, v) * (1.0 - g(trace.load[u]));
        if (score > best_score) {
          best_score = score;
          best = u;
        }
      }
      if (best < 0) break;
      const double p = inst.prob(best, v);
      // Run of whole chunks that all go to `best`: its score only falls as
      // its load grows and the other scores are fixed meanwhile.
      double beat_lo = -1.0;  // must be exceeded (smaller ids win ties)
      double beat_hi = -1.0;  // must be matched
      for (int u : nbrs) {
        if (u == best || trace.load[u] >= budgets[u]) continue;
        const double score = inst.prob(u, v) * (1.0 - g(trace.load[u]));
        if (u < best) {
          beat_lo = std::max(beat_lo, score);
        } else {
          beat_hi = std::max(beat_hi, score);
        }
      }
      const double step = delta * p;
      const double start = trace.load[best];
      const double whole = std::floor(remaining / delta);
      auto takes = [&](double j) {
        if (j + 1.0 > whole || start + (j + 1.0) * step >= budgets[best]) return false;
        const double score = p * (1.0 - g(start + j * step));
        return score > beat_lo && score >= beat_hi;
      };
      double run = 0.0;  // chunks 0..run-1 are taken
      if (takes(0.0)) {
        double hi = 1.0;
        while (takes(hi)) {
          run = hi + 1.0;
          hi *= 2.0;
        }
        if (run == 0.0) run = 1.0;
        // takes(run - 1) holds and takes(hi) fails.
        while (hi - run > 0.0) {
          const double mid = std::floor((run + hi) / 2.0);
          if (takes(mid)) {
            run = mid + 1.0;
          } else {
            hi = mid;
          }
        }
      }
      if (run >= 2.0) {
        if (row.empty() || row.back().u != best) {
          row.push_back({best, 0.0, 0.0, start, false});
        }
        row.back().fraction += run * delta;
        row.back().gain += run * step;
        remaining -= run * delta;
        trace.load[best] = start + run * step;
        continue;
      }
      double x = std::min(delta, remaining);
      double gain = x * p;
      bool crossed = false;
      if (trace.load[best] + gain >= budgets[best]) {
        gain = budgets[best] - trace.load[best];
        x = std::min(gain / p, remaining);
        crossed = true;
      }
      if (row.empty() || row.back().u != best) {
        row.push_back({best, 0.0, 0.0, trace.load[best], false});
      }
      row.back().fraction += x;
      row.back().gain += gain;
      remaining -= x;
      if (crossed) {
        trace.load[best] = budgets[best];
        trace.success_at[best] = v;
        row.back().success = true;
      } else {
        trace.load[best] += gain;
      }
    }
  }
  for (int u = 0; u < m; ++u) trace.value += std::min(trace.load[u], budgets[u]);
  return trace;
}

DualLedger ranking_ledger(const Instance& inst, const Trace& trace, const RandomDraw& draw,
                          const GainFunction& g) {
  require(g.domain() == GainDomain::kRank, "Ranking ledger needs a rank-domain g");
  require(static_cast<int>(draw.ranks.size()) == trace.num_offline(), "draw does not match trace");
  (void)inst;
  DualLedger ledger;
  ledger.alpha.assign(trace.num_offline(), 0.0);
  ledger.beta.assign(trace.num_online(), 0.0);
  for (int v = 0; v < trace.num_online(); ++v) {
    for (const Assignment& a : trace.match[v]) {
      const double share = g(draw.ranks[a.u]);
      ledger.alpha[a.u] += a.gain * share;
      ledger.beta[v] += a.gain * (1.0 - share);
    }
  }
  return ledger;
}

DualLedger balance_discrete_ledger(const Trace& trace, const GainFunction& g) {
  require(g.domain() == GainDomain::kLoad, "Balance ledger needs a load-domain g");
  DualLedger ledger;
  ledger.alpha.assign(trace.num_offline(), 0.0);
  ledger.beta.assign(trace.num_online(), 0.0);
  for (int v = 0; v < trace.num_online(); ++v) {
    for (const Assignment& a : trace.match[v]) {
      const double share = g(a.load_before);
      ledger.alpha[a.u] += a.gain * share;
      ledger.beta[v] += a.gain * (1.0 - share);
    }
  }
  return ledger;
}

DualLedger fractional_ledger(const Trace& trace, const GainFunction& g) {
  require(g.domain() == GainDomain::kLoad, "Balance ledger needs a load-domain g");
  DualLedger ledger;
  ledger.alpha.assign(trace.num_offline(), 0.0);
  ledger.beta.assign(trace.num_online(), 0.0);
  for (int v = 0; v < trace.num_online(); ++v) {
    for (const Assignment& a : trace.match[v]) {
      const double share = g.integral(a.load_before, a.load_before + a.gain);
      ledger.alpha[a.u] += share;
      ledger.beta[v] += a.gain - share;
    }
  }
  return ledger;
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream os;
  os << "step,matched_u,fraction,success_flag\n";
  for (int v = 0; v < trace.num_online(); ++v) {
    if (trace.match[v].empty()) {
      os << v << ",-1,0,0\n";
      continue;
    }
    for (const Assignment& a : trace.match[v]) {
      os << v << ',' << a.u << ',' << fmt(a.fraction) << ',' << (a.success ? 1 : 0) << '\n';
    }
  }
  os << "value,,," << fmt(trace.value) << '\n';
  return os.str();
}

std::string trace_to_json(const Trace& trace) {
  auto steps = nlohmann::ordered_json::array();
  auto row = [&](int v, int u, double fraction, bool success) {
    nlohmann::ordered_json r;
    r["step"] = v;
    r["matched_u"] = u;
    r["fraction"] = round12(fraction);
    r["success"] = success;
    steps.push_back(std::move(r));
  };
  for (int v = 0; v < trace.num_online(); ++v) {
    if (trace.match[v].empty()) row(v, -1, 0.0, false);
    for (const Assignment& a : trace.match[v]) row(v, a.u, a.fraction, a.success);
  }
  nlohmann::ordered_json j;
  j["value"] = round12(trace.value);
  j["steps"] = std::move(steps);
  return j.dump(2);
}

}  // namespace stochmatch
