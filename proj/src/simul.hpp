#pragma once

// The online algorithms, run on one realization of randomness, and the
// gain-splitting dual ledgers built on top of their traces.

#include <string>
#include <vector>

#include "critical_profile.hpp"
#include "gain_function.hpp"
#include "instance.hpp"

namespace stochmatch {

// Which part of a RandomDraw decides success of integral matches. Both give
// the same outcome distribution (see instance.hpp); thresholds make the run a
// function of per-vertex randomness only, which the Ranking outcome lemma
// needs when comparing a run against the run with one vertex removed.
enum class SuccessModel { kCoins, kThresholds };

struct Assignment {
  int u = -1;
  double fraction = 0.0;   // share of the online vertex
  double gain = 0.0;       // fraction * p_uv, capped at the budget
  double load_before = 0.0;
  bool success = false;    // this assignment made u successful
};

struct Trace {
  // Per online vertex, in arrival order; empty when unmatched. Integral
  // algorithms record at most one assignment of fraction 1.
  std::vector<std::vector<Assignment>> match;
  std::vector<double> load;
  std::vector<int> success_at;  // online step, or -1
  double value = 0.0;

  int num_offline() const { return static_cast<int>(load.size()); }
  int num_online() const { return static_cast<int>(match.size()); }
  // Sum of x p over all assignments.
  double total_gain() const;
};

struct DualLedger {
  std::vector<double> alpha;
  std::vector<double> beta;
  double total() const;
};

// Minimum-rank unsuccessful neighbor. Requires equal probabilities.
Trace run_ranking(const Instance& inst, const RandomDraw& draw,
                  SuccessModel model = SuccessModel::kCoins);

// Ranking with offline vertex u removed, threshold success; mu_v is the rank
// of the vertex each neighbor of u is matched to there, or 1.
CriticalProfile critical_ranks(const Instance& inst, int u, const RandomDraw& draw);

// Smallest-load unsuccessful neighbor, ties by smallest id. Requires equal
// probabilities.
Trace run_balance_equal(const Instance& inst, const RandomDraw& draw,
                        SuccessModel model = SuccessModel::kCoins);

// Largest p_uv among unsuccessful neighbors, ties by smallest id.
Trace run_greedy(const Instance& inst, const RandomDraw& draw,
                 SuccessModel model = SuccessModel::kCoins);

// Water-filling in chunks of delta of each online vertex: every chunk goes to
// the u with ell_u < theta_u maximizing p_uv (1 - g(ell_u)), ties by smallest
// id. A chunk that would cross theta_u is cut at the budget and u becomes
// successful. Chunks for the same (v, u) are merged in the trace. delta = 0
// selects 1e-3 * min p; a negative delta is rejected.
Trace run_balance_fractional(const Instance& inst, const std::vector<double>& budgets,
                             const GainFunction& g, double delta = 0.0);

// alpha_u += p g(rho_u), beta_v = p (1 - g(rho_u)).
DualLedger ranking_ledger(const Instance& inst, const Trace& trace, const RandomDraw& draw,
                          const GainFunction& g);
// alpha_u += p g(ell_u) at the pre-match load; beta_v gets the rest.
DualLedger balance_discrete_ledger(const Trace& trace, const GainFunction& g);
// alpha_u += G(ell + gain) - G(ell) per assignment; beta_v gets the rest. This
// is the continuous split of the fractional process, so alpha_u = G(ell_u).
DualLedger fractional_ledger(const Trace& trace, const GainFunction& g);

// One row per assignment (one row with matched_u = -1 for an unmatched
// vertex), then a summary row carrying the value.
std::string trace_to_csv(const Trace& trace);
// {"value", "steps": [{"step", "matched_u", "fraction", "success"}, ...]}, same rows.
std::string trace_to_json(const Trace& trace);

}  // namespace stochmatch
