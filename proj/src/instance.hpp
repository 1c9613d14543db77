#pragma once

// Problem instances of online matching with stochastic rewards, and the
// realizations of randomness the algorithms consume.
//
// Offline vertices are 0..m-1; online vertices are 0..n-1 and arrive in id
// order. A probability of 0 encodes a non-edge.
//
// Success randomness comes in two interchangeable forms. In the threshold
// model each offline u draws tau_u ~ U[0,1] and succeeds as soon as the set S
// matched to it satisfies p~_uS = 1 - prod_{v in S}(1 - p_uv) >= tau_u. Given
// that u is still unsuccessful after S, i.e. tau_u > p~_uS, the next match v
// makes it succeed with probability
//   (p~_{u,S+v} - p~_uS) / (1 - p~_uS) = p_uv,
// independently of everything else. So drawing an independent Bernoulli(p_uv)
// coin per edge induces the same outcome distribution for every online
// algorithm. Budgets theta_u = -ln(1 - tau_u) ~ Exp(1) are the same
// randomness seen on the load scale.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stochmatch {

struct Edge {
  int u = 0;
  int v = 0;
  double p = 0.0;
};

class Instance {
 public:
  Instance() = default;

  int num_offline() const { return m_; }
  int num_online() const { return n_; }

  double prob(int u, int v) const { return prob_[static_cast<std::size_t>(u) * n_ + v]; }

  // Set when every nonzero probability equals one common value.
  std::optional<double> equal_p() const { return equal_p_; }
  // True for equal-probability instances, including the empty graph.
  bool has_equal_probabilities() const { return equal_p_.has_value() || num_edges_ == 0; }

  // Neighbors of an offline vertex, in arrival order.
  const std::vector<int>& offline_neighbors(int u) const { return offline_adj_[u]; }
  // Neighbors of an online vertex, by ascending offline id.
  const std::vector<int>& online_neighbors(int v) const { return online_adj_[v]; }

  int num_edges() const { return num_edges_; }
  double min_positive_prob() const;

  // Edges with p > 0, sorted by (u, v).
  std::vector<Edge> edges() const;

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.m_ == b.m_ && a.n_ == b.n_ && a.prob_ == b.prob_ && a.equal_p_ == b.equal_p_;
  }

 private:
  friend Instance build_instance(int m, int n, std::span<const Edge> probs);

  int m_ = 0;
  int n_ = 0;
  int num_edges_ = 0;
  std::vector<double> prob_;
  std::optional<double> equal_p_;
  std::vector<std::vector<int>> offline_adj_;
  std::vector<std::vector<int>> online_adj_;
};

// Dense instance from a sparse list; unlisted pairs are non-edges. Duplicate
// pairs are rejected.
Instance build_instance(int m, int n, std::span<const Edge> probs);

// Offline vertex i is adjacent to the first i+1 arrivals, all with prob p.
Instance gen_upper_triangular(int k, double p);

// Each pair is an edge with probability `density`; edge probabilities are
// uniform on [p_low, p_high].
Instance gen_random(int m, int n, double density, double p_low, double p_high,
                    std::uint64_t seed);

// p_uS = sum_{v in S} p_uv.
double p_sum(const Instance& inst, int u, std::span<const int> s);
// min{p_uS, 1}.
double p_bar(const Instance& inst, int u, std::span<const int> s);
// 1 - prod_{v in S}(1 - p_uv).
double p_tilde(const Instance& inst, int u, std::span<const int> s);

enum class DrawMode { kThresholds, kBudgets, kCoins, kAll };

// One realization of the model and algorithm randomness. Ranks are always
// populated; the other fields depend on the draw mode and are empty otherwise.
struct RandomDraw {
  std::vector<double> ranks;
  std::vector<double> thresholds;
  std::vector<double> budgets;
  // Row-major m x n success indicators.
  std::vector<std::uint8_t> coins;
  int n = 0;

  bool has_coins() const { return !coins.empty(); }
  bool coin(int u, int v) const { return coins[static_cast<std::size_t>(u) * n + v] != 0; }
};

RandomDraw sample_draw(const Instance& inst, std::uint64_t seed, DrawMode mode);

// JSON instance files: {"version":1,"m":..,"n":..,"equal_p":..,"edges":[[u,v,p],..]}.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
Instance read_instance(const std::string& path);
void write_instance(const Instance& inst, const std::string& path);

}  // namespace stochmatch
