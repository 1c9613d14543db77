#include "instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "common.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace stochmatch {

double Instance::min_positive_prob() const {
  double best = kInf;
  for (double p : prob_) {
    if (p > 0.0) best = std::min(best, p);
  }
  return best;
}

std::vector<Edge> Instance::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (int u = 0; u < m_; ++u) {
    for (int v : offline_adj_[u]) out.push_back({u, v, prob(u, v)});
  }
  return out;
}

Instance build_instance(int m, int n, std::span<const Edge> probs) {
  require(m >= 0 && n >= 0, "instance dimensions must be nonnegative");
  Instance inst;
  inst.m_ = m;
  inst.n_ = n;
  inst.prob_.assign(static_cast<std::size_t>(m) * n, 0.0);
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : probs) {
    require(e.u >= 0 && e.u < m, "offline index out of range: " + std::to_string(e.u));
    require(e.v >= 0 && e.v < n, "online index out of range: " + std::to_string(e.v));
    require(std::isfinite(e.p) && e.p >= 0.0 && e.p <= 1.0,
            "probability out of range [0,1]: " + std::to_string(e.p));
    require(seen.emplace(e.u, e.v).second, "duplicate edge (" + std::to_string(e.u) + "," +
                                               std::to_string(e.v) + ")");
    inst.prob_[static_cast<std::size_t>(e.u) * n + e.v] = e.p;
  }
  inst.offline_adj_.assign(m, {});
  inst.online_adj_.assign(n, {});
  std::optional<double> common;
  bool equal = true;
  for (int u = 0; u < m; ++u) {
    for (int v = 0; v < n; ++v) {
      const double p = inst.prob(u, v);
      if (p <= 0.0) continue;
      inst.offline_adj_[u].push_back(v);
      inst.online_adj_[v].push_back(u);
      ++inst.num_edges_;
      if (!common) {
        common = p;
      } else if (*common != p) {
        equal = false;
      }
    }
  }
  if (equal) inst.equal_p_ = common;
  return inst;
}

Instance gen_upper_triangular(int k, double p) {
  require(k >= 1, "upper-triangular family needs k >= 1");
  require(p > 0.0 && p <= 1.0, "upper-triangular family needs p in (0,1]");
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) edges.push_back({i, j, p});
  }
  return build_instance(k, k, edges);
}

Instance gen_random(int m, int n, double density, double p_low, double p_high,
                    std::uint64_t seed) {
  require(m >= 0 && n >= 0, "instance dimensions must be nonnegative");
  require(density >= 0.0 && density <= 1.0, "density must lie in [0,1]");
  require(p_low >= 0.0 && p_low <= p_high && p_high <= 1.0,
          "need 0 <= p_low <= p_high <= 1");
  Rng rng = make_rng(seed);
  std::vector<Edge> edges;
  for (int u = 0; u < m; ++u) {
    for (int v = 0; v < n; ++v) {
      const bool present = uniform01(rng) < density;
      const double p = p_low + (p_high - p_low) * uniform01(rng);
      if (present && p > 0.0) edges.push_back({u, v, p});
    }
  }
  return build_instance(m, n, edges);
}

double p_sum(const Instance& inst, int u, std::span<const int> s) {
  double total = 0.0;
  for (int v : s) total += inst.prob(u, v);
  return total;
}

double p_bar(const Instance& inst, int u, std::span<const int> s) {
  return std::min(p_sum(inst, u, s), 1.0);
}

double p_tilde(const Instance& inst, int u, std::span<const int> s) {
  double fail = 1.0;
  for (int v : s) fail *= 1.0 - inst.prob(u, v);
  return 1.0 - fail;
}

RandomDraw sample_draw(const Instance& inst, std::uint64_t seed, DrawMode mode) {
  const int m = inst.num_offline();
  const int n = inst.num_online();
  RandomDraw draw;
  draw.n = n;

  // Independent substreams keep e.g. the ranks identical across draw modes.
  Rng rank_rng = make_rng(seed, 0);
  draw.ranks.resize(m);
  for (;;) {
    for (double& r : draw.ranks) r = uniform01(rank_rng);
    std::vector<double> sorted = draw.ranks;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
  }

  const bool want_thresholds =
      mode == DrawMode::kThresholds || mode == DrawMode::kBudgets || mode == DrawMode::kAll;
  const bool want_budgets = mode == DrawMode::kBudgets || mode == DrawMode::kAll;
  if (want_thresholds) {
    Rng rng = make_rng(seed, 1);
    draw.thresholds.resize(m);
    for (double& t : draw.thresholds) t = uniform01(rng);
    if (want_budgets) {
      draw.budgets.resize(m);
      for (int u = 0; u < m; ++u) draw.budgets[u] = -std::log1p(-draw.thresholds[u]);
    }
  }
  if (mode == DrawMode::kCoins || mode == DrawMode::kAll) {
    Rng rng = make_rng(seed, 2);
    draw.coins.assign(static_cast<std::size_t>(m) * n, 0);
    for (int u = 0; u < m; ++u) {
      for (int v = 0; v < n; ++v) {
        const double p = inst.prob(u, v);
        const double x = uniform01(rng);
        if (p > 0.0 && x < p) draw.coins[static_cast<std::size_t>(u) * n + v] = 1;
      }
    }
  }
  return draw;
}

std::string instance_to_json(const Instance& inst) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["m"] = inst.num_offline();
  j["n"] = inst.num_online();
  if (auto p = inst.equal_p()) {
    j["equal_p"] = *p;
  } else {
    j["equal_p"] = nullptr;
  }
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : inst.edges()) edges.push_back({e.u, e.v, e.p});
  j["edges"] = std::move(edges);
  return j.dump();
}

Instance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed instance file: ") + e.what());
  }
  auto parse_fail = [](const std::string& what) { fail(ErrorCode::kParse, what); };
  if (!j.is_object()) parse_fail("instance file must be a JSON object");
  static const std::set<std::string> kKeys = {"version", "m", "n", "equal_p", "edges"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) parse_fail("unexpected key in instance file: " + key);
  }
  for (const auto& key : kKeys) {
    if (!j.contains(key)) parse_fail("missing \"" + key + "\" field");
  }
  if (!j["version"].is_number_integer() || j["version"].get<int>() != 1) {
    parse_fail("unsupported instance schema version");
  }
  if (!j["m"].is_number_integer() || !j["n"].is_number_integer()) {
    parse_fail("\"m\" and \"n\" must be integers");
  }
  if (!j["edges"].is_array()) parse_fail("\"edges\" must be an array");
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number()) {
      parse_fail("each edge must be [u, v, p]");
    }
    edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const auto& a = edges[i - 1];
    const auto& b = edges[i];
    if (std::pair(a.u, a.v) >= std::pair(b.u, b.v)) parse_fail("edges must be sorted by (u, v)");
  }
  Instance inst = build_instance(j["m"].get<int>(), j["n"].get<int>(), edges);
  std::optional<double> declared;
  if (!j["equal_p"].is_null()) {
    if (!j["equal_p"].is_number()) parse_fail("\"equal_p\" must be a number or null");
    declared = j["equal_p"].get<double>();
  }
  if (declared != inst.equal_p()) {
    fail(ErrorCode::kInvalidArgument, "\"equal_p\" is inconsistent with the edge probabilities");
  }
  return inst;
}

Instance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void write_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << instance_to_json(inst) << "\n";
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace stochmatch
