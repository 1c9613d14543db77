#include "gainfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "common.hpp"
#include "format.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace stochmatch {

namespace {

constexpr double kE = std::numbers::e;
constexpr double kCap = 1.0 - 1.0 / kE;
constexpr double kLn2 = std::numbers::ln2;

// f as a function of s = sqrt(mu); smooth on [0, 1].
double f_of_sqrt(double s) {
  if (s == 0.0) return 1.0;
  return 2.0 * (2.0 - s) * -std::log1p(-0.5 * s) / s - 1.0;
}

// e^{-a} - e^{-b} for a <= b without cancellation.
double exp_diff(double a, double b) {
  if (!std::isfinite(b)) return std::exp(-a);
  return -std::exp(-a) * std::expm1(-(b - a));
}

nlohmann::json rounded(const std::vector<double>& xs) {
  auto out = nlohmann::json::array();
  for (double x : xs) out.push_back(round12(x));
  return out;
}

}  // namespace

double g_ranking(double rho, double c) {
  require(rho >= 0.0 && rho <= 1.0, "g_ranking: rank outside [0,1]");
  if (rho == 1.0) return 1.0;
  return std::min(c / (kE - (kE - 1.0) * rho), kCap);
}

RankingConstant solve_ranking_constant() {
  auto F = [](double c) {
    return GainFunction::ranking(c).integral(0.0, 1.0) - (1.0 - c / kE);
  };
  double lo = 1.0;
  double hi = kE;
  double flo = F(lo);
  double fhi = F(hi);
  if (!(flo < 0.0 && fhi > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "ranking constant: bisection bracket [1, e] has no sign change");
  }
  RankingConstant out;
  double mid = 0.5 * (lo + hi);
  double fmid = F(mid);
  while (std::fabs(fmid) > 1e-12 && hi - lo > 1e-15) {
    if (fmid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    mid = 0.5 * (lo + hi);
    fmid = F(mid);
    ++out.iterations;
  }
  out.c = mid;
  out.gamma = 1.0 - mid / kE;
  out.residual = fmid;

  // c / (e - (e-1) rho) is increasing in rho.
  double a = 0.0;
  double b = 1.0;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    if (mid / (kE - (kE - 1.0) * m) >= kCap) {
      b = m;
    } else {
      a = m;
    }
  }
  out.mu_low = b;
  return out;
}

double g_ranking_stochastic(double x) {
  require(x >= 0.0 && x <= 1.0, "g_ranking_stochastic: argument outside [0,1]");
  return std::exp(x - 1.0);
}

double star_constant(double mu) {
  require(mu >= 0.0 && mu <= 1.0, "star_constant: mu outside [0,1]");
  const double integral =
      quad::adaptive_simpson([](double r) { return std::exp(r - 1.0); }, 0.0, mu, 1e-15);
  return integral + 1.0 - std::exp(mu - 1.0);
}

double f_balance_equal(double mu) {
  require(mu >= 0.0 && mu <= 1.0, "f_balance_equal: mu outside [0,1]");
  return f_of_sqrt(std::sqrt(mu));
}

double g_balance_equal(double theta) {
  require(theta >= 0.0, "g_balance_equal: negative load");
  return f_of_sqrt(std::exp(-0.5 * theta));
}

double balance_equal_gamma() { return 2.0 * (1.0 - kLn2); }

double balance_equal_ode_residual(double lambda) {
  require(lambda >= 0.0 && lambda <= 1.0, "lambda outside [0,1]");
  // integral_lambda^1 f(mu) dmu with mu = s^2.
  const double s0 = std::sqrt(lambda);
  const double integral =
      quad::adaptive_simpson([](double s) { return 2.0 * s * f_of_sqrt(s); }, s0, 1.0, 1e-14);
  const double lhs = integral + (2.0 * s0 - lambda) * (1.0 - f_of_sqrt(s0));
  return std::fabs(lhs - balance_equal_gamma());
}

double verify_balance_equal_ode(int grid_size) {
  require(grid_size >= 2, "ODE check needs at least 2 grid points");
  double worst = 0.0;
  for (int k = 0; k < grid_size; ++k) {
    const double lambda = static_cast<double>(k) / (grid_size - 1);
    worst = std::max(worst, balance_equal_ode_residual(lambda));
  }
  return worst;
}

double balance_equal_inequality_lhs(double l, double q, const GainFunction& g) {
  require(l >= 0.0 && q >= 0.0, "balance_equal_inequality_lhs: negative input");
  require(g.domain() == GainDomain::kLoad, "balance inequality needs a load-domain g");
  auto weight = [l, q](double t) {
    const double v = std::min(q, t) - std::max(0.0, l - t);
    return v > 0.0 ? v * std::exp(-t) : 0.0;
  };
  // The integrand is piecewise smooth with kinks at these points; past the
  // last one it is q e^{-t} (or t e^{-t} for q = inf), integrated exactly.
  std::vector<double> knots = {0.0, l, 0.5 * l};
  if (std::isfinite(q)) {
    knots.push_back(q);
    if (l - q > 0.0) knots.push_back(l - q);
  }
  std::sort(knots.begin(), knots.end());
  double second = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    second += quad::adaptive_simpson(weight, knots[i], knots[i + 1], 1e-14);
  }
  const double b = knots.back();
  second += std::isfinite(q) ? q * std::exp(-b) : (b + 1.0) * std::exp(-b);
  return g.exp_weighted_integral(0.0, l) + second * (1.0 - g(l));
}

double balance_general_lhs(double l, const GainFunction& g, double h) {
  require(g.domain() == GainDomain::kLoad, "balance inequality needs a load-domain g");
  require(l >= 0.0, "balance_general_lhs: negative load");
  require(h >= 0.0 && h <= l * (1.0 + 1e-12) + 1e-15, "balance_general_lhs: h outside [0, l]");
  h = std::min(h, l);
  const double first = g.exp_weighted_integral(0.0, l);
  const double eh = std::exp(-h);
  // integral_h^l (e^{-h} - e^{-z})(1 - g(z)) dz, expanded into integrals of g.
  const double middle = eh * ((l - h) - g.integral(h, l)) - (exp_diff(h, l) - g.exp_weighted_integral(h, l));
  const double last = (1.0 + h) * eh * (1.0 - g(l));
  return first - middle + last;
}

std::vector<double> update_h(const GainFunction& g, const std::vector<double>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double l : points) {
    const double gl = g(l);
    const double Gl = g.cumulative(l);
    auto phi = [&](double h) { return h * (1.0 - gl) - ((l - h) - (Gl - g.cumulative(h))); };
    if (phi(0.0) >= 0.0) {
      out.push_back(0.0);
      continue;
    }
    double lo = 0.0;
    double hi = l;
    while (hi - lo > 1e-12 * std::max(1.0, l)) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) >= 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.push_back(hi);
  }
  return out;
}

std::vector<double> uniform_grid(double step, double lmax) {
  require(step > 0.0 && lmax > 0.0, "grid step and lmax must be positive");
  const long cells = std::lround(lmax / step);
  require(cells >= 1 && std::fabs(cells * step - lmax) <= 1e-9 * lmax,
          "lmax must be a multiple of the grid step");
  require(cells <= 100000, "grid too fine");
  std::vector<double> grid(cells + 1);
  for (long j = 0; j <= cells; ++j) grid[j] = j * step;
  return grid;
}

std::vector<double> check_points(const std::vector<double>& grid) {
  std::vector<double> points = grid;
  for (int k = 1; k <= 20; ++k) points.push_back(grid.back() + 0.5 * k);
  return points;
}

GainLpResult optimize_g_given_h(const std::vector<double>& grid,
                                const std::vector<double>& points,
                                const std::vector<double>& h) {
  require(points.size() == h.size(), "one h value per check point is required");
  require(!grid.empty() && grid.front() == 0.0, "grid must start at 0");
  const int cells = static_cast<int>(grid.size());
  lp::LpProblem problem;
  for (int i = 0; i < cells; ++i) problem.add_variable(0.0, 0.0, 1.0);
  const int gamma_var = problem.add_variable(1.0, 0.0);

  std::vector<double> a(cells);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double l = points[j];
    const double hj = h[j];
    require(hj >= 0.0 && hj <= l, "h outside [0, l]");
    std::fill(a.begin(), a.end(), 0.0);
    double constant = 0.0;
    for (int i = 0; i < cells && grid[i] < l; ++i) {
      const double hi = i + 1 < cells ? std::min(grid[i + 1], l) : l;
      a[i] += exp_diff(grid[i], hi);
      const double lo2 = std::max(grid[i], hj);
      if (hi > lo2) {
        const double w = std::exp(-hj) * (hi - lo2) - exp_diff(lo2, hi);
        constant -= w;
        a[i] += w;
      }
    }
    const int k = static_cast<int>(std::upper_bound(grid.begin(), grid.end(), l) - grid.begin()) - 1;
    const double t = (1.0 + hj) * std::exp(-hj);
    constant += t;
    a[k] -= t;
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < cells; ++i) {
      if (a[i] != 0.0) row.emplace_back(i, -a[i]);
    }
    row.emplace_back(gamma_var, 1.0);
    problem.add_row(std::move(row), lp::Sense::kLe, constant);
  }
  for (int i = 0; i + 1 < cells; ++i) {
    problem.add_row({{i, 1.0}, {i + 1, -1.0}}, lp::Sense::kLe, 0.0);
  }

  const lp::LpSolution sol = lp::solve(problem);
  if (sol.status != lp::Status::kOptimal) {
    fail(ErrorCode::kLpFailure, "gain LP is " + lp::to_string(sol.status));
  }
  std::vector<double> values(sol.x.begin(), sol.x.begin() + cells);
  double running = 0.0;
  for (double& v : values) {
    v = std::clamp(v, running, 1.0);
    running = v;
  }
  GainLpResult out;
  out.g = GainFunction::step(grid, std::move(values), GainDomain::kLoad);
  out.gamma = sol.x[gamma_var];
  out.iterations = sol.iterations;
  out.duality_gap = sol.duality_gap;
  out.primal_residual = sol.primal_residual;
  return out;
}

AltOptState alternate_optimize(double step, double lmax, int rounds) {
  require(rounds >= 1, "alternating optimization needs at least one round");
  AltOptState state;
  state.step = step;
  state.lmax = lmax;
  state.grid = uniform_grid(step, lmax);
  state.points = check_points(state.grid);
  state.h.assign(state.points.size(), 0.0);
  for (int r = 1; r <= rounds; ++r) {
    if (r > 1) state.h = update_h(state.g, state.points);
    GainLpResult res = optimize_g_given_h(state.grid, state.points, state.h);
    state.g = std::move(res.g);
    state.gamma = res.gamma;
    state.round = r;
    state.gamma_history.push_back(res.gamma);
    state.max_duality_gap = std::max(state.max_duality_gap, res.duality_gap);
  }
  double worst = kInf;
  for (std::size_t j = 0; j < state.points.size(); ++j) {
    worst = std::min(worst, balance_general_lhs(state.points[j], state.g, state.h[j]) - state.gamma);
  }
  state.min_slack = worst;
  return state;
}

double ranking_bound_eval(const CriticalProfile& profile, double p, const GainFunction& g) {
  const std::size_t k = profile.neighbors.size();
  require(profile.mu.size() == k && profile.in_s.size() == k, "malformed critical profile");
  require(p >= 0.0 && p <= 1.0, "probability outside [0,1]");
  require(g.domain() == GainDomain::kRank, "ranking bound needs a rank-domain g");
  if (k == 0) return 0.0;
  for (double mu : profile.mu) require(mu >= 0.0 && mu <= 1.0, "critical rank outside [0,1]");

  std::vector<double> knots = profile.mu;
  knots.push_back(0.0);
  knots.push_back(1.0);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const double fail_one = -std::expm1(-p);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (profile.in_s[i]) total += p * (1.0 - g(profile.mu[i]));
  }
  // On (a, b) between consecutive knots, mu_v >= rho iff mu_v >= b.
  for (std::size_t t = 0; t + 1 < knots.size(); ++t) {
    const double a = knots[t];
    const double b = knots[t + 1];
    const double gint = g.integral(a, b);
    int count = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (profile.in_s[i] && profile.mu[i] >= b) {
        // `count` neighbors in N(rho) arrive before this one.
        const double coef = std::exp(-p * count) * fail_one;
        total += coef * (g(profile.mu[i]) * (b - a) - gint);
      }
      if (profile.mu[i] >= b) ++count;
    }
    total += -std::expm1(-p * count) * gint;
  }
  return total;
}

double ranking_final_inequality(double mu0, double rho0, double c) {
  require(mu0 >= 0.0 && mu0 < rho0 && rho0 <= 1.0, "need 0 <= mu0 < rho0 <= 1");
  const double g_rho = g_ranking(rho0, c);
  return GainFunction::ranking(c).integral(0.0, mu0) + (1.0 - g_rho) + kCap * (rho0 - mu0) * g_rho;
}

double ranking_final_inequality_min(int res, double c) {
  require(res >= 1, "grid resolution must be positive");
  double best = kInf;
  for (int i = 0; i < res; ++i) {
    for (int j = i + 1; j <= res; ++j) {
      best = std::min(best, ranking_final_inequality(static_cast<double>(i) / res,
                                                     static_cast<double>(j) / res, c));
    }
  }
  return best;
}

double f_discrete(double mu0, const std::vector<double>& mu, double p, double c) {
  const std::size_t n = mu.size();
  require(n >= 1, "f_discrete needs at least one critical rank");
  require(std::fabs(static_cast<double>(n) * p - 1.0) <= 1e-9, "f_discrete requires n p = 1");
  require(mu0 >= 0.0 && mu0 <= mu[0], "f_discrete requires mu0 <= mu_1");
  for (std::size_t i = 0; i < n; ++i) {
    require(mu[i] <= 1.0, "critical rank above 1");
    if (i > 0) require(mu[i] >= mu[i - 1], "critical ranks must be sorted");
  }
  double total = GainFunction::ranking(c).integral(0.0, mu0);
  std::vector<double> gv(n);
  for (std::size_t i = 0; i < n; ++i) {
    gv[i] = g_ranking(mu[i], c);
    total += p * (1.0 - gv[i]);
  }
  // tail = sum_{i >= j} p e^{-p(i-j)} g(mu_i), accumulated from the back.
  const double decay = std::exp(-p);
  double tail = 0.0;
  double b = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    tail = p * gv[j] + decay * tail;
    const double prev = j == 0 ? mu0 : mu[j - 1];
    b += (mu[j] - prev) * tail;
  }
  return total + b;
}

BruteMinResult brute_min_f(int n, int res, double mu0, double c, int jobs) {
  require(n >= 1 && n <= 5, "brute_min_f supports 1 <= n <= 5");
  require(res >= 2, "grid needs at least two points");
  require(mu0 >= 0.0 && mu0 <= 1.0, "mu0 outside [0,1]");
  const double cell = 1.0 / (res - 1);
  std::vector<double> pts;
  for (int k = 0; k < res; ++k) {
    const double x = k * cell;
    if (x >= mu0 - 1e-12) pts.push_back(std::max(x, mu0));
  }
  const int K = static_cast<int>(pts.size());
  const double p = 1.0 / n;
  const double mu_low = solve_ranking_constant().mu_low;

  struct Partial {
    double min_value = kInf;
    std::vector<int> argmin;
    double lipschitz = 0.0;
    long evaluated = 0;
  };
  // One block per first index; the rest of the vector is enumerated inside.
  std::vector<Partial> parts(K);
  parallel_blocks(K, jobs, [&](std::size_t first) {
    Partial& part = parts[first];
    std::vector<int> idx(n, static_cast<int>(first));
    std::vector<double> mu(n);
    auto eval = [&](const std::vector<int>& ix) {
      for (int i = 0; i < n; ++i) mu[i] = pts[ix[i]];
      return f_discrete(mu0, mu, p, c);
    };
    for (;;) {
      const double f = eval(idx);
      ++part.evaluated;
      if (f < part.min_value) {
        part.min_value = f;
        part.argmin = idx;
      }
      for (int i = 0; i < n; ++i) {
        if (idx[i] + 1 >= K || (i + 1 < n && idx[i] + 1 > idx[i + 1])) continue;
        std::vector<int> next = idx;
        ++next[i];
        const double step = pts[next[i]] - pts[idx[i]];
        part.lipschitz = std::max(part.lipschitz, std::fabs(eval(next) - f) / step);
      }
      // Next non-decreasing tail with idx[0] fixed.
      int pos = n - 1;
      while (pos >= 1 && idx[pos] == K - 1) --pos;
      if (pos < 1) break;
      ++idx[pos];
      for (int i = pos + 1; i < n; ++i) idx[i] = idx[pos];
    }
  });

  BruteMinResult out;
  out.cell = cell;
  out.min_value = kInf;
  std::vector<int> best;
  for (const Partial& part : parts) {
    out.evaluated += part.evaluated;
    out.lipschitz = std::max(out.lipschitz, part.lipschitz);
    if (part.min_value < out.min_value) {
      out.min_value = part.min_value;
      best = part.argmin;
    }
  }
  for (int i : best) out.argmin.push_back(pts[i]);
  const auto [lo, hi] = std::minmax_element(out.argmin.begin(), out.argmin.end());
  out.all_equal = *hi - *lo <= cell + 1e-12;
  bool near_low = true;
  bool near_one = true;
  for (double x : out.argmin) {
    near_low = near_low && std::fabs(x - mu_low) <= cell + 1e-12;
    near_one = near_one && std::fabs(x - 1.0) <= cell + 1e-12;
  }
  out.at_mu_low_or_one = out.all_equal && (near_low || near_one);
  out.slack = n * out.lipschitz * cell / 2.0;
  return out;
}

std::string gain_to_json(const GainFunction& g, double gamma) {
  nlohmann::ordered_json j;
  switch (g.kind()) {
    case GainKind::kRanking:
      j["kind"] = "ranking";
      j["c"] = round12(g.parameter());
      break;
    case GainKind::kRankingStochastic:
      j["kind"] = "ranking_stochastic";
      break;
    case GainKind::kBalanceEqual:
      j["kind"] = "balance_equal";
      break;
    case GainKind::kStep:
      j["kind"] = "step";
      break;
  }
  j["domain"] = g.domain() == GainDomain::kRank ? "rank" : "load";
  j["grid"] = rounded(g.grid());
  j["values"] = rounded(g.values());
  j["gamma"] = round12(gamma);
  return j.dump(2);
}

std::string alt_opt_to_json(const AltOptState& state) {
  nlohmann::ordered_json j;
  j["kind"] = "step";
  j["domain"] = "load";
  j["step"] = round12(state.step);
  j["lmax"] = round12(state.lmax);
  j["rounds"] = state.round;
  j["grid"] = rounded(state.grid);
  j["values"] = rounded(state.g.values());
  j["points"] = rounded(state.points);
  j["h"] = rounded(state.h);
  j["gamma"] = round12(state.gamma);
  j["gamma_history"] = rounded(state.gamma_history);
  j["min_slack"] = round12(state.min_slack);
  return j.dump(2);
}

std::string alt_opt_slack_csv(const AltOptState& state) {
  std::ostringstream os;
  os << "ell,h,g,lhs,slack\n";
  for (std::size_t j = 0; j < state.points.size(); ++j) {
    const double l = state.points[j];
    const double lhs = balance_general_lhs(l, state.g, state.h[j]);
    os << fmt(l) << ',' << fmt(state.h[j]) << ',' << fmt(state.g(l)) << ',' << fmt(lhs) << ','
       << fmt(lhs - state.gamma) << '\n';
  }
  return os.str();
}

}  // namespace stochmatch
