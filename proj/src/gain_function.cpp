#include "gain_function.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "common.hpp"
#include "gainfn.hpp"
#include "quadrature.hpp"

namespace stochmatch {

namespace {

constexpr double kE = std::numbers::e;

// Smallest rank at which the ranking closed form reaches its 1 - 1/e cap.
double ranking_cap_start(double c) {
  const double rho = (kE - c * kE / (kE - 1.0)) / (kE - 1.0);
  return std::clamp(rho, 0.0, 1.0);
}

// G for the equal-probability balance function, tabulated on a 1/32 grid
// with a 10-point Gauss-Legendre rule per cell and on the partial cell.
class BalanceEqualIntegral {
 public:
  static const BalanceEqualIntegral& get() {
    static const BalanceEqualIntegral table;
    return table;
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    const double pos = x / kWidth;
    std::size_t k = std::min(static_cast<std::size_t>(pos), cumulative_.size() - 1);
    double start = k * kWidth;
    double total = cumulative_[k];
    // Past the table, walk unit cells.
    while (x - start > kWidth) {
      total += cell(start, start + kWidth);
      start += kWidth;
    }
    return total + cell(start, x);
  }

 private:
  static constexpr double kWidth = 1.0 / 32.0;
  static constexpr std::size_t kCells = 64 * 32;

  BalanceEqualIntegral() : rule_(quad::gauss_legendre(10)) {
    cumulative_.resize(kCells + 1);
    cumulative_[0] = 0.0;
    for (std::size_t k = 0; k < kCells; ++k) {
      cumulative_[k + 1] = cumulative_[k] + cell(k * kWidth, (k + 1) * kWidth);
    }
  }

  double cell(double a, double b) const {
    if (!(b > a)) return 0.0;
    return quad::gauss_legendre_integral([](double t) { return g_balance_equal(t); }, a, b, rule_);
  }

  std::pair<std::vector<double>, std::vector<double>> rule_;
  std::vector<double> cumulative_;
};

}  // namespace

GainFunction GainFunction::ranking(double c) {
  require(std::isfinite(c) && c > 0.0, "ranking gain constant must be positive");
  GainFunction g(GainKind::kRanking, GainDomain::kRank);
  g.c_ = c;
  return g;
}

GainFunction GainFunction::ranking_stochastic() {
  return GainFunction(GainKind::kRankingStochastic, GainDomain::kRank);
}

GainFunction GainFunction::balance_equal() {
  return GainFunction(GainKind::kBalanceEqual, GainDomain::kLoad);
}

GainFunction GainFunction::step(std::vector<double> grid, std::vector<double> values,
                                GainDomain domain) {
  require(!grid.empty() && grid.size() == values.size(),
          "step function needs matching nonempty grid and values");
  require(grid.front() == 0.0, "step function grid must start at 0");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(std::isfinite(grid[i]) && std::isfinite(values[i]), "step function must be finite");
    require(values[i] >= 0.0 && values[i] <= 1.0, "step function values must lie in [0,1]");
    if (i > 0) {
      require(grid[i] > grid[i - 1], "step function grid must be increasing");
      require(values[i] >= values[i - 1], "step function must be non-decreasing");
    }
  }
  GainFunction g(GainKind::kStep, domain);
  g.grid_ = std::move(grid);
  g.values_ = std::move(values);
  return g;
}

GainFunction GainFunction::constant(double value, GainDomain domain) {
  return step({0.0}, {value}, domain);
}

void GainFunction::check_domain(double x) const {
  if (domain_ == GainDomain::kRank) {
    require(x >= 0.0 && x <= 1.0, "rank-domain gain function evaluated outside [0,1]");
  } else {
    require(x >= 0.0, "load-domain gain function evaluated at a negative load");
  }
}

std::size_t GainFunction::cell_of(double x) const {
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  return static_cast<std::size_t>(it - grid_.begin()) - 1;
}

double GainFunction::operator()(double x) const {
  check_domain(x);
  switch (kind_) {
    case GainKind::kRanking:
      return g_ranking(x, c_);
    case GainKind::kRankingStochastic:
      return g_ranking_stochastic(x);
    case GainKind::kBalanceEqual:
      return g_balance_equal(x);
    case GainKind::kStep:
      return values_[cell_of(x)];
  }
  return 0.0;
}

double GainFunction::integral(double a, double b) const {
  if (!(b > a)) return 0.0;
  check_domain(a);
  check_domain(b);
  switch (kind_) {
    case GainKind::kRanking: {
      const double knee = ranking_cap_start(c_);
      const double cap = 1.0 - 1.0 / kE;
      double total = 0.0;
      const double lo = std::min(a, knee);
      const double hi = std::min(b, knee);
      if (hi > lo) {
        total += c_ / (kE - 1.0) * std::log((kE - (kE - 1.0) * lo) / (kE - (kE - 1.0) * hi));
      }
      const double clo = std::max(a, knee);
      if (b > clo) total += cap * (b - clo);
      return total;
    }
    case GainKind::kRankingStochastic:
      return std::exp(b - 1.0) - std::exp(a - 1.0);
    case GainKind::kBalanceEqual: {
      const auto& G = BalanceEqualIntegral::get();
      return G(b) - G(a);
    }
    case GainKind::kStep: {
      double total = 0.0;
      for (std::size_t i = cell_of(a); i < grid_.size(); ++i) {
        const double lo = std::max(a, grid_[i]);
        const double hi = (i + 1 < grid_.size()) ? std::min(b, grid_[i + 1]) : b;
        if (hi > lo) total += values_[i] * (hi - lo);
        if (i + 1 < grid_.size() && grid_[i + 1] >= b) break;
      }
      return total;
    }
  }
  return 0.0;
}

double GainFunction::exp_weighted_integral(double a, double b) const {
  if (!(b > a)) return 0.0;
  check_domain(a);
  if (kind_ == GainKind::kStep) {
    double total = 0.0;
    for (std::size_t i = cell_of(a); i < grid_.size(); ++i) {
      const double lo = std::max(a, grid_[i]);
      const double hi = (i + 1 < grid_.size()) ? std::min(b, grid_[i + 1]) : b;
      if (hi > lo) total += values_[i] * (std::exp(-lo) - std::exp(-hi));
      if (i + 1 < grid_.size() && grid_[i + 1] >= b) break;
    }
    return total;
  }
  if (kind_ == GainKind::kRanking) {
    // Split at the kink so Simpson only sees smooth pieces; drop the point at 1.
    const double knee = ranking_cap_start(c_);
    auto f = [this](double z) { return std::exp(-z) * g_ranking(std::min(z, std::nextafter(1.0, 0.0)), c_); };
    double total = 0.0;
    if (knee > a) total += quad::adaptive_simpson(f, a, std::min(b, knee), 1e-13);
    if (b > knee) total += quad::adaptive_simpson(f, std::max(a, knee), b, 1e-13);
    return total;
  }
  auto f = [this](double z) { return std::exp(-z) * (*this)(z); };
  return quad::adaptive_simpson(f, a, b, 1e-13);
}

void GainFunction::validate(double step, double scan_end) const {
  const double end = domain_ == GainDomain::kRank ? 1.0 : scan_end;
  double prev = -1.0;
  const auto count = static_cast<long>(std::ceil(end / step));
  for (long k = 0; k <= count; ++k) {
    const double x = std::min(k * step, end);
    const double y = (*this)(x);
    if (!(y >= 0.0 && y <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "gain function leaves [0,1] at " + std::to_string(x));
    }
    if (y < prev) {
      fail(ErrorCode::kInvalidArgument, "gain function decreases at " + std::to_string(x));
    }
    prev = y;
  }
}

std::string GainFunction::describe() const {
  switch (kind_) {
    case GainKind::kRanking: {
      std::ostringstream os;
      os.precision(12);
      os << "ranking(c=" << c_ << ")";
      return os.str();
    }
    case GainKind::kRankingStochastic:
      return "ranking_stochastic";
    case GainKind::kBalanceEqual:
      return "balance_equal";
    case GainKind::kStep:
      return "step(" + std::to_string(grid_.size()) + " cells)";
  }
  return "";
}

}  // namespace stochmatch
