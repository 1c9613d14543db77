#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace stochmatch::quad {

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction. The interval is pre-split into
// `pieces` panels so that narrow features are not missed by the first probe.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-10, int pieces = 8,
                        int max_depth = 50) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  const double h = (b - a) / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double lo = a + k * h;
    const double hi = (k + 1 == pieces) ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / pieces, max_depth);
  }
  return total;
}

// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Fixed-order Gauss-Legendre rule on [a, b].
template <typename F>
double gauss_legendre_integral(const F& f, double a, double b,
                               const std::pair<std::vector<double>, std::vector<double>>& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.first.size(); ++i) s += rule.second[i] * f(mid + half * rule.first[i]);
  return s * half;
}

}  // namespace stochmatch::quad
