#pragma once

// Reference computations for tests. Each one takes a different route from
// the library code it checks: quadrature instead of erfc, brute-force step
// functions instead of the sorted-gap formula, naive sums instead of
// log-space series, dense normal equations instead of centred solves.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline double normal_density(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

inline double simpson(double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-15) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), tol, 40);
}

/// Phi(x) as 1/2 plus the signed integral of the density from 0 to x.
inline double normal_cdf(double x) {
  if (x >= 0.0) return 0.5 + integrate(normal_density, 0.0, x);
  return 0.5 - integrate(normal_density, x, 0.0);
}

/// Bisection on the quadrature CDF.
inline double z_critical(double level) {
  const double target = 1.0 - (1.0 - level) / 2.0;
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// sup_t |F_n(t) - t| by evaluating the empirical CDF (counting, no sort)
/// and its left limit at every sample point, plus the endpoints.
inline double ks_statistic_brute(std::span<const double> u) {
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  std::vector<double> probes(u.begin(), u.end());
  probes.push_back(0.0);
  probes.push_back(1.0);
  for (double t : probes) {
    double at_or_below = 0.0, strictly_below = 0.0;
    for (double v : u) {
      if (v <= t) at_or_below += 1.0;
      if (v < t) strictly_below += 1.0;
    }
    d = std::max({d, std::fabs(at_or_below / n - t), std::fabs(strictly_below / n - t)});
  }
  return d;
}

/// Kolmogorov survival function via the Jacobi-theta dual series
/// 1 - sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2)).
inline double kolmogorov_sf_theta(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double sum = 0.0;
  for (int j = 1; j < 200; ++j) {
    const double odd = 2.0 * j - 1.0;
    sum += std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
  }
  return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
}

/// exp(-x/2) * sum_{j<df/2} (x/2)^j / j!, term by term.
inline double chi_square_sf_direct(double x, int df) {
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < df / 2; ++j) {
    term *= (x / 2.0) / j;
    sum += term;
  }
  return std::exp(-x / 2.0) * sum;
}

/// -2 sum ln p.
inline double fisher_statistic(std::span<const double> p) {
  double x = 0.0;
  for (double v : p) x += -2.0 * std::log(v);
  return x;
}

struct WeightedPool {
  double pooled;
  double se;
  double q;
};

/// Inverse-variance pooling written as plain spreadsheet columns.
inline WeightedPool inverse_variance(std::span<const double> x, std::span<const double> se,
                                     double tau2 = 0.0) {
  std::vector<double> w(x.size());
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    w[i] = 1.0 / (se[i] * se[i] + tau2);
    sw += w[i];
    swx += w[i] * x[i];
  }
  const double pooled = swx / sw;
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    q += (x[i] - pooled) * (x[i] - pooled) / (se[i] * se[i]);
  }
  return {pooled, 1.0 / std::sqrt(sw), q};
}

/// RSS of least squares on arbitrary columns via dense normal equations and
/// Gaussian elimination with partial pivoting.
inline double least_squares_rss(const std::vector<std::vector<double>>& columns,
                                std::span<const double> y) {
  const std::size_t m = columns.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < y.size(); ++i) a[r][c] += columns[r][i] * columns[c][i];
    }
    for (std::size_t i = 0; i < y.size(); ++i) a[r][m] += columns[r][i] * y[i];
  }
  for (std::size_t p = 0; p < m; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < m; ++r) {
      if (std::fabs(a[r][p]) > std::fabs(a[best][p])) best = r;
    }
    std::swap(a[p], a[best]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == p) continue;
      const double f = a[r][p] / a[p][p];
      for (std::size_t c = p; c <= m; ++c) a[r][c] -= f * a[p][c];
    }
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < m; ++c) fit += a[c][m] / a[c][c] * columns[c][i];
    rss += (y[i] - fit) * (y[i] - fit);
  }
  return rss;
}

struct HingeOracle {
  double rss_one;
  double rss_two;
  int split;
};

inline HingeOracle hinge_fit(std::span<const double> y) {
  const std::size_t k = y.size();
  std::vector<double> ones(k, 1.0), x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = static_cast<double>(i + 1);
  HingeOracle out{least_squares_rss({ones, x}, y), 0.0, 0};
  out.rss_two = out.rss_one;
  for (std::size_t s = 2; s + 1 <= k; ++s) {
    std::vector<double> h(k);
    for (std::size_t i = 0; i < k; ++i) h[i] = std::max(0.0, x[i] - static_cast<double>(s));
    const double rss = least_squares_rss({ones, x, h}, y);
    if (out.split == 0 || rss < out.rss_two) {
      out.rss_two = rss;
      out.split = static_cast<int>(s);
    }
  }
  return out;
}

}  // namespace oracle
