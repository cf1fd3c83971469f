#include "metalens/segmented_fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "metalens/error.hpp"

namespace metalens {

namespace {

// Residual sum of squares of y regressed on an intercept plus the given
// centred regressors (one or two columns), computed from explicit residuals.
double rss_line(std::span<const double> y, double y_mean, std::span<const double> xc) {
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxx += xc[i] * xc[i];
    sxy += xc[i] * (y[i] - y_mean);
  }
  const double b = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = (y[i] - y_mean) - b * xc[i];
    rss += r * r;
  }
  return rss;
}

double rss_hinge(std::span<const double> y, double y_mean, std::span<const double> xc,
                 std::span<const double> hc) {
  double sxx = 0.0, sxh = 0.0, shh = 0.0, sxy = 0.0, shy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yc = y[i] - y_mean;
    sxx += xc[i] * xc[i];
    sxh += xc[i] * hc[i];
    shh += hc[i] * hc[i];
    sxy += xc[i] * yc;
    shy += hc[i] * yc;
  }
  const double det = sxx * shh - sxh * sxh;
  const double b = (sxy * shh - shy * sxh) / det;
  const double c = (shy * sxx - sxy * sxh) / det;
  double rss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = (y[i] - y_mean) - b * xc[i] - c * hc[i];
    rss += r * r;
  }
  return rss;
}

}  // namespace

SegmentedFit fit_two_segment(std::span<const double> y) {
  const std::size_t k = y.size();
  if (k < 3) throw DomainError("two-segment fit needs at least 3 points");

  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(k);

  const double x_mean = (static_cast<double>(k) + 1.0) / 2.0;
  std::vector<double> xc(k);
  for (std::size_t i = 0; i < k; ++i) xc[i] = static_cast<double>(i + 1) - x_mean;

  SegmentedFit fit;
  for (double v : y) fit.total_ss += (v - y_mean) * (v - y_mean);
  fit.rss_one_segment = rss_line(y, y_mean, xc);
  fit.rss_two_segment = fit.rss_one_segment;
  fit.split_rank = 0;

  std::vector<double> hc(k);
  for (std::size_t s = 2; s <= k - 1; ++s) {
    double h_mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double x = static_cast<double>(i + 1);
      hc[i] = std::max(0.0, x - static_cast<double>(s));
      h_mean += hc[i];
    }
    h_mean /= static_cast<double>(k);
    for (double& h : hc) h -= h_mean;
    const double rss = rss_hinge(y, y_mean, xc, hc);
    if (fit.split_rank == 0 || rss < fit.rss_two_segment) {
      fit.rss_two_segment = std::min(rss, fit.rss_one_segment);
      fit.split_rank = static_cast<int>(s);
    }
  }
  return fit;
}

}  // namespace metalens
