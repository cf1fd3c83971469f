#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metalens/effect_stats.hpp"

namespace metalens {

struct PlotPoint {
  int rank = 0;
  double p = 1.0;
  std::string id;
};

struct ReferencePoint {
  int rank = 0;
  double expected = 0.0;  // uniform order statistic rank/(k+1)
};

/// Ranked p-values against the integers 1..k with the uniform reference.
struct PValuePlotModel {
  std::vector<PlotPoint> points;
  int k = 0;
  std::vector<ReferencePoint> reference;
  double alpha = 0.05;
};

PValuePlotModel build_plot(std::span<const PValueRecord> records, double alpha = 0.05);

struct KsResult {
  double statistic = 0.0;
  double p = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda).
double kolmogorov_sf(double lambda);

/// One-sample KS test of the values against Uniform(0, 1); p-value from the
/// asymptotic distribution at lambda = sqrt(n) * D. Values must lie in (0, 1].
KsResult ks_uniformity(std::span<const double> pvalues);

enum class Verdict { Uniform, Bilinear, Ambiguous };

std::string_view to_string(Verdict v);

/// Thresholds of the shape verdict.
///
/// Bilinear: at least `min_below` p-values below alpha, the p-values above
/// alpha (rescaled to (0,1)) not rejected as uniform at `component_ks_level`,
/// and the hinge fit cutting residual error below `rss_ratio` of the single
/// line. Uniform: KS on all p-values not rejected at `ks_level` and at most
/// max(1, round(uniform_below_fraction * k)) p-values below alpha.
/// Anything else is Ambiguous.
struct DiagnosisConfig {
  double ks_level = 0.05;
  double component_ks_level = 0.01;
  double rss_ratio = 0.5;
  int min_below = 2;
  double uniform_below_fraction = 0.05;
};

struct MixtureDiagnosis {
  int k = 0;
  double alpha = 0.05;
  int n_below_alpha = 0;
  int n_above_alpha = 0;
  KsResult ks_all;
  KsResult ks_above_alpha;  // D = 0, p = 1 when no p-value exceeds alpha
  double rss_one_segment = 0.0;
  double rss_two_segment = 0.0;
  int split_rank = 0;
  Verdict verdict = Verdict::Ambiguous;
  DiagnosisConfig config;
};

/// Requires k >= 4.
MixtureDiagnosis bilinear_diagnosis(const PValuePlotModel& plot, const DiagnosisConfig& config = {});

/// Standalone 640x480 SVG 1.1 document. Byte-deterministic.
std::string render_svg(const PValuePlotModel& plot, const MixtureDiagnosis* diagnosis,
                       std::string_view title);

/// `rank,p_value,uniform_reference` with LF endings.
std::string render_csv(const PValuePlotModel& plot);

struct PlotCsvRow {
  int rank = 0;
  double p = 0.0;
  double reference = 0.0;
};

/// Inverse of render_csv.
std::vector<PlotCsvRow> parse_plot_csv(std::string_view text);

}  // namespace metalens
