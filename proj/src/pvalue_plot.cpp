#include "metalens/pvalue_plot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "metalens/csv.hpp"
#include "metalens/error.hpp"
#include "metalens/format.hpp"
#include "metalens/segmented_fit.hpp"

namespace metalens {

PValuePlotModel build_plot(std::span<const PValueRecord> records, double alpha) {
  if (records.empty()) throw DomainError("p-value plot needs at least one record");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");

  const int k = static_cast<int>(records.size());
  std::set<int> seen;
  for (const auto& r : records) {
    if (r.rank < 1 || r.rank > k) {
      throw DomainError("rank " + std::to_string(r.rank) + " of study " + r.id +
                        " outside 1.." + std::to_string(k));
    }
    if (!seen.insert(r.rank).second) {
      throw DomainError("duplicate rank " + std::to_string(r.rank));
    }
  }

  PValuePlotModel plot;
  plot.k = k;
  plot.alpha = alpha;
  plot.points.reserve(records.size());
  for (const auto& r : records) plot.points.push_back({r.rank, r.p, r.id});
  std::sort(plot.points.begin(), plot.points.end(),
            [](const PlotPoint& a, const PlotPoint& b) { return a.rank < b.rank; });
  for (std::size_t i = 1; i < plot.points.size(); ++i) {
    if (plot.points[i].p < plot.points[i - 1].p) {
      throw DomainError("ranks are not in ascending p-value order");
    }
  }

  plot.reference.reserve(records.size());
  for (int i = 1; i <= k; ++i) {
    plot.reference.push_back({i, static_cast<double>(i) / static_cast<double>(k + 1)});
  }
  return plot;
}

double kolmogorov_sf(double lambda) {
  // Below 0.05 the survival probability differs from 1 by less than 1e-200,
  // and the alternating series would take thousands of terms to settle.
  if (lambda < 0.05) return 1.0;
  double sum = 0.0;
  for (int j = 1; j < 100000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniformity(std::span<const double> pvalues) {
  if (pvalues.empty()) throw DomainError("KS test needs at least one value");
  std::vector<double> u(pvalues.begin(), pvalues.end());
  for (double v : u) {
    if (!(v > 0.0 && v <= 1.0)) throw DomainError("KS uniformity values must lie in (0, 1]");
  }
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double upper = static_cast<double>(i + 1) / n - u[i];
    const double lower = u[i] - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Uniform:
      return "Uniform";
    case Verdict::Bilinear:
      return "Bilinear";
    case Verdict::Ambiguous:
      break;
  }
  return "Ambiguous";
}

MixtureDiagnosis bilinear_diagnosis(const PValuePlotModel& plot, const DiagnosisConfig& config) {
  if (plot.k < 4 || static_cast<int>(plot.points.size()) != plot.k) {
    throw DomainError("diagnosis needs at least 4 points (got " + std::to_string(plot.k) + ")");
  }

  MixtureDiagnosis d;
  d.k = plot.k;
  d.alpha = plot.alpha;
  d.config = config;

  std::vector<double> all;
  std::vector<double> above;
  all.reserve(plot.points.size());
  for (const auto& pt : plot.points) {
    all.push_back(pt.p);
    if (pt.p < plot.alpha) ++d.n_below_alpha;
    if (pt.p > plot.alpha) above.push_back((pt.p - plot.alpha) / (1.0 - plot.alpha));
  }
  d.n_above_alpha = static_cast<int>(above.size());
  d.ks_all = ks_uniformity(all);
  d.ks_above_alpha = above.empty() ? KsResult{0.0, 1.0} : ks_uniformity(above);

  const SegmentedFit fit = fit_two_segment(all);
  d.rss_one_segment = fit.rss_one_segment;
  d.rss_two_segment = fit.rss_two_segment;
  d.split_rank = fit.split_rank;

  const bool line_has_error = fit.rss_one_segment > 1e-12 * fit.total_ss;
  const bool bilinear = d.n_below_alpha >= config.min_below &&
                        d.ks_above_alpha.p >= config.component_ks_level && line_has_error &&
                        d.rss_two_segment < config.rss_ratio * d.rss_one_segment;
  const int uniform_allowance =
      std::max(1, static_cast<int>(std::lround(config.uniform_below_fraction * plot.k)));
  const bool uniform = d.ks_all.p >= config.ks_level && d.n_below_alpha <= uniform_allowance;

  if (bilinear) {
    d.verdict = Verdict::Bilinear;
  } else if (uniform) {
    d.verdict = Verdict::Uniform;
  } else {
    d.verdict = Verdict::Ambiguous;
  }
  return d;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 0.1 * kWidth;
constexpr double kRight = 0.9 * kWidth;
constexpr double kTop = 0.1 * kHeight;
constexpr double kBottom = 0.9 * kHeight;

std::string num(double v) { return fmt::significant(v, 6); }

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Frame {
  int k;
  double x(double rank) const { return kLeft + rank / (k + 1.0) * (kRight - kLeft); }
  double y(double p) const { return kBottom - p * (kBottom - kTop); }
};

std::string line(std::string_view cls, double x1, double y1, double x2, double y2,
                 std::string_view style) {
  return "<line class=\"" + std::string(cls) + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
         "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" " + std::string(style) + "/>\n";
}

std::string text(std::string_view cls, double x, double y, std::string_view anchor,
                 std::string_view size, std::string_view body) {
  return "<text class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
         "\" text-anchor=\"" + std::string(anchor) + "\" font-size=\"" + std::string(size) +
         "\">" + xml_escape(body) + "</text>\n";
}

}  // namespace

std::string render_svg(const PValuePlotModel& plot, const MixtureDiagnosis* diagnosis,
                       std::string_view title) {
  const Frame f{plot.k};
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\" font-family=\"sans-serif\">\n";
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  if (!title.empty()) s += text("title", kWidth / 2, kTop / 2 + 6, "middle", "16", title);

  s += line("x-axis", kLeft, kBottom, kRight, kBottom, "stroke=\"black\" stroke-width=\"1\"");
  s += line("y-axis", kLeft, kBottom, kLeft, kTop, "stroke=\"black\" stroke-width=\"1\"");

  const int step = std::max(1, (plot.k + 19) / 20);
  for (int r = 1; r <= plot.k; r += step) {
    s += line("x-tick", f.x(r), kBottom, f.x(r), kBottom + 5, "stroke=\"black\"");
    s += text("x-tick-label", f.x(r), kBottom + 18, "middle", "11", std::to_string(r));
  }
  for (int i = 0; i <= 5; ++i) {
    const double p = i / 5.0;
    s += line("y-tick", kLeft - 5, f.y(p), kLeft, f.y(p), "stroke=\"black\"");
    s += text("y-tick-label", kLeft - 8, f.y(p) + 4, "end", "11", fmt::fixed(p, 1));
  }
  s += text("x-label", kWidth / 2, kHeight - 12, "middle", "13", "Rank");
  s += "<text class=\"y-label\" x=\"16\" y=\"" + num(kHeight / 2) +
       "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
       num(kHeight / 2) + ")\">p-value</text>\n";

  if (!plot.reference.empty()) {
    const auto& a = plot.reference.front();
    const auto& b = plot.reference.back();
    s += line("reference", f.x(a.rank), f.y(a.expected), f.x(b.rank), f.y(b.expected),
              "stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"6,4\"");
  }
  s += line("alpha", kLeft, f.y(plot.alpha), kRight, f.y(plot.alpha),
            "stroke=\"firebrick\" stroke-width=\"1\"");
  s += text("alpha-label", kRight, f.y(plot.alpha) - 4, "end", "11",
            "alpha = " + fmt::significant(plot.alpha, 6));

  s += "<g class=\"points\" fill=\"steelblue\" stroke=\"black\" stroke-width=\"0.5\">\n";
  for (const auto& pt : plot.points) {
    s += "<circle class=\"point\" cx=\"" + num(f.x(pt.rank)) + "\" cy=\"" + num(f.y(pt.p)) +
         "\" r=\"4\"><title>" + xml_escape(pt.id) + " p=" + num(pt.p) + "</title></circle>\n";
  }
  s += "</g>\n";

  if (diagnosis != nullptr) {
    s += text("verdict", kLeft + 8, kTop + 16, "start", "12",
              "verdict: " + std::string(to_string(diagnosis->verdict)) + " (" +
                  std::to_string(diagnosis->n_below_alpha) + " of " +
                  std::to_string(diagnosis->k) + " below alpha)");
  }
  s += "</svg>\n";
  return s;
}

std::string render_csv(const PValuePlotModel& plot) {
  std::string out = "rank,p_value,uniform_reference\n";
  for (std::size_t i = 0; i < plot.points.size(); ++i) {
    out += std::to_string(plot.points[i].rank) + "," + fmt::significant(plot.points[i].p, 6) +
           "," + fmt::fixed(plot.reference[i].expected, 6) + "\n";
  }
  return out;
}

std::vector<PlotCsvRow> parse_plot_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows.front().fields !=
                          std::vector<std::string>{"rank", "p_value", "uniform_reference"}) {
    throw ValidationError("line 1", "header", "expected rank,p_value,uniform_reference");
  }
  std::vector<PlotCsvRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "line " + std::to_string(r.line);
    if (r.fields.size() != 3) throw ValidationError(where, "", "expected 3 fields");
    const auto rank = csv::to_integer(r.fields[0]);
    const auto p = csv::to_double(r.fields[1]);
    const auto ref = csv::to_double(r.fields[2]);
    if (!rank) throw ValidationError(where, "rank", "not an integer");
    if (!p) throw ValidationError(where, "p_value", "not a number");
    if (!ref) throw ValidationError(where, "uniform_reference", "not a number");
    out.push_back({static_cast<int>(*rank), *p, *ref});
  }
  return out;
}

}  // namespace metalens
