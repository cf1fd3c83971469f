#include "metalens/effect_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "metalens/error.hpp"

namespace metalens {

std::string_view to_string(Scale scale) {
  return scale == Scale::RawRR ? "RawRR" : "LogRR";
}

Scale parse_scale(std::string_view text) {
  if (text == "raw" || text == "RawRR") return Scale::RawRR;
  if (text == "log" || text == "LogRR") return Scale::LogRR;
  throw DomainError("unknown scale '" + std::string(text) + "' (expected raw or log)");
}

void validate(const EffectEstimate& e) {
  const auto finite_positive = [&](double v, const char* field) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ValidationError("study " + e.id, field, "must be a finite positive number");
    }
  };
  finite_positive(e.rr, "rr");
  finite_positive(e.cl_low, "cl_low");
  finite_positive(e.cl_high, "cl_high");
  if (!(e.cl_low < e.cl_high)) {
    throw ValidationError("study " + e.id, "cl_high", "upper limit must exceed lower limit");
  }
  if (e.rr < e.cl_low || e.rr > e.cl_high) {
    throw ValidationError("study " + e.id, "rr", "risk ratio lies outside its confidence limits");
  }
  if (!(e.confidence_level > 0.0 && e.confidence_level < 1.0)) {
    throw ValidationError("study " + e.id, "confidence_level", "must lie in (0, 1)");
  }
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double z_critical(double confidence_level) {
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  // Simulation calls this per study at one fixed level.
  thread_local double cached_level = -1.0;
  thread_local double cached_value = 0.0;
  if (confidence_level == cached_level) return cached_value;

  const double target = 1.0 - (1.0 - confidence_level) / 2.0;
  double lo = 0.0;
  double hi = 40.0;
  // Bisect until the bracket stops shrinking in double precision.
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (normal_cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  cached_level = confidence_level;
  cached_value = 0.5 * (lo + hi);
  return cached_value;
}

double effect_on_scale(double rr, Scale scale) {
  if (scale == Scale::RawRR) return rr;
  if (!(rr > 0.0)) throw DomainError("log scale requires a positive risk ratio");
  return std::log(rr);
}

double se_from_ci(const EffectEstimate& e, Scale scale) {
  const double zc = z_critical(e.confidence_level);
  if (!(e.cl_high > e.cl_low)) {
    throw DomainError("upper confidence limit must exceed the lower one (study " + e.id + ")");
  }
  if (scale == Scale::RawRR) return (e.cl_high - e.cl_low) / (2.0 * zc);
  if (!(e.cl_low > 0.0 && e.cl_high > 0.0)) {
    throw DomainError("log scale requires positive confidence limits (study " + e.id + ")");
  }
  return (std::log(e.cl_high) - std::log(e.cl_low)) / (2.0 * zc);
}

double z_score(const EffectEstimate& e, double se, Scale scale) {
  if (!(se > 0.0)) throw DomainError("standard error must be positive (study " + e.id + ")");
  const double null_value = scale == Scale::RawRR ? 1.0 : 0.0;
  return (effect_on_scale(e.rr, scale) - null_value) / se;
}

double p_two_sided(double z) {
  // erfc keeps full relative precision in the far tail where 1 - Phi loses it.
  const double p = std::erfc(std::fabs(z) / std::numbers::sqrt2);
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

std::vector<PValueRecord> derive_records(std::span<const EffectEstimate> studies, Scale scale,
                                         double confidence_level) {
  if (studies.empty()) throw DomainError("derive_records needs at least one study");
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }

  std::vector<PValueRecord> records;
  records.reserve(studies.size());
  for (const auto& source : studies) {
    EffectEstimate e = source;
    e.confidence_level = confidence_level;
    validate(e);
    PValueRecord r;
    r.id = e.id;
    r.se = se_from_ci(e, scale);
    r.z = z_score(e, r.se, scale);
    r.p = p_two_sided(r.z);
    records.push_back(std::move(r));
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].p < records[b].p; });
  for (std::size_t r = 0; r < order.size(); ++r) records[order[r]].rank = static_cast<int>(r + 1);
  return records;
}

}  // namespace metalens
