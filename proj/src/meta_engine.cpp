#include "metalens/meta_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metalens/error.hpp"
#include "metalens/format.hpp"

namespace metalens {

std::string_view to_string(MetaMethod m) {
  switch (m) {
    case MetaMethod::FixedEffect:
      return "FixedEffect";
    case MetaMethod::RandomEffectsDL:
      return "RandomEffectsDL";
    case MetaMethod::FisherCombined:
      break;
  }
  return "FisherCombined";
}

std::vector<StudyEffect> study_effects(std::span<const EffectEstimate> studies,
                                       std::span<const PValueRecord> records, Scale scale) {
  if (studies.size() != records.size()) {
    throw DomainError("study and record counts differ");
  }
  std::vector<StudyEffect> out;
  out.reserve(studies.size());
  for (std::size_t i = 0; i < studies.size(); ++i) {
    out.push_back({studies[i].id, effect_on_scale(studies[i].rr, scale), records[i].se,
                   records[i].p});
  }
  return out;
}

namespace {

double null_value(Scale scale) { return scale == Scale::RawRR ? 1.0 : 0.0; }

void check_studies(std::span<const StudyEffect> studies) {
  for (const auto& s : studies) {
    if (!(s.se > 0.0) || !std::isfinite(s.se) || !std::isfinite(s.effect)) {
      throw DomainError("study " + s.id + " needs a finite effect and positive SE");
    }
  }
}

MetaResult inverse_variance(std::span<const StudyEffect> studies, Scale scale,
                            double confidence_level, double tau2, MetaMethod method) {
  double sw = 0.0;
  double swx = 0.0;
  for (const auto& s : studies) {
    const double w = 1.0 / (s.se * s.se + tau2);
    sw += w;
    swx += w * s.effect;
  }
  MetaResult r;
  r.method = method;
  r.scale = scale;
  r.k = static_cast<int>(studies.size());
  r.pooled = swx / sw;
  r.se = 1.0 / std::sqrt(sw);
  const double zc = z_critical(confidence_level);
  r.ci_low = r.pooled - zc * *r.se;
  r.ci_high = r.pooled + zc * *r.se;
  r.df = r.k - 1;
  r.combined_p = p_two_sided((r.pooled - null_value(scale)) / *r.se);
  return r;
}

// Cochran's Q with plain inverse-variance weights.
double cochran_q(std::span<const StudyEffect> studies, double pooled) {
  double q = 0.0;
  for (const auto& s : studies) {
    const double d = s.effect - pooled;
    q += d * d / (s.se * s.se);
  }
  return q;
}

}  // namespace

MetaResult fixed_effect(std::span<const StudyEffect> studies, Scale scale,
                        double confidence_level) {
  if (studies.empty()) throw DomainError("fixed_effect needs at least one study");
  check_studies(studies);
  MetaResult r = inverse_variance(studies, scale, confidence_level, 0.0, MetaMethod::FixedEffect);
  r.q_statistic = cochran_q(studies, r.pooled);
  return r;
}

MetaResult random_effects_dl(std::span<const StudyEffect> studies, Scale scale,
                             double confidence_level) {
  if (studies.size() < 2) throw DomainError("random_effects_dl needs at least two studies");
  check_studies(studies);
  const MetaResult fe = fixed_effect(studies, scale, confidence_level);
  double sw = 0.0;
  double sw2 = 0.0;
  for (const auto& s : studies) {
    const double w = 1.0 / (s.se * s.se);
    sw += w;
    sw2 += w * w;
  }
  const double q = *fe.q_statistic;
  const double k1 = static_cast<double>(studies.size() - 1);
  const double tau2 = std::max(0.0, (q - k1) / (sw - sw2 / sw));

  MetaResult r =
      inverse_variance(studies, scale, confidence_level, tau2, MetaMethod::RandomEffectsDL);
  r.q_statistic = q;
  r.tau2 = tau2;
  return r;
}

double chi_square_sf(double x, int df) {
  if (df <= 0 || df % 2 != 0) {
    throw DomainError("chi_square_sf supports positive even df only (got " +
                      std::to_string(df) + ")");
  }
  if (!(x >= 0.0)) throw DomainError("chi_square_sf needs x >= 0");
  if (x == 0.0) return 1.0;
  const double half = x / 2.0;
  const int terms = df / 2;
  if (half < terms - 1) {
    // Below the mode the lower Poisson tail sum_{j>=df/2} is the small
    // quantity. Summing it and subtracting keeps the result monotone in x
    // where the upper series would sit within rounding of 1.
    double log_term = -half + terms * std::log(half) - std::lgamma(terms + 1.0);
    double tail = 0.0;
    for (int j = terms; j < terms + 2000; ++j) {
      const double term = std::exp(log_term);
      tail += term;
      if (term < 1e-17 * tail) break;
      log_term += std::log(half) - std::log(j + 1.0);
    }
    return 1.0 - tail;
  }
  // exp(-x/2) * sum_{j<df/2} (x/2)^j / j!, summed in log space so large
  // statistics underflow cleanly instead of producing 0 * inf.
  std::vector<double> logs(static_cast<std::size_t>(terms));
  double log_term = -half;
  for (int j = 0; j < terms; ++j) {
    if (j > 0) log_term += std::log(half) - std::log(static_cast<double>(j));
    logs[static_cast<std::size_t>(j)] = log_term;
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - peak);
  return std::min(1.0, std::exp(peak + std::log(sum)));
}

MetaResult fishers_method(std::span<const double> pvalues) {
  if (pvalues.empty()) throw DomainError("fishers_method needs at least one p-value");
  double x = 0.0;
  for (double p : pvalues) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("Fisher's method needs p-values in (0, 1]");
    x -= 2.0 * std::log(p);
  }
  MetaResult r;
  r.method = MetaMethod::FisherCombined;
  r.k = static_cast<int>(pvalues.size());
  r.pooled = x;
  r.df = 2 * r.k;
  r.combined_p = chi_square_sf(x, *r.df);
  return r;
}

MetaResult pool(std::span<const StudyEffect> studies, Scale scale, MetaMethod method,
                double confidence_level) {
  switch (method) {
    case MetaMethod::FixedEffect:
      return fixed_effect(studies, scale, confidence_level);
    case MetaMethod::RandomEffectsDL:
      return random_effects_dl(studies, scale, confidence_level);
    case MetaMethod::FisherCombined:
      break;
  }
  std::vector<double> ps;
  ps.reserve(studies.size());
  for (const auto& s : studies) ps.push_back(s.p);
  MetaResult r = fishers_method(ps);
  r.scale = scale;
  return r;
}

namespace {

InfluenceEntry omit_one(std::span<const StudyEffect> studies, std::size_t omitted, Scale scale,
                        MetaMethod method, double confidence_level, double full_pooled) {
  std::vector<StudyEffect> rest;
  rest.reserve(studies.size() - 1);
  for (std::size_t j = 0; j < studies.size(); ++j) {
    if (j != omitted) rest.push_back(studies[j]);
  }
  const MetaResult r = pool(rest, scale, method, confidence_level);
  return {studies[omitted].id, r.pooled, r.pooled - full_pooled, r.combined_p.value_or(1.0)};
}

void sort_by_influence(std::vector<InfluenceEntry>& entries) {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(entries[a].delta) > std::fabs(entries[b].delta);
  });
  std::vector<InfluenceEntry> sorted;
  sorted.reserve(entries.size());
  for (std::size_t i : order) sorted.push_back(std::move(entries[i]));
  entries = std::move(sorted);
}

void check_loo(std::span<const StudyEffect> studies) {
  if (studies.size() < 3) throw DomainError("leave_one_out needs at least three studies");
}

}  // namespace

std::vector<InfluenceEntry> leave_one_out_reference(std::span<const StudyEffect> studies,
                                                    Scale scale, MetaMethod method,
                                                    double confidence_level) {
  check_loo(studies);
  const double full = pool(studies, scale, method, confidence_level).pooled;
  std::vector<InfluenceEntry> entries;
  entries.reserve(studies.size());
  for (std::size_t i = 0; i < studies.size(); ++i) {
    entries.push_back(omit_one(studies, i, scale, method, confidence_level, full));
  }
  sort_by_influence(entries);
  return entries;
}

std::vector<InfluenceEntry> leave_one_out(std::span<const StudyEffect> studies, Scale scale,
                                          MetaMethod method, double confidence_level) {
  check_loo(studies);
  const double full = pool(studies, scale, method, confidence_level).pooled;
  const auto n = static_cast<std::ptrdiff_t>(studies.size());
  std::vector<InfluenceEntry> entries(studies.size());
  // Each slot is written by exactly one iteration, so the merged vector is
  // independent of the schedule. Exceptions cannot cross the parallel region;
  // inputs were validated by the full pool above.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    entries[static_cast<std::size_t>(i)] =
        omit_one(studies, static_cast<std::size_t>(i), scale, method, confidence_level, full);
  }
  sort_by_influence(entries);
  return entries;
}

std::string influence_report(std::span<const InfluenceEntry> entries, double full_p,
                             double threshold) {
  const bool full_significant = full_p < threshold;
  std::string out;
  for (const auto& e : entries) {
    out += "omit " + e.omitted_id + ": delta=" + fmt::significant(e.delta, 6) +
           " p_without=" + fmt::significant(e.p_without, 6);
    if ((e.p_without < threshold) != full_significant) out += " [flips significance]";
    out += "\n";
  }
  return out;
}

}  // namespace metalens
