#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metalens/effect_stats.hpp"

namespace metalens {

enum class MetaMethod { FixedEffect, RandomEffectsDL, FisherCombined };

std::string_view to_string(MetaMethod m);

/// A study as the pooling routines see it: effect and SE on one scale, plus
/// the study's own two-sided p-value (used by Fisher's method).
struct StudyEffect {
  std::string id;
  double effect = 0.0;
  double se = 1.0;
  double p = 1.0;
};

/// Pairs estimates with their derived records on the given scale.
std::vector<StudyEffect> study_effects(std::span<const EffectEstimate> studies,
                                       std::span<const PValueRecord> records, Scale scale);

/// Pooled result. For FisherCombined, `pooled` holds the chi-square statistic
/// -2 sum ln p and no interval is reported; for the inverse-variance methods
/// `combined_p` is the two-sided p of the pooled effect against the null.
struct MetaResult {
  MetaMethod method = MetaMethod::FixedEffect;
  Scale scale = Scale::RawRR;
  int k = 0;
  double pooled = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> q_statistic;
  std::optional<double> tau2;
  std::optional<int> df;
  std::optional<double> combined_p;
};

MetaResult fixed_effect(std::span<const StudyEffect> studies, Scale scale,
                        double confidence_level = 0.95);

/// DerSimonian-Laird; tau^2 clamped at 0. Requires k >= 2.
MetaResult random_effects_dl(std::span<const StudyEffect> studies, Scale scale,
                             double confidence_level = 0.95);

MetaResult fishers_method(std::span<const double> pvalues);

/// Chi-square upper tail for even df via the closed-form Poisson series.
/// Odd df is not supported and throws DomainError.
double chi_square_sf(double x, int df);

MetaResult pool(std::span<const StudyEffect> studies, Scale scale, MetaMethod method,
                double confidence_level = 0.95);

struct InfluenceEntry {
  std::string omitted_id;
  double pooled_without = 0.0;
  double delta = 0.0;  // pooled_without - pooled_full
  double p_without = 1.0;
};

/// Re-pools with each study omitted in turn (OpenMP across omissions).
/// Sorted by |delta| descending, ties by input order. Requires k >= 3.
std::vector<InfluenceEntry> leave_one_out(std::span<const StudyEffect> studies, Scale scale,
                                          MetaMethod method, double confidence_level = 0.95);

/// Serial reference for leave_one_out; results are identical.
std::vector<InfluenceEntry> leave_one_out_reference(std::span<const StudyEffect> studies,
                                                    Scale scale, MetaMethod method,
                                                    double confidence_level = 0.95);

/// One line per entry; an entry whose omission moves the pooled p across
/// `threshold` (relative to `full_p`) is marked "[flips significance]".
std::string influence_report(std::span<const InfluenceEntry> entries, double full_p,
                             double threshold = 0.05);

}  // namespace metalens
