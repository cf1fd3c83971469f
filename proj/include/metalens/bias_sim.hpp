#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "metalens/effect_stats.hpp"
#include "metalens/pvalue_plot.hpp"
#include "metalens/rng.hpp"

namespace metalens {

/// Measured value M = T + B with standard error s0 / sqrt(n): a constant bias
/// that survives any sample size.
struct BiasSchedule {
  double true_effect = 0.0;  // T, displacement of RR from 1 on the raw scale
  double bias = 0.0;         // B, same scale
  double s0 = 1.0;
  std::vector<int> n_grid;
};

struct CurvePoint {
  int n = 0;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
};

/// Deterministic z and p along n_grid.
std::vector<CurvePoint> biased_p_curve(const BiasSchedule& schedule);

/// Draws M ~ Normal(1 + T + B, se) on the raw RR scale and reports it with
/// interval M +- z_crit * se. Limits and RR are floored at 1e-6.
EffectEstimate simulate_study(double true_effect, double bias, double se, Rng& rng,
                              double confidence_level = 0.95);

/// Record with the smallest p among the first k_q candidates (first wins ties).
PValueRecord best_of_k(std::span<const PValueRecord> candidates, int k_q);

template <class Record>
struct FilterResult {
  std::vector<Record> kept;
  int suppressed_count = 0;
};

/// Drops each record with p > alpha independently with probability
/// censor_prob; records with p <= alpha are always kept. One uniform draw is
/// consumed per non-significant record.
template <class Record, class PValueOf>
FilterResult<Record> publication_filter(std::vector<Record> records, double censor_prob,
                                        double alpha, Rng& rng, PValueOf p_of) {
  FilterResult<Record> out;
  out.kept.reserve(records.size());
  for (auto& r : records) {
    if (std::invoke(p_of, r) > alpha && rng.bernoulli(censor_prob)) {
      ++out.suppressed_count;
      continue;
    }
    out.kept.push_back(std::move(r));
  }
  return out;
}

FilterResult<PValueRecord> publication_filter(std::vector<PValueRecord> records,
                                              double censor_prob, double alpha, Rng& rng);

enum class Selection { ReportAll, BestOfK };

std::string_view to_string(Selection s);

struct SimScenario {
  int n_studies = 14;
  int questions_per_study = 1;
  Selection selection = Selection::BestOfK;
  double publication_censor_prob = 0.0;
  double per_study_bias = 0.0;
  double se_low = 0.02;
  double se_high = 0.2;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

/// Throws DomainError when a scenario invariant fails.
void validate(const SimScenario& scenario);

/// No selection, no censoring, no bias.
SimScenario honest_scenario();
/// Best of 100 analyses per study, 80% of non-significant results suppressed.
SimScenario p_hacked_scenario();

struct ReplicateOutcome {
  std::vector<EffectEstimate> published;
  int suppressed_count = 0;
  Verdict verdict = Verdict::Ambiguous;
  bool insufficient = false;  // fewer than 4 published studies; diagnosis refused
  std::optional<MixtureDiagnosis> diagnosis;
};

struct VerdictRates {
  double uniform = 0.0;
  double bilinear = 0.0;
  double ambiguous = 0.0;
};

struct SimOutcome {
  SimScenario scenario;
  std::vector<ReplicateOutcome> replicates;
  VerdictRates summary;

  int published_count() const;
  int suppressed_count() const;
};

/// One replicate, drawn entirely from stream `index` of the scenario seed.
ReplicateOutcome simulate_replicate(const SimScenario& scenario, std::uint64_t index,
                                    const DiagnosisConfig& config = {});

/// Replicates in parallel (OpenMP); bit-identical to run_scenario_reference
/// for any thread count.
SimOutcome run_scenario(const SimScenario& scenario, int replicates,
                        const DiagnosisConfig& config = {});

/// Serial reference implementation of run_scenario.
SimOutcome run_scenario_reference(const SimScenario& scenario, int replicates,
                                  const DiagnosisConfig& config = {});

}  // namespace metalens
