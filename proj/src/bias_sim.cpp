#include "metalens/bias_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metalens/error.hpp"

namespace metalens {

std::vector<CurvePoint> biased_p_curve(const BiasSchedule& schedule) {
  if (!(schedule.s0 > 0.0)) throw DomainError("s0 must be positive");
  for (std::size_t i = 0; i < schedule.n_grid.size(); ++i) {
    if (schedule.n_grid[i] < 1 || (i > 0 && schedule.n_grid[i] <= schedule.n_grid[i - 1])) {
      throw DomainError("n_grid must be strictly increasing positive integers");
    }
  }
  std::vector<CurvePoint> curve;
  curve.reserve(schedule.n_grid.size());
  const double measured = schedule.true_effect + schedule.bias;
  for (int n : schedule.n_grid) {
    CurvePoint pt;
    pt.n = n;
    pt.se = schedule.s0 / std::sqrt(static_cast<double>(n));
    pt.z = measured / pt.se;
    pt.p = p_two_sided(pt.z);
    curve.push_back(pt);
  }
  return curve;
}

EffectEstimate simulate_study(double true_effect, double bias, double se, Rng& rng,
                              double confidence_level) {
  if (!(se > 0.0)) throw DomainError("simulated study needs se > 0");
  constexpr double kFloor = 1e-6;
  const double zc = z_critical(confidence_level);
  const double measured = rng.normal(1.0 + true_effect + bias, se);

  EffectEstimate e;
  e.id = "sim";
  e.label = "simulated";
  e.confidence_level = confidence_level;
  e.rr = std::max(measured, kFloor);
  e.cl_low = std::max(measured - zc * se, kFloor);
  e.cl_high = std::max(measured + zc * se, 2.0 * kFloor);
  return e;
}

PValueRecord best_of_k(std::span<const PValueRecord> candidates, int k_q) {
  if (candidates.empty()) throw DomainError("best_of_k needs at least one candidate");
  if (k_q < 1 || static_cast<std::size_t>(k_q) > candidates.size()) {
    throw DomainError("best_of_k needs 1 <= k_q <= number of candidates");
  }
  const auto first = candidates.begin();
  return *std::min_element(first, first + k_q, [](const PValueRecord& a, const PValueRecord& b) {
    return a.p < b.p;
  });
}

FilterResult<PValueRecord> publication_filter(std::vector<PValueRecord> records,
                                              double censor_prob, double alpha, Rng& rng) {
  if (!(censor_prob >= 0.0 && censor_prob <= 1.0)) {
    throw DomainError("censor probability must lie in [0, 1]");
  }
  return publication_filter(std::move(records), censor_prob, alpha, rng, &PValueRecord::p);
}

std::string_view to_string(Selection s) {
  return s == Selection::ReportAll ? "ReportAll" : "BestOfK";
}

void validate(const SimScenario& s) {
  if (s.n_studies < 1) throw DomainError("n_studies must be >= 1");
  if (s.questions_per_study < 1) throw DomainError("questions_per_study must be >= 1");
  if (!(s.publication_censor_prob >= 0.0 && s.publication_censor_prob <= 1.0)) {
    throw DomainError("publication_censor_prob must lie in [0, 1]");
  }
  if (!(s.se_low > 0.0 && s.se_high >= s.se_low)) {
    throw DomainError("se range must be positive with se_low <= se_high");
  }
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!std::isfinite(s.per_study_bias)) throw DomainError("per_study_bias must be finite");
}

SimScenario honest_scenario() {
  SimScenario s;
  s.questions_per_study = 1;
  s.selection = Selection::ReportAll;
  s.publication_censor_prob = 0.0;
  s.per_study_bias = 0.0;
  return s;
}

SimScenario p_hacked_scenario() {
  SimScenario s;
  s.questions_per_study = 100;
  s.selection = Selection::BestOfK;
  s.publication_censor_prob = 0.8;
  s.per_study_bias = 0.0;
  return s;
}

int SimOutcome::published_count() const {
  int n = 0;
  for (const auto& r : replicates) n += static_cast<int>(r.published.size());
  return n;
}

int SimOutcome::suppressed_count() const {
  int n = 0;
  for (const auto& r : replicates) n += r.suppressed_count;
  return n;
}

namespace {

struct Candidate {
  EffectEstimate estimate;
  double p = 1.0;
};

std::string study_id(std::uint64_t replicate, int study, int question) {
  return "r" + std::to_string(replicate) + "-s" + std::to_string(study + 1) + "-q" +
         std::to_string(question + 1);
}

}  // namespace

ReplicateOutcome simulate_replicate(const SimScenario& scenario, std::uint64_t index,
                                    const DiagnosisConfig& config) {
  Rng rng(scenario.seed, index);
  const int k_q = scenario.questions_per_study;

  std::vector<Candidate> reported;
  std::vector<EffectEstimate> analyses;
  for (int s = 0; s < scenario.n_studies; ++s) {
    const double se = rng.uniform(scenario.se_low, scenario.se_high);
    analyses.clear();
    for (int q = 0; q < k_q; ++q) {
      EffectEstimate e = simulate_study(0.0, scenario.per_study_bias, se, rng);
      e.id = study_id(index, s, q);
      e.label = e.id;
      analyses.push_back(std::move(e));
    }
    const auto records = derive_records(analyses, Scale::RawRR);
    if (scenario.selection == Selection::BestOfK) {
      const PValueRecord best = best_of_k(records, k_q);
      const auto pos = static_cast<std::size_t>(
          std::find_if(records.begin(), records.end(),
                       [&](const PValueRecord& r) { return r.id == best.id; }) -
          records.begin());
      reported.push_back({analyses[pos], best.p});
    } else {
      for (std::size_t q = 0; q < analyses.size(); ++q) {
        reported.push_back({analyses[q], records[q].p});
      }
    }
  }

  auto filtered = publication_filter(std::move(reported), scenario.publication_censor_prob,
                                     scenario.alpha, rng, &Candidate::p);

  ReplicateOutcome out;
  out.suppressed_count = filtered.suppressed_count;
  out.published.reserve(filtered.kept.size());
  for (auto& c : filtered.kept) out.published.push_back(std::move(c.estimate));

  if (out.published.size() < 4) {
    out.insufficient = true;
    out.verdict = Verdict::Ambiguous;
    return out;
  }
  const auto records = derive_records(out.published, Scale::RawRR);
  const auto plot = build_plot(records, scenario.alpha);
  out.diagnosis = bilinear_diagnosis(plot, config);
  out.verdict = out.diagnosis->verdict;
  return out;
}

namespace {

VerdictRates summarize(const std::vector<ReplicateOutcome>& replicates) {
  VerdictRates rates;
  if (replicates.empty()) return rates;
  int uniform = 0;
  int bilinear = 0;
  int ambiguous = 0;
  for (const auto& r : replicates) {
    switch (r.verdict) {
      case Verdict::Uniform: ++uniform; break;
      case Verdict::Bilinear: ++bilinear; break;
      case Verdict::Ambiguous: ++ambiguous; break;
    }
  }
  const double n = static_cast<double>(replicates.size());
  rates.uniform = uniform / n;
  rates.bilinear = bilinear / n;
  rates.ambiguous = ambiguous / n;
  return rates;
}

void check_run(const SimScenario& scenario, int replicates) {
  validate(scenario);
  if (replicates < 1) throw DomainError("replicates must be >= 1");
}

}  // namespace

SimOutcome run_scenario_reference(const SimScenario& scenario, int replicates,
                                  const DiagnosisConfig& config) {
  check_run(scenario, replicates);
  SimOutcome out;
  out.scenario = scenario;
  out.replicates.reserve(static_cast<std::size_t>(replicates));
  for (int i = 0; i < replicates; ++i) {
    out.replicates.push_back(simulate_replicate(scenario, static_cast<std::uint64_t>(i), config));
  }
  out.summary = summarize(out.replicates);
  return out;
}

SimOutcome run_scenario(const SimScenario& scenario, int replicates,
                        const DiagnosisConfig& config) {
  check_run(scenario, replicates);
  SimOutcome out;
  out.scenario = scenario;
  out.replicates.resize(static_cast<std::size_t>(replicates));
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < replicates; ++i) {
    out.replicates[static_cast<std::size_t>(i)] =
        simulate_replicate(scenario, static_cast<std::uint64_t>(i), config);
  }
  out.summary = summarize(out.replicates);
  return out;
}

}  // namespace metalens
