#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metalens/effect_stats.hpp"
#include "metalens/meta_engine.hpp"
#include "metalens/pvalue_plot.hpp"

namespace metalens {

/// Study table with header containing at least `id,label,rr,cl_low,cl_high`
/// (any order; an optional `note` column is carried through, other columns
/// are ignored). Throws ValidationError naming the line and field.
/// `confidence_level` is stamped on every estimate.
std::vector<EffectEstimate> parse_study_csv(std::string_view text, double confidence_level = 0.95);

struct LedgerEntry {
  std::string cohort_name;
  std::string origin;  // country or author
  long long citations = 0;
  std::string note;
};

/// Static count of papers per cohort data set.
struct QuestionLedger {
  std::vector<LedgerEntry> entries;
};

/// Header `name,origin,citations` with an optional trailing `note` column.
QuestionLedger parse_counts_csv(std::string_view text);

/// Entries sharing one citation count, reported as a possible shared cohort.
struct SharedCohortFlag {
  long long citations = 0;
  std::vector<std::string> entries;  // "name (origin)"
  bool same_name = false;            // every entry also carries the same cohort name
};

struct LedgerStats {
  int count = 0;
  long long min = 0;
  long long max = 0;
  double median = 0.0;  // midpoint of the two central values for even counts
  long long total = 0;
  std::string max_entry;
  std::vector<SharedCohortFlag> shared;
};

LedgerStats ledger_stats(const QuestionLedger& ledger);

struct AnalysisOptions {
  Scale scale = Scale::RawRR;
  double alpha = 0.05;
  double confidence_level = 0.95;
  DiagnosisConfig diagnosis;
  double influence_threshold = 0.05;
  std::string input_name;
  std::string svg_path;  // echoed in the report when set
  std::string csv_path;
  std::optional<QuestionLedger> ledger;
};

struct InfluenceSet {
  MetaMethod method = MetaMethod::FixedEffect;
  double full_p = 1.0;
  std::vector<InfluenceEntry> entries;
};

struct AnalysisBundle {
  std::vector<EffectEstimate> studies;
  std::vector<PValueRecord> records;
  PValuePlotModel plot;
  std::optional<MixtureDiagnosis> diagnosis;  // absent when k < 4
  MetaResult meta_fixed;
  std::optional<MetaResult> meta_random;      // absent when k < 2
  MetaResult meta_fisher;
  std::vector<InfluenceSet> influence;        // empty when k < 3
  std::optional<QuestionLedger> ledger;
  AnalysisOptions options;
};

/// derive_records -> build_plot -> bilinear_diagnosis -> pooling ->
/// leave_one_out. Sub-operation DomainErrors are rethrown with the stage name.
AnalysisBundle analyze(std::span<const EffectEstimate> studies, const AnalysisOptions& options);

/// Markdown report; deterministic for a given bundle.
std::string generate_report(const AnalysisBundle& bundle);

}  // namespace metalens
