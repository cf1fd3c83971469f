#include "metalens/report.hpp"

#include <cmath>
#include <utility>

#include "metalens/error.hpp"
#include "metalens/format.hpp"

namespace metalens {

namespace {

template <class F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const DomainError& e) {
    throw DomainError(std::string(stage) + ": " + e.what());
  }
}

std::string num(double v) { return fmt::table_number(v); }
std::string sig(double v) { return fmt::significant(v, 6); }

std::string pooled_rr(const MetaResult& r, double value) {
  return sig(r.scale == Scale::LogRR ? std::exp(value) : value);
}

}  // namespace

AnalysisBundle analyze(std::span<const EffectEstimate> studies, const AnalysisOptions& options) {
  if (studies.empty()) throw DomainError("analyze needs at least one study");
  AnalysisBundle b;
  b.options = options;
  b.ledger = options.ledger;
  b.studies.assign(studies.begin(), studies.end());
  for (auto& s : b.studies) s.confidence_level = options.confidence_level;

  b.records = in_stage("effect_stats", [&] {
    return derive_records(b.studies, options.scale, options.confidence_level);
  });
  b.plot = in_stage("pvalue_plot", [&] { return build_plot(b.records, options.alpha); });
  if (b.plot.k >= 4) {
    b.diagnosis = in_stage("pvalue_plot", [&] { return bilinear_diagnosis(b.plot, options.diagnosis); });
  }

  const auto effects = study_effects(b.studies, b.records, options.scale);
  b.meta_fixed = in_stage("meta_engine", [&] {
    return fixed_effect(effects, options.scale, options.confidence_level);
  });
  if (effects.size() >= 2) {
    b.meta_random = in_stage("meta_engine", [&] {
      return random_effects_dl(effects, options.scale, options.confidence_level);
    });
  }
  b.meta_fisher = in_stage("meta_engine", [&] { return pool(effects, options.scale, MetaMethod::FisherCombined); });

  if (effects.size() >= 3) {
    for (MetaMethod m : {MetaMethod::FixedEffect, MetaMethod::RandomEffectsDL,
                         MetaMethod::FisherCombined}) {
      InfluenceSet set;
      set.method = m;
      set.full_p = m == MetaMethod::FixedEffect       ? *b.meta_fixed.combined_p
                   : m == MetaMethod::RandomEffectsDL ? *b.meta_random->combined_p
                                                      : *b.meta_fisher.combined_p;
      set.entries = in_stage("meta_engine", [&] {
        return leave_one_out(effects, options.scale, m, options.confidence_level);
      });
      b.influence.push_back(std::move(set));
    }
  }
  return b;
}

namespace {

void input_section(std::string& out, const AnalysisBundle& b) {
  const auto& o = b.options;
  out += "## Input\n\n";
  out += "- studies: " + std::to_string(b.studies.size()) + "\n";
  out += "- scale: " + std::string(to_string(o.scale));
  out += o.scale == Scale::RawRR ? " (SE = (CL_high - CL_low) / (2 z), Z = (RR - 1) / SE)\n"
                                 : " (SE = (ln CL_high - ln CL_low) / (2 z), Z = ln RR / SE)\n";
  out += "- confidence level: " + sig(o.confidence_level) +
         " (z = " + fmt::fixed(z_critical(o.confidence_level), 6) + ")\n";
  out += "- alpha: " + sig(o.alpha) + "\n\n";
  out += "| id | label | RR | CL low | CL high |\n|---|---|---|---|---|\n";
  for (const auto& s : b.studies) {
    out += "| " + s.id + " | " + s.label + " | " + sig(s.rr) + " | " + sig(s.cl_low) + " | " +
           sig(s.cl_high) + " |\n";
  }
  out += "\n";
}

void derived_section(std::string& out, const AnalysisBundle& b) {
  out += "## Derived statistics\n\n";
  out += "| id | RR | CI | SE | Z | p | rank |\n|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    const auto& s = b.studies[i];
    const auto& r = b.records[i];
    out += "| " + r.id + " | " + sig(s.rr) + " | [" + sig(s.cl_low) + ", " + sig(s.cl_high) +
           "] | " + num(r.se) + " | " + num(r.z) + " | " + num(r.p) + " | " +
           std::to_string(r.rank) + " |\n";
  }
  out += "\n";
}

void plot_section(std::string& out, const AnalysisBundle& b) {
  const auto& o = b.options;
  out += "## P-value plot\n\n";
  out += "- points: " + std::to_string(b.plot.k) +
         " p-values ranked smallest to largest against the integers 1.." +
         std::to_string(b.plot.k) + "; uniform reference rank/(k+1)\n";
  out += "- SVG: " + (o.svg_path.empty() ? std::string("(not written)") : o.svg_path) + "\n";
  out += "- CSV: " + (o.csv_path.empty() ? std::string("(not written)") : o.csv_path) + "\n\n";
}

void diagnosis_section(std::string& out, const AnalysisBundle& b) {
  out += "## Diagnosis\n\n";
  int below = 0;
  for (const auto& p : b.plot.points) below += p.p < b.plot.alpha ? 1 : 0;
  out += "- " + std::to_string(below) + " of " + std::to_string(b.plot.k) +
         " p-values below " + sig(b.plot.alpha) + "\n";
  if (!b.diagnosis) {
    out += "- shape diagnosis not run: needs at least 4 studies\n\n";
    return;
  }
  const auto& d = *b.diagnosis;
  const auto& c = d.config;
  out += "- KS uniformity, all p-values: D = " + num(d.ks_all.statistic) +
         ", p = " + num(d.ks_all.p) + "\n";
  out += "- KS uniformity, p-values above alpha rescaled to (0,1): D = " +
         num(d.ks_above_alpha.statistic) + ", p = " + num(d.ks_above_alpha.p) + " (n = " +
         std::to_string(d.n_above_alpha) + ")\n";
  out += "- residual sum of squares: one line " + sig(d.rss_one_segment) + ", two segments " +
         sig(d.rss_two_segment) + " (split after rank " + std::to_string(d.split_rank) + ")\n";
  out += "- verdict: **" + std::string(to_string(d.verdict)) + "**\n";
  out += "- rule: Bilinear when at least " + std::to_string(c.min_below) +
         " p-values are below alpha, the KS test above alpha gives p >= " +
         sig(c.component_ks_level) + ", and the two-segment RSS is below " + sig(c.rss_ratio) +
         " x the one-line RSS; Uniform when the KS test over all p-values gives p >= " +
         sig(c.ks_level) + " and at most max(1, round(" + sig(c.uniform_below_fraction) +
         " k)) p-values are below alpha; otherwise Ambiguous. These thresholds operationalize "
         "the visual shapes and are not a formal test.\n\n";
}

void meta_section(std::string& out, const AnalysisBundle& b) {
  out += "## Meta-analysis (scale: " + std::string(to_string(b.options.scale)) + ")\n\n";
  out += "| method | k | pooled | pooled RR | SE | CI | Q | df | tau2 | p |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|\n";
  const auto row = [&](const MetaResult& r) {
    out += "| " + std::string(to_string(r.method)) + " | " + std::to_string(r.k) + " | " +
           num(r.pooled) + " | " + pooled_rr(r, r.pooled) + " | " + num(*r.se) + " | [" +
           num(*r.ci_low) + ", " + num(*r.ci_high) + "] | " + num(*r.q_statistic) + " | " +
           std::to_string(*r.df) + " | " + (r.tau2 ? num(*r.tau2) : std::string("-")) + " | " +
           num(*r.combined_p) + " |\n";
  };
  row(b.meta_fixed);
  if (b.meta_random) row(*b.meta_random);
  const auto& f = b.meta_fisher;
  out += "| FisherCombined | " + std::to_string(f.k) + " | X = " + num(f.pooled) +
         " | - | - | - | - | " + std::to_string(*f.df) + " | - | " + num(*f.combined_p) + " |\n\n";
  out += "Inverse-variance p is the two-sided test of the pooled effect against RR = 1; "
         "Fisher's X = -2 sum ln p is referred to chi-square with 2k df.\n\n";
}

void influence_section(std::string& out, const AnalysisBundle& b) {
  if (b.influence.empty()) return;
  const double threshold = b.options.influence_threshold;
  out += "## Leave-one-out influence\n\n";
  for (const auto& set : b.influence) {
    const bool fisher = set.method == MetaMethod::FisherCombined;
    out += "### " + std::string(to_string(set.method)) + " (full p = " + num(set.full_p) + ")\n\n";
    out += fisher ? "| omitted | X without | delta X | p without | flag |\n"
                  : "| omitted | pooled without | delta | p without | flag |\n";
    out += "|---|---|---|---|---|\n";
    int flips = 0;
    for (const auto& e : set.entries) {
      const bool flip = (e.p_without < threshold) != (set.full_p < threshold);
      flips += flip ? 1 : 0;
      out += "| " + e.omitted_id + " | " + num(e.pooled_without) + " | " + num(e.delta) + " | " +
             num(e.p_without) + " | " + (flip ? "flips significance" : "") + " |\n";
    }
    out += "\n" + (flips == 0 ? std::string("No single omission moves the pooled p across ") +
                                    sig(threshold) + ".\n\n"
                              : std::to_string(flips) +
                                    " single omission(s) move the pooled p across " +
                                    sig(threshold) + ".\n\n");
  }
}

void flags_section(std::string& out, const AnalysisBundle& b) {
  std::string body;
  for (const auto& s : b.studies) {
    if (!s.note.empty()) body += "- " + s.id + ": " + s.note + "\n";
  }
  if (body.empty()) return;
  out += "## Study flags\n\n" + body + "\n";
}

void ledger_section(std::string& out, const AnalysisBundle& b) {
  if (!b.ledger || b.ledger->entries.empty()) return;
  const LedgerStats s = ledger_stats(*b.ledger);
  out += "## Question ledger\n\n";
  out += "- entries: " + std::to_string(s.count) + "\n";
  out += "- papers per data set: min " + std::to_string(s.min) + ", median " + sig(s.median) +
         ", max " + std::to_string(s.max) + " (" + s.max_entry + "), total " +
         std::to_string(s.total) + "\n";
  for (const auto& f : s.shared) {
    std::string names;
    for (const auto& n : f.entries) names += (names.empty() ? "" : "; ") + n;
    out += "- possible shared cohort (" + std::to_string(f.citations) + " papers" +
           (f.same_name ? ", same data set name" : "") + "): " + names + "\n";
  }
  out += "\n";
}

}  // namespace

std::string generate_report(const AnalysisBundle& b) {
  std::string out = "# P-value plot analysis";
  if (!b.options.input_name.empty()) out += ": " + b.options.input_name;
  out += "\n\n";
  input_section(out, b);
  derived_section(out, b);
  plot_section(out, b);
  diagnosis_section(out, b);
  meta_section(out, b);
  influence_section(out, b);
  flags_section(out, b);
  ledger_section(out, b);
  return out;
}

}  // namespace metalens
