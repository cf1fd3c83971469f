#include "metalens/scenario_io.hpp"

#include <set>

#include "metalens/csv.hpp"
#include "metalens/error.hpp"
#include "metalens/format.hpp"

namespace metalens {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

SimScenario parse_scenario(std::string_view text) {
  SimScenario s;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string_view line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where, "", "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ValidationError(where, key, "repeated key");

    const auto real = [&]() {
      const auto v = csv::to_double(value);
      if (!v) throw ValidationError(where, key, "not a number");
      return *v;
    };
    const auto integer = [&]() {
      const auto v = csv::to_integer(value);
      if (!v) throw ValidationError(where, key, "not an integer");
      return *v;
    };

    if (key == "n_studies") {
      s.n_studies = static_cast<int>(integer());
    } else if (key == "questions_per_study") {
      s.questions_per_study = static_cast<int>(integer());
    } else if (key == "selection") {
      if (value == "report_all") {
        s.selection = Selection::ReportAll;
      } else if (value == "best_of_k") {
        s.selection = Selection::BestOfK;
      } else {
        throw ValidationError(where, key, "expected report_all or best_of_k");
      }
    } else if (key == "publication_censor_prob") {
      s.publication_censor_prob = real();
    } else if (key == "per_study_bias") {
      s.per_study_bias = real();
    } else if (key == "se_low") {
      s.se_low = real();
    } else if (key == "se_high") {
      s.se_high = real();
    } else if (key == "alpha") {
      s.alpha = real();
    } else if (key == "seed") {
      const auto v = integer();
      if (v < 0) throw ValidationError(where, key, "must be nonnegative");
      s.seed = static_cast<std::uint64_t>(v);
    } else {
      throw ValidationError(where, key, "unknown key");
    }
  }
  try {
    validate(s);
  } catch (const DomainError& e) {
    throw ValidationError("scenario", "", e.what());
  }
  return s;
}

std::string render_scenario(const SimScenario& s) {
  std::string out;
  out += "n_studies = " + std::to_string(s.n_studies) + "\n";
  out += "questions_per_study = " + std::to_string(s.questions_per_study) + "\n";
  out += std::string("selection = ") +
         (s.selection == Selection::ReportAll ? "report_all" : "best_of_k") + "\n";
  out += "publication_censor_prob = " + fmt::significant(s.publication_censor_prob, 17) + "\n";
  out += "per_study_bias = " + fmt::significant(s.per_study_bias, 17) + "\n";
  out += "se_low = " + fmt::significant(s.se_low, 17) + "\n";
  out += "se_high = " + fmt::significant(s.se_high, 17) + "\n";
  out += "alpha = " + fmt::significant(s.alpha, 17) + "\n";
  out += "seed = " + std::to_string(s.seed) + "\n";
  return out;
}

std::string render_simulation_csv(const SimOutcome& outcome) {
  std::string out =
      "replicate,published,suppressed,n_below_alpha,ks_all_p,ks_above_p,rss_one_segment,"
      "rss_two_segment,split_rank,verdict,insufficient\n";
  for (std::size_t i = 0; i < outcome.replicates.size(); ++i) {
    const auto& r = outcome.replicates[i];
    out += std::to_string(i) + "," + std::to_string(r.published.size()) + "," +
           std::to_string(r.suppressed_count) + ",";
    if (r.diagnosis) {
      const auto& d = *r.diagnosis;
      out += std::to_string(d.n_below_alpha) + "," + fmt::significant(d.ks_all.p, 10) + "," +
             fmt::significant(d.ks_above_alpha.p, 10) + "," +
             fmt::significant(d.rss_one_segment, 10) + "," +
             fmt::significant(d.rss_two_segment, 10) + "," + std::to_string(d.split_rank) + ",";
    } else {
      out += ",,,,,,";
    }
    out += std::string(to_string(r.verdict)) + "," + (r.insufficient ? "1" : "0") + "\n";
  }
  return out;
}

std::string render_published_csv(const SimOutcome& outcome) {
  std::string out = "id,label,rr,cl_low,cl_high\n";
  for (const auto& r : outcome.replicates) {
    for (const auto& e : r.published) {
      out += csv::escape(e.id) + "," + csv::escape(e.label) + "," + fmt::significant(e.rr, 17) +
             "," + fmt::significant(e.cl_low, 17) + "," + fmt::significant(e.cl_high, 17) + "\n";
    }
  }
  return out;
}

std::string render_simulation_summary(const SimOutcome& o) {
  const auto& s = o.scenario;
  std::string out;
  out += "scenario: n_studies=" + std::to_string(s.n_studies) +
         " questions_per_study=" + std::to_string(s.questions_per_study) +
         " selection=" + std::string(to_string(s.selection)) +
         " censor=" + fmt::significant(s.publication_censor_prob, 6) +
         " bias=" + fmt::significant(s.per_study_bias, 6) + " se=[" +
         fmt::significant(s.se_low, 6) + "," + fmt::significant(s.se_high, 6) +
         "] alpha=" + fmt::significant(s.alpha, 6) + " seed=" + std::to_string(s.seed) + "\n";
  int insufficient = 0;
  for (const auto& r : o.replicates) insufficient += r.insufficient ? 1 : 0;
  out += "replicates: " + std::to_string(o.replicates.size()) +
         " (insufficient: " + std::to_string(insufficient) + ")\n";
  out += "published: " + std::to_string(o.published_count()) +
         " suppressed: " + std::to_string(o.suppressed_count()) + "\n";
  out += "verdict rates: Uniform " + fmt::fixed(o.summary.uniform, 4) + "  Bilinear " +
         fmt::fixed(o.summary.bilinear, 4) + "  Ambiguous " + fmt::fixed(o.summary.ambiguous, 4) +
         "\n";
  return out;
}

}  // namespace metalens
