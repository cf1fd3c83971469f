#include <algorithm>
#include <map>
#include <set>

#include "metalens/csv.hpp"
#include "metalens/error.hpp"
#include "metalens/report.hpp"

namespace metalens {

namespace {

std::string line_name(const csv::Row& row) { return "line " + std::to_string(row.line); }

struct Header {
  std::map<std::string, std::size_t> columns;

  std::optional<std::size_t> find(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
};

Header read_header(const csv::Row& row, std::initializer_list<const char*> required,
                   std::string_view expected) {
  Header h;
  for (std::size_t i = 0; i < row.fields.size(); ++i) h.columns.emplace(row.fields[i], i);
  for (const char* name : required) {
    if (!h.find(name)) {
      throw ValidationError(line_name(row), name,
                            "missing column (expected header " + std::string(expected) + ")");
    }
  }
  return h;
}

const std::string& field_at(const csv::Row& row, std::size_t index, const char* name) {
  if (index >= row.fields.size()) throw ValidationError(line_name(row), name, "missing field");
  return row.fields[index];
}

}  // namespace

std::vector<EffectEstimate> parse_study_csv(std::string_view text, double confidence_level) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ValidationError("line 1", "header", "empty file");
  const Header h = read_header(rows.front(), {"id", "label", "rr", "cl_low", "cl_high"},
                               "id,label,rr,cl_low,cl_high");
  if (rows.size() == 1) throw ValidationError("line 2", "", "no data rows");

  const std::size_t id_col = *h.find("id");
  const std::size_t label_col = *h.find("label");
  const auto note_col = h.find("note");

  std::vector<EffectEstimate> out;
  std::set<std::string> ids;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    EffectEstimate e;
    e.id = field_at(row, id_col, "id");
    if (e.id.empty()) throw ValidationError(line_name(row), "id", "empty study id");
    if (!ids.insert(e.id).second) {
      throw ValidationError(line_name(row), "id", "duplicate study id '" + e.id + "'");
    }
    e.label = field_at(row, label_col, "label");
    if (e.label.empty()) e.label = e.id;
    e.confidence_level = confidence_level;
    for (auto [name, target] : {std::pair{"rr", &e.rr}, std::pair{"cl_low", &e.cl_low},
                                std::pair{"cl_high", &e.cl_high}}) {
      const auto value = csv::to_double(field_at(row, *h.find(name), name));
      if (!value) {
        throw ValidationError(line_name(row) + " (study " + e.id + ")", name, "not a number");
      }
      *target = *value;
    }
    if (note_col && *note_col < row.fields.size()) e.note = row.fields[*note_col];
    try {
      validate(e);
    } catch (const ValidationError& err) {
      throw ValidationError(line_name(row) + " (study " + e.id + ")", err.field(), err.detail());
    }
    out.push_back(std::move(e));
  }
  return out;
}

QuestionLedger parse_counts_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ValidationError("line 1", "header", "empty file");
  const Header h = read_header(rows.front(), {"name", "origin", "citations"},
                               "name,origin,citations");
  if (rows.size() == 1) throw ValidationError("line 2", "", "no data rows");
  const auto note_col = h.find("note");

  QuestionLedger ledger;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    LedgerEntry e;
    e.cohort_name = field_at(row, *h.find("name"), "name");
    e.origin = field_at(row, *h.find("origin"), "origin");
    if (e.cohort_name.empty()) throw ValidationError(line_name(row), "name", "empty name");
    const auto count = csv::to_integer(field_at(row, *h.find("citations"), "citations"));
    if (!count) throw ValidationError(line_name(row), "citations", "not an integer");
    if (*count < 0) throw ValidationError(line_name(row), "citations", "negative count");
    e.citations = *count;
    if (note_col && *note_col < row.fields.size()) e.note = row.fields[*note_col];
    ledger.entries.push_back(std::move(e));
  }
  return ledger;
}

LedgerStats ledger_stats(const QuestionLedger& ledger) {
  if (ledger.entries.empty()) throw DomainError("ledger_stats needs a nonempty ledger");
  LedgerStats s;
  s.count = static_cast<int>(ledger.entries.size());

  std::vector<long long> counts;
  counts.reserve(ledger.entries.size());
  const LedgerEntry* top = &ledger.entries.front();
  for (const auto& e : ledger.entries) {
    counts.push_back(e.citations);
    s.total += e.citations;
    if (e.citations > top->citations) top = &e;
  }
  std::sort(counts.begin(), counts.end());
  s.min = counts.front();
  s.max = counts.back();
  s.max_entry = top->cohort_name + " (" + top->origin + ")";
  const std::size_t n = counts.size();
  s.median = n % 2 == 1 ? static_cast<double>(counts[n / 2])
                        : (static_cast<double>(counts[n / 2 - 1]) +
                           static_cast<double>(counts[n / 2])) / 2.0;

  // Groups in order of first appearance.
  std::vector<long long> seen;
  for (const auto& e : ledger.entries) {
    if (std::find(seen.begin(), seen.end(), e.citations) != seen.end()) continue;
    seen.push_back(e.citations);
    SharedCohortFlag flag;
    flag.citations = e.citations;
    flag.same_name = true;
    for (const auto& other : ledger.entries) {
      if (other.citations != e.citations) continue;
      flag.entries.push_back(other.cohort_name + " (" + other.origin + ")");
      flag.same_name = flag.same_name && other.cohort_name == e.cohort_name;
    }
    if (flag.entries.size() > 1) s.shared.push_back(std::move(flag));
  }
  return s;
}

}  // namespace metalens
