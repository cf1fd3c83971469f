#pragma once

// Published table columns carried by the fixture files (published_se, published_z,
// published_p, published_rank). They are read here for assertions only.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "metalens/csv.hpp"
#include "metalens/effect_stats.hpp"
#include "metalens/fixtures.hpp"
#include "metalens/report.hpp"

namespace golden {

struct Row {
  std::string id;
  double se;
  double z;
  double p;
  int rank;
};

inline std::string_view fixture_text(std::string_view name) {
  const auto* f = metalens::find_fixture(name);
  if (f == nullptr) throw std::runtime_error("missing fixture " + std::string(name));
  return f->content;
}

inline std::vector<metalens::EffectEstimate> studies(std::string_view name) {
  return metalens::parse_study_csv(fixture_text(name));
}

inline std::vector<Row> published(std::string_view name) {
  const auto rows = metalens::csv::parse(fixture_text(name));
  const auto& header = rows.front().fields;
  const auto col = [&](std::string_view n) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == n) return i;
    }
    throw std::runtime_error("missing column " + std::string(n));
  };
  std::vector<Row> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    out.push_back({f[col("id")], *metalens::csv::to_double(f[col("published_se")]),
                   *metalens::csv::to_double(f[col("published_z")]),
                   *metalens::csv::to_double(f[col("published_p")]),
                   static_cast<int>(*metalens::csv::to_integer(f[col("published_rank")]))});
  }
  return out;
}

inline std::vector<double> pvalues(const std::vector<metalens::PValueRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.p);
  return out;
}

}  // namespace golden
