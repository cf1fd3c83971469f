#include "metalens/fixtures.hpp"

#include <array>
#include <string_view>

#include "fixture_data.hpp"

namespace metalens {

namespace {

std::string_view describe(std::string_view name) {
  if (name == "raaschou2013.csv") return "14 European cohort PM2.5 / lung cancer risk ratios";
  if (name == "hamra2014.csv") return "14 cohort PM2.5 / lung cancer risk ratios (mostly US)";
  if (name == "table1_counts.csv") return "papers per cohort data set, European cohorts (17)";
  if (name == "table2_counts.csv") return "papers per cohort data set, meta-analysis base studies (14)";
  return "";
}

const std::array<Fixture, detail::kFixtureCount>& table() {
  static const auto entries = [] {
    std::array<Fixture, detail::kFixtureCount> out{};
    for (std::size_t i = 0; i < detail::kFixtureCount; ++i) {
      out[i] = {detail::kFixtureData[i].name, describe(detail::kFixtureData[i].name),
                detail::kFixtureData[i].content};
    }
    return out;
  }();
  return entries;
}

}  // namespace

std::span<const Fixture> fixtures() { return table(); }

const Fixture* find_fixture(std::string_view name) {
  for (const auto& f : table()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace metalens
