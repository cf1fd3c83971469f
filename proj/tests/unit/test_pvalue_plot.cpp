#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "metalens/error.hpp"
#include "metalens/pvalue_plot.hpp"
#include "golden.hpp"
#include "oracles.hpp"

using namespace metalens;

namespace {

PValuePlotModel table_plot(const char* name) {
  return build_plot(derive_records(golden::studies(name), Scale::RawRR));
}

std::vector<double> plot_pvalues(const PValuePlotModel& plot) {
  std::vector<double> out;
  for (const auto& pt : plot.points) out.push_back(pt.p);
  return out;
}

PValuePlotModel plot_of(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  std::vector<PValueRecord> records;
  for (std::size_t i = 0; i < p.size(); ++i) {
    records.push_back({"s" + std::to_string(i), 0.1, 0.0, p[i], static_cast<int>(i + 1)});
  }
  return build_plot(records);
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("build_plot on the European cohort table") {
  const auto plot = table_plot("raaschou2013.csv");
  REQUIRE(plot.k == 14);
  REQUIRE(plot.points.size() == 14);
  CHECK(plot.points[0].rank == 1);
  CHECK(plot.points[0].id == "VHM&PP");
  CHECK(std::fabs(plot.points[0].p - 0.1353) < 1e-4);
  REQUIRE(plot.reference.size() == 14);
  for (int i = 0; i < 14; ++i) {
    CHECK(plot.reference[i].rank == i + 1);
    CHECK(plot.reference[i].expected == doctest::Approx((i + 1) / 15.0));
  }
}

TEST_CASE("build_plot on the cohort meta-analysis table") {
  const auto plot = table_plot("hamra2014.csv");
  REQUIRE(plot.k == 14);
  CHECK(plot.points[0].id == "Krewski");
  CHECK(std::fabs(plot.points[0].p - 1.03e-5) < 1e-7);
}

TEST_CASE("build_plot single record") {
  const std::vector<PValueRecord> one{{"a", 0.1, 0.67, 0.5, 1}};
  const auto plot = build_plot(one);
  REQUIRE(plot.points.size() == 1);
  CHECK(plot.points[0].p == 0.5);
  CHECK(plot.reference[0].expected == 0.5);
}

TEST_CASE("build_plot errors") {
  CHECK_THROWS_AS(build_plot({}), DomainError);
  const std::vector<PValueRecord> dup{{"a", 0.1, 0, 0.2, 1}, {"b", 0.1, 0, 0.3, 1}};
  CHECK_THROWS_AS(build_plot(dup), DomainError);
  const std::vector<PValueRecord> gap{{"a", 0.1, 0, 0.2, 1}, {"b", 0.1, 0, 0.3, 3}};
  CHECK_THROWS_AS(build_plot(gap), DomainError);
}

TEST_CASE("property: build_plot preserves the multiset of p-values") {
  const auto records = derive_records(golden::studies("hamra2014.csv"), Scale::RawRR);
  auto expected = golden::pvalues(records);
  std::sort(expected.begin(), expected.end());
  const auto plot = build_plot(records);
  CHECK(plot_pvalues(plot) == expected);
  for (std::size_t i = 1; i < plot.points.size(); ++i) {
    CHECK(plot.points[i].rank == plot.points[i - 1].rank + 1);
    CHECK(plot.points[i].p >= plot.points[i - 1].p);
  }
}

TEST_CASE("ks_uniformity single point") {
  const std::vector<double> half{0.5};
  CHECK(ks_uniformity(half).statistic == 0.5);
}

TEST_CASE("ks_uniformity on the European cohort p-values") {
  const auto p = golden::pvalues(derive_records(golden::studies("raaschou2013.csv"), Scale::RawRR));
  const auto ks = ks_uniformity(p);
  const double d = oracle::ks_statistic_brute(p);
  CHECK(std::fabs(ks.statistic - d) < 1e-15);
  CHECK(std::fabs(ks.statistic - 0.3109814854795137) < 1e-12);
  CHECK(std::fabs(ks.p - oracle::kolmogorov_sf_theta(std::sqrt(14.0) * d)) < 1e-12);
  CHECK(std::fabs(ks.p - 0.1333184190160913) < 1e-12);
  CHECK(ks.p > 0.05);
}

TEST_CASE("ks_uniformity on an evenly spaced grid") {
  std::vector<double> grid;
  for (int i = 1; i <= 14; ++i) grid.push_back(i / 15.0);
  CHECK(std::fabs(ks_uniformity(grid).statistic - 1.0 / 15.0) < 1e-15);
}

TEST_CASE("ks_uniformity rejects values outside (0, 1]") {
  CHECK_THROWS_AS(ks_uniformity(std::vector<double>{0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(ks_uniformity(std::vector<double>{1.2}), DomainError);
  CHECK_THROWS_AS(ks_uniformity(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(ks_uniformity(std::vector<double>{std::nan("")}), DomainError);
}

TEST_CASE("kolmogorov_sf agrees with the theta dual series") {
  CHECK(std::fabs(kolmogorov_sf(1.0) - 0.26999967167735456) < 1e-12);
  CHECK(std::fabs(kolmogorov_sf(0.5) - 0.9639452436648751) < 1e-12);
  for (double lambda = 0.2; lambda <= 3.0; lambda += 0.05) {
    CHECK(std::fabs(kolmogorov_sf(lambda) - oracle::kolmogorov_sf_theta(lambda)) < 1e-11);
  }
  CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("property: ks statistic matches brute force and ignores order") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(1e-9, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + gen() % 40);
    for (auto& x : v) x = u(gen);
    const auto ks = ks_uniformity(v);
    CHECK(std::fabs(ks.statistic - oracle::ks_statistic_brute(v)) < 1e-14);
    std::shuffle(v.begin(), v.end(), gen);
    const auto again = ks_uniformity(v);
    CHECK(again.statistic == ks.statistic);
    CHECK(again.p == ks.p);
  }
}

TEST_CASE("hinge fit agrees with dense least squares") {
  const auto p = plot_pvalues(table_plot("hamra2014.csv"));
  const auto diag = bilinear_diagnosis(table_plot("hamra2014.csv"));
  const auto ref = oracle::hinge_fit(p);
  CHECK(std::fabs(diag.rss_one_segment - ref.rss_one) < 1e-12);
  CHECK(std::fabs(diag.rss_two_segment - ref.rss_two) < 1e-12);
  CHECK(diag.split_rank == ref.split);
  CHECK(std::fabs(diag.rss_one_segment - 0.06271238106610613) < 1e-12);
  CHECK(std::fabs(diag.rss_two_segment - 0.016239065850015357) < 1e-12);
  CHECK(diag.split_rank == 11);
}

TEST_CASE("property: hinge fit matches the dense oracle on random curves") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(4 + gen() % 30);
    for (auto& x : v) x = u(gen);
    const auto plot = plot_of(v);
    const auto diag = bilinear_diagnosis(plot);
    const auto ref = oracle::hinge_fit(plot_pvalues(plot));
    CHECK(std::fabs(diag.rss_one_segment - ref.rss_one) < 1e-10);
    CHECK(std::fabs(diag.rss_two_segment - ref.rss_two) < 1e-10);
    CHECK(diag.rss_two_segment <= diag.rss_one_segment);
    CHECK(diag.n_below_alpha >= 0);
    CHECK(diag.n_below_alpha <= diag.k);
  }
}

TEST_CASE("diagnosis of the European cohort table is Uniform") {
  const auto diag = bilinear_diagnosis(table_plot("raaschou2013.csv"));
  CHECK(diag.k == 14);
  CHECK(diag.n_below_alpha == 0);
  CHECK(diag.ks_all.p > 0.05);
  CHECK(diag.verdict == Verdict::Uniform);
}

TEST_CASE("diagnosis of the cohort meta-analysis table is Bilinear") {
  const auto plot = table_plot("hamra2014.csv");
  const auto diag = bilinear_diagnosis(plot);
  CHECK(diag.n_below_alpha == 4);
  std::vector<std::string> below;
  for (const auto& pt : plot.points) {
    if (pt.p < 0.05) below.push_back(pt.id);
  }
  CHECK(below == std::vector<std::string>{"Krewski", "Cao", "Cesaroni", "Lepeule"});
  CHECK(std::fabs(diag.ks_above_alpha.statistic - 0.4378) < 1e-4);
  CHECK(diag.ks_above_alpha.p > 0.01);
  CHECK(diag.verdict == Verdict::Bilinear);
}

TEST_CASE("the strict component level turns the meta-analysis table Ambiguous") {
  DiagnosisConfig strict;
  strict.component_ks_level = 0.05;
  CHECK(bilinear_diagnosis(table_plot("hamra2014.csv"), strict).verdict == Verdict::Ambiguous);
}

TEST_CASE("exact uniform grid is Uniform") {
  for (int k : {4, 8, 14, 50}) {
    std::vector<double> grid;
    for (int i = 1; i <= k; ++i) grid.push_back(static_cast<double>(i) / (k + 1));
    const auto diag = bilinear_diagnosis(plot_of(grid));
    CHECK(diag.verdict == Verdict::Uniform);
    CHECK(diag.rss_one_segment < 1e-20);
  }
}

TEST_CASE("property: constructed mixture is Bilinear for k >= 8") {
  std::mt19937_64 gen(123);
  for (int k = 8; k <= 40; k += 2) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v;
      for (int i = 0; i < k / 2; ++i) v.push_back(1e-6);
      const int upper = k - k / 2;
      for (int i = 1; i <= upper; ++i) {
        // Stratified draws keep the upper half close to uniform on (0.05, 1).
        std::uniform_real_distribution<double> cell(0.0, 1.0);
        v.push_back(0.05 + 0.95 * (i - cell(gen)) / upper);
      }
      INFO("k = " << k);
      CHECK(bilinear_diagnosis(plot_of(v)).verdict == Verdict::Bilinear);
    }
  }
}

TEST_CASE("diagnosis refuses fewer than four points") {
  CHECK_THROWS_AS(bilinear_diagnosis(plot_of({0.1, 0.5, 0.9})), DomainError);
}

TEST_CASE("render_svg on the European cohort table") {
  const auto plot = table_plot("raaschou2013.csv");
  const auto svg = render_svg(plot, nullptr, "European cohorts");
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos);
  CHECK(svg.find("width=\"640\"") != std::string::npos);
  CHECK(svg.find("height=\"480\"") != std::string::npos);
  CHECK(count(svg, "class=\"point\"") == 14);
  CHECK(svg.find("class=\"title\"") != std::string::npos);

  const std::regex ref_line(
      R"re(<line class="reference" x1="([-0-9.e]+)" y1="([-0-9.e]+)" x2="([-0-9.e]+)" y2="([-0-9.e]+)")re");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, ref_line));
  // The pixel mapping inverted: rank = (x - 64) / 512 * (k + 1), p = (432 - y) / 384.
  const auto rank_of = [](double x) { return (x - 64.0) / 512.0 * 15.0; };
  const auto p_of = [](double y) { return (432.0 - y) / 384.0; };
  CHECK(rank_of(std::stod(m[1])) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(p_of(std::stod(m[2])) == doctest::Approx(1.0 / 15.0).epsilon(1e-4));
  CHECK(rank_of(std::stod(m[3])) == doctest::Approx(14.0).epsilon(1e-5));
  CHECK(p_of(std::stod(m[4])) == doctest::Approx(14.0 / 15.0).epsilon(1e-5));
}

TEST_CASE("render_svg without a title") {
  const auto svg = render_svg(table_plot("raaschou2013.csv"), nullptr, "");
  CHECK(svg.find("class=\"title\"") == std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("render_svg puts four points below the alpha line for the meta-analysis table") {
  const auto plot = table_plot("hamra2014.csv");
  const auto diag = bilinear_diagnosis(plot);
  const auto svg = render_svg(plot, &diag, "Cohorts");
  const std::regex alpha_line(R"re(<line class="alpha"[^>]* y1="([-0-9.e]+)")re");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, alpha_line));
  const double alpha_y = std::stod(m[1]);
  const std::regex circle(R"re(<circle class="point" cx="[-0-9.e]+" cy="([-0-9.e]+)")re");
  int below = 0, total = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle); it != std::sregex_iterator();
       ++it) {
    ++total;
    if (std::stod((*it)[1]) > alpha_y) ++below;  // larger y is lower on screen
  }
  CHECK(total == 14);
  CHECK(below == 4);
  CHECK(svg.find("class=\"verdict\"") != std::string::npos);
}

TEST_CASE("render_svg is byte deterministic") {
  const auto plot = table_plot("hamra2014.csv");
  const auto diag = bilinear_diagnosis(plot);
  CHECK(render_svg(plot, &diag, "t") == render_svg(table_plot("hamra2014.csv"), &diag, "t"));
}

TEST_CASE("render_svg escapes markup in titles and ids") {
  const auto svg = render_svg(table_plot("raaschou2013.csv"), nullptr, "a < b & c");
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("VHM&amp;PP") != std::string::npos);
}

TEST_CASE("render_csv single point") {
  const std::vector<PValueRecord> one{{"a", 0.1, 0.67, 0.5, 1}};
  const auto csv = render_csv(build_plot(one));
  CHECK(csv == "rank,p_value,uniform_reference\n1,0.5,0.500000\n");
}

TEST_CASE("render_csv on the published tables") {
  const auto euro = render_csv(table_plot("raaschou2013.csv"));
  CHECK(count(euro, "\n") == 15);
  const auto first = euro.substr(euro.find('\n') + 1, euro.find('\n', euro.find('\n') + 1) - euro.find('\n') - 1);
  CHECK(first.rfind("1,0.1353", 0) == 0);
  CHECK(first.substr(first.rfind(',') + 1) == "0.066667");
  const auto cohorts = render_csv(table_plot("hamra2014.csv"));
  CHECK(cohorts.find("\n1,1.03409e-05,0.066667\n") != std::string::npos);
}

TEST_CASE("property: csv round trip keeps p-values to printed precision") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> e(-12.0, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + gen() % 30);
    for (auto& x : v) x = std::pow(10.0, e(gen));
    const auto plot = plot_of(v);
    const auto rows = parse_plot_csv(render_csv(plot));
    REQUIRE(rows.size() == plot.points.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].rank == plot.points[i].rank);
      CHECK(std::fabs(rows[i].p - plot.points[i].p) <= 5e-6 * plot.points[i].p);
      CHECK(std::fabs(rows[i].reference - plot.reference[i].expected) <= 5e-7);
    }
  }
}

TEST_CASE("parse_plot_csv rejects malformed input") {
  CHECK_THROWS(parse_plot_csv("rank,p\n1,0.5\n"));
  CHECK_THROWS(parse_plot_csv("rank,p_value,uniform_reference\n1,abc,0.5\n"));
}

TEST_CASE("verdict names") {
  CHECK(to_string(Verdict::Uniform) == "Uniform");
  CHECK(to_string(Verdict::Bilinear) == "Bilinear");
  CHECK(to_string(Verdict::Ambiguous) == "Ambiguous");
}
