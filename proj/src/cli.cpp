#include "metalens/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metalens/bias_sim.hpp"
#include "metalens/error.hpp"
#include "metalens/fixtures.hpp"
#include "metalens/format.hpp"
#include "metalens/report.hpp"
#include "metalens/scenario_io.hpp"

namespace metalens {

namespace {

namespace fs = std::filesystem;

/// Data-level failure that maps to exit code 2.
struct DataFailure {
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFailure{"cannot read '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Path first, then an embedded fixture of that name.
std::string read_input(const std::string& path) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) return read_file(path);
  if (const Fixture* f = find_fixture(fs::path(path).filename().string());
      f != nullptr && !fs::exists(path, ec)) {
    return std::string(f->content);
  }
  throw DataFailure{"cannot read '" + path + "'"};
}

/// Writes all outputs or none: each goes to a temporary sibling first and is
/// renamed into place once every write has succeeded.
void write_outputs(const std::vector<std::pair<std::string, std::string>>& outputs) {
  std::vector<fs::path> temps;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [path, content] : outputs) {
    fs::path tmp = path;
    tmp += ".tmp-metalens";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    temps.push_back(tmp);
    if (!out || !(out << content) || !(out.flush())) {
      cleanup();
      throw DataFailure{"cannot write '" + path + "'"};
    }
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::error_code ec;
    fs::rename(temps[i], outputs[i].first, ec);
    if (ec) {
      cleanup();
      throw DataFailure{"cannot write '" + outputs[i].first + "': " + ec.message()};
    }
  }
}

bool color_enabled(const std::ostream& out) {
  if (std::getenv("METALENS_NO_COLOR") != nullptr) return false;
  return &out == &std::cout && ::isatty(STDOUT_FILENO) == 1;
}

std::string paint(std::string_view text, Verdict v, bool color) {
  if (!color) return std::string(text);
  const char* code = v == Verdict::Bilinear ? "\033[1;31m"
                     : v == Verdict::Uniform ? "\033[1;32m"
                                             : "\033[1;33m";
  return code + std::string(text) + "\033[0m";
}

struct AnalyzeArgs {
  std::string input;
  std::string scale = "raw";
  double alpha = 0.05;
  double confidence = 0.95;
  std::string svg;
  std::string csv;
  std::string report;
  std::string counts;
  std::string title;
  DiagnosisConfig diagnosis;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out, bool color) {
  AnalysisOptions options;
  options.scale = parse_scale(a.scale);
  options.alpha = a.alpha;
  options.confidence_level = a.confidence;
  options.diagnosis = a.diagnosis;
  options.input_name = fs::path(a.input).filename().string();
  options.svg_path = a.svg;
  options.csv_path = a.csv;
  if (!a.counts.empty()) options.ledger = parse_counts_csv(read_input(a.counts));

  const auto studies = parse_study_csv(read_input(a.input), a.confidence);
  const AnalysisBundle bundle = analyze(studies, options);

  std::vector<std::pair<std::string, std::string>> outputs;
  if (!a.svg.empty()) {
    const std::string title = a.title.empty() ? "P-value plot: " + options.input_name : a.title;
    outputs.emplace_back(a.svg, render_svg(bundle.plot, bundle.diagnosis ? &*bundle.diagnosis : nullptr, title));
  }
  if (!a.csv.empty()) outputs.emplace_back(a.csv, render_csv(bundle.plot));
  const std::string report = generate_report(bundle);
  if (!a.report.empty()) outputs.emplace_back(a.report, report);
  write_outputs(outputs);

  if (a.report.empty()) {
    out << report;
  } else {
    int below = 0;
    for (const auto& p : bundle.plot.points) below += p.p < bundle.plot.alpha ? 1 : 0;
    const std::string verdict =
        bundle.diagnosis ? std::string(to_string(bundle.diagnosis->verdict)) : "not diagnosed";
    out << paint(verdict, bundle.diagnosis ? bundle.diagnosis->verdict : Verdict::Ambiguous, color)
        << ": " << below << " of " << bundle.plot.k << " p-values below "
        << fmt::significant(bundle.plot.alpha, 6) << "; report written to " << a.report << "\n";
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string published;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  SimScenario scenario = parse_scenario(read_input(a.scenario));
  scenario.seed = a.seed;
  const SimOutcome outcome = run_scenario(scenario, a.replicates);

  std::vector<std::pair<std::string, std::string>> outputs;
  if (!a.out.empty()) outputs.emplace_back(a.out, render_simulation_csv(outcome));
  if (!a.published.empty()) outputs.emplace_back(a.published, render_published_csv(outcome));
  write_outputs(outputs);
  out << render_simulation_summary(outcome);
  return kExitOk;
}

int run_calibrate(int replicates, std::uint64_t seed, std::ostream& out, bool color) {
  struct Row {
    const char* name;
    SimScenario scenario;
  };
  std::vector<Row> rows{{"honest", honest_scenario()}, {"p-hacked", p_hacked_scenario()}};
  out << "scenario    k_q  censor  Uniform  Bilinear  Ambiguous\n";
  for (auto& row : rows) {
    row.scenario.seed = seed;
    const SimOutcome o = run_scenario(row.scenario, replicates);
    std::string name = row.name;
    name.resize(10, ' ');
    std::string kq = std::to_string(row.scenario.questions_per_study);
    kq.insert(0, 5 - std::min<std::size_t>(5, kq.size()), ' ');
    out << name << kq << "  " << fmt::fixed(row.scenario.publication_censor_prob, 2) << "    "
        << fmt::fixed(o.summary.uniform, 4) << "   "
        << paint(fmt::fixed(o.summary.bilinear, 4), Verdict::Bilinear, color) << "    "
        << fmt::fixed(o.summary.ambiguous, 4) << "\n";
  }
  out << "replicates per scenario: " << replicates << ", seed: " << seed << "\n";
  return kExitOk;
}

int run_fixtures(std::ostream& out, const std::string& show) {
  if (!show.empty()) {
    const Fixture* f = find_fixture(show);
    if (f == nullptr) throw DataFailure{"no fixture named '" + show + "'"};
    out << f->content;
    return kExitOk;
  }
  for (const auto& f : fixtures()) out << f.name << "  " << f.description << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"metalens: p-value plot diagnostics for meta-analysis base studies"};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "derive p-values, plot and pool a study table");
  analyze_cmd->add_option("--input", analyze_args.input, "study CSV or fixture name")->required();
  analyze_cmd->add_option("--scale", analyze_args.scale, "raw or log")
      ->check(CLI::IsMember({"raw", "log"}));
  analyze_cmd->add_option("--alpha", analyze_args.alpha, "significance line")
      ->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--confidence", analyze_args.confidence, "confidence level of the limits")
      ->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--svg", analyze_args.svg, "write the p-value plot as SVG");
  analyze_cmd->add_option("--csv", analyze_args.csv, "write the plot points as CSV");
  analyze_cmd->add_option("--report", analyze_args.report, "write the markdown report");
  analyze_cmd->add_option("--counts", analyze_args.counts, "question ledger CSV or fixture name");
  analyze_cmd->add_option("--title", analyze_args.title, "SVG title");
  analyze_cmd->add_option("--ks-level", analyze_args.diagnosis.ks_level,
                          "KS level for the Uniform verdict");
  analyze_cmd->add_option("--component-ks-level", analyze_args.diagnosis.component_ks_level,
                          "KS level for the upper component in the Bilinear verdict");
  analyze_cmd->add_option("--rss-ratio", analyze_args.diagnosis.rss_ratio,
                          "two-segment RSS must fall below this fraction of the one-line RSS");
  analyze_cmd->add_option("--min-below", analyze_args.diagnosis.min_below,
                          "smallest count below alpha for a Bilinear verdict");

  SimulateArgs sim_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "run a bias/multiplicity Monte Carlo scenario");
  simulate_cmd->add_option("--scenario", sim_args.scenario, "key=value scenario file")->required();
  simulate_cmd->add_option("--replicates", sim_args.replicates, "number of replicates")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim_args.seed, "base seed, overrides the file")->required();
  simulate_cmd->add_option("--out", sim_args.out, "per-replicate CSV");
  simulate_cmd->add_option("--published", sim_args.published, "published estimates CSV");

  int cal_replicates = 500;
  std::uint64_t cal_seed = 1;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "verdict rates under honest vs p-hacked scenarios");
  calibrate_cmd->add_option("--replicates", cal_replicates, "replicates per scenario")->required()->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--seed", cal_seed, "base seed")->required();

  bool list = false;
  std::string show;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "list the bundled tables");
  fixtures_cmd->add_flag("--list", list, "list fixture names");
  fixtures_cmd->add_option("--show", show, "print one fixture");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const bool color = color_enabled(out);
  try {
    if (*analyze_cmd) return run_analyze(analyze_args, out, color);
    if (*simulate_cmd) return run_simulate(sim_args, out);
    if (*calibrate_cmd) return run_calibrate(cal_replicates, cal_seed, out, color);
    if (*fixtures_cmd) return run_fixtures(out, show);
  } catch (const DataFailure& e) {
    err << "error: " << e.message << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitData;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace metalens
