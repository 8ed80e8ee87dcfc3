#include "heartcast/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "heartcast/error.hpp"
#include "heartcast/forecast.hpp"
#include "heartcast/scenario_io.hpp"

namespace heartcast {

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.scenario_path.empty() || config.output_path.empty()) {
      err << "error: scenario and output paths must not be empty\n";
      return kExitValidation;
    }
    Scenario scenario = load_scenario_file(config.scenario_path);
    if (config.seed) scenario.seed = *config.seed;
    if (config.mc_suitors) scenario.mc.suitors = *config.mc_suitors;
    if (config.mc_realizations) scenario.mc.realizations = *config.mc_realizations;

    const Report report = run_forecast(scenario);
    if (config.emit == EmitFormat::json) {
      std::ofstream file(config.output_path, std::ios::binary);
      if (!file || !(file << render_report(report))) {
        throw IoError(config.output_path, "cannot write report to '" + config.output_path + "'");
      }
    } else {
      write_csv_bundle(report, config.output_path);
    }
    if (config.verbosity > 0) {
      out << "recommendation: " << to_string(report.recommendation.option)
          << " (margin " << report.recommendation.margin << ")\n";
      for (const auto& o : report.options) out << "  " << to_string(o.kind) << ": " << o.value << "\n";
      out << "opportunity 1y/5y/10y: " << report.scores.opportunity_1y << " / "
          << report.scores.opportunity_5y << " / " << report.scores.opportunity_10y << "\n";
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InsufficientDataError& e) {
    err << "error: insufficient data (" << e.module() << "): " << e.what() << "\n";
    err << "relaxation_log: " << relaxation_log_json(e.relaxation_log()).dump() << "\n";
    return kExitInsufficientData;
  } catch (const ValidationError& e) {
    err << "error: invalid scenario";
    if (!e.field_path().empty()) err << " at " << e.field_path();
    err << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int execute(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forecast romantic options from a scenario file", "heartcast"};
  app.require_subcommand(1);

  RunConfig config;
  std::uint64_t seed = 0;
  std::size_t suitors = 0;
  std::size_t realizations = 0;
  auto* forecast = app.add_subcommand("forecast", "Run a scenario and write the report");
  forecast->add_option("--scenario", config.scenario_path, "Scenario JSON file")->required();
  forecast->add_option("--out", config.output_path, "Report file (json) or directory (csv-bundle)")
      ->required();
  const std::map<std::string, EmitFormat> formats{{"json", EmitFormat::json},
                                                  {"csv-bundle", EmitFormat::csv_bundle}};
  forecast->add_option("--emit", config.emit, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  auto* seed_opt = forecast->add_option("--seed", seed, "Override the scenario seed");
  auto* suitors_opt = forecast->add_option("--mc-suitors", suitors, "Override mc.suitors")
                          ->check(CLI::PositiveNumber);
  auto* realizations_opt =
      forecast->add_option("--mc-realizations", realizations, "Override mc.realizations")
          ->check(CLI::PositiveNumber);
  forecast->add_flag("-v,--verbose", config.verbosity, "Print a summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }
  if (*seed_opt) config.seed = seed;
  if (*suitors_opt) config.mc_suitors = suitors;
  if (*realizations_opt) config.mc_realizations = realizations;
  return run(config, out, err);
}

}  // namespace heartcast
