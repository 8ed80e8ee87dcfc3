#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heartcast/error.hpp"
#include "heartcast/forecast.hpp"

namespace heartcast {

struct ParseOptions {
  /// Directory that relative sample-file paths resolve against.
  std::filesystem::path base_dir;
  bool allow_sample_files = true;
};

/// Strict scenario decoding: unknown keys and wrong types are ValidationErrors
/// carrying the JSON path of the offending field. The result is validated.
Scenario parse_scenario(const nlohmann::json& doc, const ParseOptions& options = {});

/// Throws IoError when the file cannot be read and ValidationError when it is
/// not a valid scenario.
Scenario load_scenario_file(const std::filesystem::path& path);

nlohmann::ordered_json report_json(const Report& report);

/// Canonical report text shared by the CLI and the HTTP service.
std::string render_report(const Report& report);

nlohmann::ordered_json relaxation_log_json(const RelaxationLog& log);

/// `%.17g` formatting used by CSV output.
std::string format_number(double value);

/// One CSV per curve, `t_months,value[,p10,p90]`. Pairs of (file name, content).
std::vector<std::pair<std::string, std::string>> report_csv_bundle(const Report& report);

void write_csv_bundle(const Report& report, const std::filesystem::path& directory);

}  // namespace heartcast
