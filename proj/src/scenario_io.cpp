#include "heartcast/scenario_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace heartcast {

namespace {

using nlohmann::json;

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string item(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Wraps one JSON object, rejecting keys outside the allowed set.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("expected an object", path_.empty() ? "$" : path_);
    std::set<std::string> keys;
    for (const char* k : allowed) keys.insert(k);
    for (const auto& [key, value] : j_.items()) {
      if (!keys.count(key)) throw ValidationError("unknown key '" + key + "'", child(path_, key));
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const {
    if (!has(key)) throw ValidationError("missing required field", child(path_, key));
    return j_.at(key);
  }
  std::string path(const char* key) const { return child(path_, key); }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ValidationError("expected a number", path(key));
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned()) throw ValidationError("expected a nonnegative integer", path(key));
    return v.get<std::uint64_t>();
  }
  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ValidationError("expected true or false", path(key));
    return at(key).get<bool>();
  }

  std::string string(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ValidationError("expected a string", path(key));
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const { return number_array(at(key), path(key)); }
  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
  }

  static std::vector<double> number_array(const json& v, const std::string& p) {
    if (!v.is_array()) throw ValidationError("expected an array of numbers", p);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ValidationError("expected a number", item(p, i));
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

const json& array_at(const ObjectReader& r, const char* key) {
  const json& v = r.at(key);
  if (!v.is_array()) throw ValidationError("expected an array", r.path(key));
  return v;
}

TraitVector traits_from(const ObjectReader& r, const char* key) {
  try {
    return TraitVector(r.numbers(key));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), r.path(key) + e.field_path());
  }
}

CompatibilityWindow parse_window(const json& j, const std::string& path) {
  ObjectReader r(j, path, {"centers", "halfwidths", "importances", "drift_per_year"});
  CompatibilityWindow w;
  w.centers = traits_from(r, "centers");
  w.halfwidths = r.numbers("halfwidths");
  w.importances = r.numbers("importances", std::vector<double>(w.centers.dimension(), 1.0));
  w.drift_per_year = r.number("drift_per_year", 0.0);
  return w;
}

WidthDistribution parse_widths(const ObjectReader& parent, const char* key) {
  WidthDistribution w;
  if (!parent.has(key)) return w;
  ObjectReader r(parent.at(key), parent.path(key), {"min", "max"});
  w.min_halfwidth = r.number("min", w.min_halfwidth);
  w.max_halfwidth = r.number("max", w.max_halfwidth);
  return w;
}

PopulationSource parse_population(const json& j, const std::string& path, const ParseOptions& options) {
  if (!j.is_object()) throw ValidationError("expected an object", path);
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("population needs kind \"parametric\" or \"samples\"", child(path, "kind"));
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "samples") {
    ObjectReader r(j, path, {"kind", "path", "own_window_halfwidth"});
    if (!options.allow_sample_files) {
      throw ValidationError("file-backed populations are not accepted here", r.path("path"));
    }
    SampleFile file;
    std::filesystem::path p = r.string("path");
    if (p.is_relative() && !options.base_dir.empty()) p = options.base_dir / p;
    file.path = p.string();
    file.own_window_halfwidth = parse_widths(r, "own_window_halfwidth");
    return file;
  }
  if (kind != "parametric") {
    throw ValidationError("unknown population kind '" + kind + "'", child(path, "kind"));
  }
  ObjectReader r(j, path, {"kind", "count", "mean", "covariance", "own_window_halfwidth", "demographics"});
  ParametricSpec spec;
  spec.count = static_cast<std::size_t>(r.unsigned_integer("count"));
  spec.mean = r.numbers("mean");
  const json& cov = array_at(r, "covariance");
  for (std::size_t i = 0; i < cov.size(); ++i) {
    spec.covariance.push_back(ObjectReader::number_array(cov[i], item(r.path("covariance"), i)));
  }
  spec.own_window_halfwidth = parse_widths(r, "own_window_halfwidth");
  if (r.has("demographics")) {
    const json& demo = r.at("demographics");
    if (!demo.is_object()) throw ValidationError("expected an object", r.path("demographics"));
    for (const auto& [attribute, weights] : demo.items()) {
      const std::string apath = child(r.path("demographics"), attribute);
      if (!weights.is_object() || weights.empty()) {
        throw ValidationError("expected an object of value weights", apath);
      }
      auto& entry = spec.demographics[attribute];
      for (const auto& [value, weight] : weights.items()) {
        if (!weight.is_number()) throw ValidationError("expected a number", child(apath, value));
        entry.emplace_back(value, weight.get<double>());
      }
    }
  }
  return spec;
}

DemographicFilter parse_filter(const json& j, const std::string& path) {
  ObjectReader r(j, path, {"attribute", "values", "min", "max", "importance"});
  DemographicFilter f;
  f.attribute = r.string("attribute");
  if (r.has("values")) {
    const json& values = array_at(r, "values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i].is_string()) {
        f.allowed.push_back(values[i].get<std::string>());
      } else if (values[i].is_number()) {
        f.allowed.push_back(format_number(values[i].get<double>()));
      } else {
        throw ValidationError("expected a string or number", item(r.path("values"), i));
      }
    }
  }
  if (r.has("min")) f.min = r.number("min");
  if (r.has("max")) f.max = r.number("max");
  f.importance = r.number("importance", 1.0);
  return f;
}

GroupModel parse_group(const json& j, const std::string& path, const ParseOptions& options) {
  ObjectReader r(j, path,
                 {"id", "population", "base_encounter_rate", "established", "ramp_tau_months",
                  "mean_drift_per_year", "demographic_filters"});
  GroupModel g;
  g.id = r.string("id");
  g.population = parse_population(r.at("population"), r.path("population"), options);
  g.base_encounter_rate = r.number("base_encounter_rate");
  g.established = r.boolean("established", true);
  g.ramp_tau_months = r.number("ramp_tau_months", 6.0);
  g.mean_drift_per_year = r.numbers("mean_drift_per_year", {});
  if (r.has("demographic_filters")) {
    const json& filters = array_at(r, "demographic_filters");
    for (std::size_t i = 0; i < filters.size(); ++i) {
      g.demographic_filters.push_back(parse_filter(filters[i], item(r.path("demographic_filters"), i)));
    }
  }
  return g;
}

UserProfile parse_user(const json& j, const std::string& path) {
  ObjectReader r(j, path,
                 {"traits", "window", "extroversion", "amplitudes", "sensitivities", "sensitivity",
                  "goals", "tau_single_years", "reference_encounter_volume"});
  UserProfile u;
  u.traits = traits_from(r, "traits");
  u.window = parse_window(r.at("window"), r.path("window"));
  u.extroversion = r.number("extroversion", 0.5);
  u.amplitudes = r.numbers("amplitudes", {});
  u.sensitivities = r.numbers("sensitivities", {});
  u.sensitivity = r.number("sensitivity", 1.0);
  const json& goals = array_at(r, "goals");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    ObjectReader g(goals[i], item(r.path("goals"), i), {"weight", "sustainability"});
    u.single.goals.push_back({g.number("weight"), g.number("sustainability")});
  }
  u.single.tau_single_years = r.number("tau_single_years");
  u.reference_encounter_volume = r.number("reference_encounter_volume", 1000.0);
  return u;
}

RelationshipSpec parse_relationship(const json& j, const std::string& path) {
  ObjectReader r(j, path,
                 {"status", "age_years", "partner_traits", "partner_window", "partner_amplitudes",
                  "partner_sensitivities"});
  RelationshipSpec s;
  if (r.has("status")) {
    const std::string status = r.string("status");
    if (status == "current") {
      s.status = RelationshipStatus::current;
    } else if (status == "past") {
      s.status = RelationshipStatus::past;
    } else {
      throw ValidationError("status must be \"current\" or \"past\"", r.path("status"));
    }
  }
  s.age_years = r.number("age_years", 0.0);
  s.partner_traits = traits_from(r, "partner_traits");
  s.partner_window = parse_window(r.at("partner_window"), r.path("partner_window"));
  s.partner_amplitudes = r.numbers("partner_amplitudes", {});
  s.partner_sensitivities = r.numbers("partner_sensitivities", {});
  return s;
}

nlohmann::ordered_json number_array_json(const std::vector<double>& values) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const double v : values) out.push_back(v);
  return out;
}

std::string csv_name(const std::string& raw) {
  std::string out;
  for (const char c : raw) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

std::string csv_curve(const std::vector<double>& grid, const std::vector<double>& values,
                      const UtilityBand* band = nullptr) {
  std::string out = band ? "t_months,value,p10,p90\n" : "t_months,value\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out += format_number(grid[k]) + "," + format_number(values[k]);
    if (band) out += "," + format_number(band->p10[k]) + "," + format_number(band->p90[k]);
    out += "\n";
  }
  return out;
}

}  // namespace

Scenario parse_scenario(const nlohmann::json& doc, const ParseOptions& options) {
  ObjectReader r(doc, "",
                 {"schema_version", "seed", "horizon_years", "grid_step_months", "mc", "user",
                  "relationship", "groups", "bands"});
  Scenario s;
  {
    const json& v = r.at("schema_version");
    if (!v.is_number_integer()) throw ValidationError("expected an integer", "schema_version");
    s.schema_version = v.get<int>();
    if (s.schema_version != kSchemaVersion) {
      throw ValidationError("unsupported schema_version " + std::to_string(s.schema_version),
                            "schema_version");
    }
  }
  s.seed = r.unsigned_integer("seed", 42);
  s.horizon_years = r.number("horizon_years");
  s.grid_step_months = r.number("grid_step_months", 1.0);
  if (r.has("mc")) {
    ObjectReader mc(r.at("mc"), "mc",
                    {"suitors", "realizations", "min_samples", "widen_factor", "max_widenings"});
    s.mc.suitors = mc.unsigned_integer("suitors", s.mc.suitors);
    s.mc.realizations = mc.unsigned_integer("realizations", s.mc.realizations);
    s.mc.significance.min_samples = mc.unsigned_integer("min_samples", s.mc.significance.min_samples);
    s.mc.significance.widen_factor = mc.number("widen_factor", s.mc.significance.widen_factor);
    s.mc.significance.max_widenings =
        static_cast<int>(mc.unsigned_integer("max_widenings", static_cast<std::uint64_t>(s.mc.significance.max_widenings)));
  }
  s.user = parse_user(r.at("user"), "user");
  if (r.has("relationship")) s.relationship = parse_relationship(r.at("relationship"), "relationship");
  const json& groups = array_at(r, "groups");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    s.groups.push_back(parse_group(groups[i], item("groups", i), options));
  }
  if (r.has("bands")) {
    s.bands.clear();
    const json& bands = array_at(r, "bands");
    for (std::size_t i = 0; i < bands.size(); ++i) {
      ObjectReader b(bands[i], item("bands", i), {"name", "lower", "upper", "ideal"});
      s.bands.push_back({b.string("name"), b.number("lower"), b.number("upper"), b.boolean("ideal", false)});
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot read scenario file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what(), "$");
  }
  ParseOptions options;
  options.base_dir = path.parent_path();
  return parse_scenario(doc, options);
}

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

nlohmann::ordered_json relaxation_log_json(const RelaxationLog& log) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& step : log) {
    out.push_back({{"step", step.step}, {"action", step.action}, {"resulting_count", step.resulting_count}});
  }
  return out;
}

nlohmann::ordered_json report_json(const Report& report) {
  using ojson = nlohmann::ordered_json;
  ojson out;
  out["schema_version"] = report.schema_version;
  out["seed"] = report.seed;
  out["grid_months"] = number_array_json(report.grid_months);

  const auto& c = report.cumulative;
  ojson cumulative;
  cumulative["total"] = number_array_json(c.total);
  ojson by_group = ojson::object();
  ojson hazard = ojson::object();
  for (std::size_t g = 0; g < c.group_ids.size(); ++g) {
    by_group[c.group_ids[g]] = number_array_json(c.by_group[g]);
    hazard[c.group_ids[g]] = number_array_json(c.group_hazard[g]);
  }
  ojson by_quality = ojson::object();
  for (std::size_t q = 0; q < c.band_names.size(); ++q) {
    by_quality[c.band_names[q]] = number_array_json(c.by_quality[q]);
  }
  cumulative["by_group"] = std::move(by_group);
  cumulative["by_quality"] = std::move(by_quality);
  cumulative["group_hazard"] = std::move(hazard);
  out["cumulative"] = std::move(cumulative);

  ojson groups = ojson::array();
  for (const auto& g : report.groups) {
    ojson entry;
    entry["id"] = g.id;
    entry["population_size"] = g.population_size;
    entry["members"] = g.selection.members.size();
    entry["in_window_members"] = g.in_window_members;
    entry["window_scale"] = g.selection.window_scale;
    ojson filters = ojson::array();
    for (const auto& f : g.selection.filters) filters.push_back(f.describe());
    entry["active_filters"] = std::move(filters);
    entry["relaxation_log"] = relaxation_log_json(g.selection.relaxation_log);
    ojson p;
    p["total"] = number_array_json(g.probabilities.total);
    ojson bands = ojson::object();
    for (std::size_t q = 0; q < c.band_names.size(); ++q) {
      bands[c.band_names[q]] = number_array_json(g.probabilities.by_band[q]);
    }
    p["by_band"] = std::move(bands);
    entry["encounter_probability"] = std::move(p);
    entry["encounter_rate"] = number_array_json(g.schedule.rate);
    entry["expected_encounters"] = number_array_json(g.schedule.cumulative);
    groups.push_back(std::move(entry));
  }
  out["groups"] = std::move(groups);

  ojson options = ojson::array();
  for (const auto& o : report.options) {
    ojson entry;
    entry["kind"] = std::string(to_string(o.kind));
    entry["value"] = o.value;
    entry["mean"] = number_array_json(o.curve.mean);
    if (o.curve.band) {
      entry["p10"] = number_array_json(o.curve.band->p10);
      entry["p90"] = number_array_json(o.curve.band->p90);
    }
    options.push_back(std::move(entry));
  }
  out["options"] = std::move(options);

  const auto& rec = report.recommendation;
  out["recommendation"] = {{"option", std::string(to_string(rec.option))},
                           {"margin", rec.margin},
                           {"bands_overlap", rec.bands_overlap},
                           {"note", rec.note}};

  const auto& s = report.scores;
  ojson scores;
  scores["selectivity"] = s.selectivity;
  scores["social_growth"] = s.social_growth;
  scores["social_growth_unit"] = "expected encounters over the horizon / reference_encounter_volume";
  scores["opportunity_1y"] = s.opportunity_1y;
  scores["opportunity_5y"] = s.opportunity_5y;
  scores["opportunity_10y"] = s.opportunity_10y;
  scores["partner_quality_percentile"] =
      s.partner_quality_percentile ? ojson(*s.partner_quality_percentile) : ojson(nullptr);
  out["scores"] = std::move(scores);

  out["penalty"] = {{"suitor_mean", report.penalty.mean},
                    {"suitor_stddev", report.penalty.stddev},
                    {"partner", report.penalty.partner ? ojson(*report.penalty.partner) : ojson(nullptr)}};
  out["partner_params_mirrored"] = report.partner_params_mirrored;
  out["mc"] = {{"suitors", report.mc_suitors}, {"realizations", report.mc_realizations}};
  return out;
}

std::string render_report(const Report& report) { return report_json(report).dump(2) + "\n"; }

std::vector<std::pair<std::string, std::string>> report_csv_bundle(const Report& report) {
  std::vector<std::pair<std::string, std::string>> files;
  const auto& c = report.cumulative;
  const auto& grid = report.grid_months;
  files.emplace_back("cumulative_total.csv", csv_curve(grid, c.total));
  for (std::size_t g = 0; g < c.group_ids.size(); ++g) {
    files.emplace_back("cumulative_group_" + csv_name(c.group_ids[g]) + ".csv", csv_curve(grid, c.by_group[g]));
  }
  for (std::size_t q = 0; q < c.band_names.size(); ++q) {
    files.emplace_back("cumulative_quality_" + csv_name(c.band_names[q]) + ".csv",
                       csv_curve(grid, c.by_quality[q]));
  }
  for (const auto& g : report.groups) {
    files.emplace_back("encounter_probability_" + csv_name(g.id) + ".csv",
                       csv_curve(grid, g.probabilities.total));
  }
  for (const auto& o : report.options) {
    files.emplace_back("option_" + std::string(to_string(o.kind)) + ".csv",
                       csv_curve(grid, o.curve.mean, o.curve.band ? &*o.curve.band : nullptr));
  }
  return files;
}

void write_csv_bundle(const Report& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError(directory.string(), "cannot create output directory '" + directory.string() + "'");
  for (const auto& [name, content] : report_csv_bundle(report)) {
    const auto path = directory / name;
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw IoError(path.string(), "cannot write '" + path.string() + "'");
  }
}

}  // namespace heartcast
