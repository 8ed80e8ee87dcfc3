#include "heartcast/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "gaussian.hpp"
#include "heartcast/rng.hpp"

namespace heartcast {

namespace {

constexpr std::uint64_t kPersonStream = 0x706f70756c617469ull;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

void check_widths(const WidthDistribution& w, const std::string& path) {
  if (!std::isfinite(w.min_halfwidth) || !std::isfinite(w.max_halfwidth) ||
      w.min_halfwidth < 0.0 || w.max_halfwidth < w.min_halfwidth) {
    throw ValidationError("own-window halfwidths need 0 <= min <= max", path);
  }
}

std::vector<double> draw_halfwidths(Rng& rng, std::size_t d, const WidthDistribution& w) {
  std::vector<double> out(d);
  for (auto& h : out) h = rng.uniform(w.min_halfwidth, w.max_halfwidth);
  return out;
}

void validate_parametric(const ParametricSpec& spec, const std::string& path) {
  if (spec.count < 1) throw ValidationError("population count must be >= 1", path + ".count");
  const std::size_t d = spec.mean.size();
  if (d == 0) throw ValidationError("mean must have at least one dimension", path + ".mean");
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(spec.mean[i])) {
      throw ValidationError("mean must be finite", path + ".mean[" + std::to_string(i) + "]");
    }
  }
  if (spec.covariance.size() != d) {
    throw ValidationError("covariance must be " + std::to_string(d) + "x" + std::to_string(d),
                          path + ".covariance");
  }
  Eigen::MatrixXd cov(d, d);
  double scale = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (spec.covariance[i].size() != d) {
      throw ValidationError("covariance row has wrong length",
                            path + ".covariance[" + std::to_string(i) + "]");
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double v = spec.covariance[i][j];
      if (!std::isfinite(v)) {
        throw ValidationError("covariance must be finite", path + ".covariance");
      }
      cov(i, j) = v;
      scale = std::max(scale, std::abs(v));
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-12 * scale) {
        throw ValidationError("covariance is not symmetric", path + ".covariance");
      }
    }
  }
  if (detail::min_eigenvalue(cov) < -1e-10 * scale) {
    throw ValidationError("covariance is not positive semidefinite", path + ".covariance");
  }
  check_widths(spec.own_window_halfwidth, path + ".own_window_halfwidth");
  for (const auto& [attribute, weights] : spec.demographics) {
    double total = 0.0;
    for (const auto& [value, weight] : weights) {
      if (!std::isfinite(weight) || weight < 0.0) {
        throw ValidationError("demographic weight must be nonnegative",
                              path + ".demographics." + attribute);
      }
      total += weight;
    }
    if (!(total > 0.0)) {
      throw ValidationError("demographic weights must not all be zero",
                            path + ".demographics." + attribute);
    }
  }
}

SampleSet generate_parametric(const GroupModel& group, const ParametricSpec& spec,
                              std::uint64_t seed, std::size_t count) {
  const std::size_t d = spec.mean.size();
  Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(spec.mean.data(), d);
  Eigen::MatrixXd cov(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) cov(i, j) = spec.covariance[i][j];
  const detail::PrincipalSampler sampler(mean, cov);

  SampleSet people;
  people.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Rng rng(stream_seed(seed, kPersonStream, n));
    const Eigen::VectorXd x = sampler.draw(rng);
    Person p;
    p.id = group.id + "#" + std::to_string(n);
    p.traits = TraitVector::clamped(std::vector<double>(x.data(), x.data() + d));
    p.own_window = centered_window(p.traits, draw_halfwidths(rng, d, spec.own_window_halfwidth));
    for (const auto& [attribute, weights] : spec.demographics) {
      double total = 0.0;
      for (const auto& w : weights) total += w.second;
      double u = rng.uniform() * total;
      std::string chosen = weights.back().first;
      for (const auto& [value, weight] : weights) {
        if (u < weight) {
          chosen = value;
          break;
        }
        u -= weight;
      }
      p.demographics[attribute] = chosen;
    }
    people.push_back(std::move(p));
  }
  return people;
}

SampleSet from_rows(const GroupModel& group, const std::vector<SampleRow>& rows,
                    const WidthDistribution& widths, std::uint64_t seed, std::size_t count) {
  SampleSet people;
  people.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const SampleRow& row = rows[n];
    Rng rng(stream_seed(seed, kPersonStream, n));
    Person p;
    p.id = group.id + "#" + std::to_string(n + 1);
    if (auto it = row.demographics.find("id"); it != row.demographics.end()) {
      p.id = std::visit(
          [](const auto& v) -> std::string {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::string>) {
              return v;
            } else {
              std::ostringstream s;
              s << v;
              return s.str();
            }
          },
          it->second);
    }
    p.traits = TraitVector(row.traits);
    p.own_window = centered_window(p.traits, draw_halfwidths(rng, row.traits.size(), widths));
    p.demographics = row.demographics;
    people.push_back(std::move(p));
  }
  return people;
}

std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

bool DemographicFilter::matches(const Person& person) const {
  const auto it = person.demographics.find(attribute);
  if (it == person.demographics.end()) return false;
  if (const auto* text = std::get_if<std::string>(&it->second)) {
    if (min || max) return false;
    return std::find(allowed.begin(), allowed.end(), *text) != allowed.end();
  }
  const double v = std::get<double>(it->second);
  if (!allowed.empty()) {
    return std::any_of(allowed.begin(), allowed.end(), [&](const std::string& a) {
      const auto parsed = parse_number(a);
      return parsed && *parsed == v;
    });
  }
  if (min && v < *min) return false;
  if (max && v > *max) return false;
  return true;
}

std::string DemographicFilter::describe() const {
  std::string out = attribute;
  if (!allowed.empty()) {
    out += " in {";
    for (std::size_t i = 0; i < allowed.size(); ++i) out += (i ? "," : "") + allowed[i];
    out += "}";
  } else {
    out += " in [" + (min ? format_number(*min) : std::string("-inf")) + "," +
           (max ? format_number(*max) : std::string("inf")) + "]";
  }
  return out;
}

void GroupModel::validate(const std::string& path) const {
  if (id.empty()) throw ValidationError("group id must not be empty", path + ".id");
  if (!std::isfinite(base_encounter_rate) || base_encounter_rate < 0.0) {
    throw ValidationError("base encounter rate must be >= 0", path + ".base_encounter_rate");
  }
  if (!std::isfinite(ramp_tau_months) || ramp_tau_months <= 0.0) {
    throw ValidationError("ramp tau must be > 0", path + ".ramp_tau_months");
  }
  for (std::size_t i = 0; i < mean_drift_per_year.size(); ++i) {
    if (!std::isfinite(mean_drift_per_year[i])) {
      throw ValidationError("drift must be finite",
                            path + ".mean_drift_per_year[" + std::to_string(i) + "]");
    }
  }
  for (std::size_t i = 0; i < demographic_filters.size(); ++i) {
    const auto& f = demographic_filters[i];
    const std::string fpath = path + ".demographic_filters[" + std::to_string(i) + "]";
    if (f.attribute.empty()) throw ValidationError("filter needs an attribute", fpath);
    if (f.allowed.empty() && !f.min && !f.max) {
      throw ValidationError("filter needs allowed values or a numeric range", fpath);
    }
    if (!std::isfinite(f.importance) || f.importance < 0.0) {
      throw ValidationError("filter importance must be >= 0", fpath + ".importance");
    }
  }
  if (const auto* spec = std::get_if<ParametricSpec>(&population)) {
    validate_parametric(*spec, path + ".population");
    if (!mean_drift_per_year.empty() && mean_drift_per_year.size() != spec->mean.size()) {
      throw ValidationError("drift dimension differs from population dimension",
                            path + ".mean_drift_per_year");
    }
  } else if (const auto* file = std::get_if<SampleFile>(&population)) {
    if (file->path.empty()) throw ValidationError("sample file path is empty", path + ".population.path");
    check_widths(file->own_window_halfwidth, path + ".population.own_window_halfwidth");
  } else {
    const auto& set = std::get<SampleSet>(population);
    if (set.empty()) throw ValidationError("sample set is empty", path + ".population");
  }
}

std::vector<SampleRow> read_sample_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("sample file is empty", 0, "header");
  const auto header = split_csv(line);
  std::size_t d = 0;
  while (d < header.size() && header[d] == "trait_" + std::to_string(d + 1)) ++d;
  if (d == 0) {
    throw IngestionError("header must start with trait_1", 0, header.empty() ? "" : header[0]);
  }
  for (std::size_t c = d; c < header.size(); ++c) {
    if (header[c].empty() || header[c].rfind("trait_", 0) == 0) {
      throw IngestionError("bad demographic column name '" + header[c] + "'", 0, header[c]);
    }
  }

  std::vector<SampleRow> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw IngestionError("row " + std::to_string(row_number) + " has " +
                               std::to_string(cells.size()) + " fields, expected " +
                               std::to_string(header.size()),
                           row_number, "");
    }
    SampleRow row;
    row.traits.reserve(d);
    for (std::size_t c = 0; c < d; ++c) {
      const auto v = parse_number(cells[c]);
      if (!v || !std::isfinite(*v) || *v < 0.0 || *v > 1.0) {
        throw IngestionError("row " + std::to_string(row_number) + " field " + header[c] +
                                 ": '" + cells[c] + "' is not a number in [0,1]",
                             row_number, header[c]);
      }
      row.traits.push_back(*v);
    }
    for (std::size_t c = d; c < header.size(); ++c) {
      if (auto v = parse_number(cells[c])) {
        row.demographics[header[c]] = *v;
      } else {
        row.demographics[header[c]] = cells[c];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SampleRow> read_sample_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open sample file '" + path + "'");
  try {
    return read_sample_csv(in);
  } catch (const IngestionError& e) {
    throw IngestionError(path + ": " + e.what(), e.row(), e.field());
  }
}

SampleSet load_population(const GroupModel& group, std::uint64_t seed,
                          std::optional<std::size_t> count_override) {
  group.validate("group " + group.id);
  return std::visit(
      [&](const auto& source) -> SampleSet {
        using T = std::decay_t<decltype(source)>;
        if constexpr (std::is_same_v<T, ParametricSpec>) {
          return generate_parametric(group, source, seed, count_override.value_or(source.count));
        } else if constexpr (std::is_same_v<T, SampleFile>) {
          const auto rows = read_sample_csv_file(source.path);
          const std::size_t n = std::min(rows.size(), count_override.value_or(rows.size()));
          return from_rows(group, rows, source.own_window_halfwidth, seed, n);
        } else {
          const std::size_t n = std::min(source.size(), count_override.value_or(source.size()));
          return SampleSet(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(n));
        }
      },
      group.population);
}

SubgroupSelection intersect_subgroups(std::span<const SampleSet> groups,
                                      std::vector<DemographicFilter> filters,
                                      std::vector<std::string> source_groups) {
  SubgroupSelection out;
  out.source_groups = std::move(source_groups);
  out.filters = std::move(filters);
  if (groups.empty()) return out;

  std::optional<std::size_t> dimension;
  for (const auto& set : groups) {
    for (const auto& p : set) {
      if (!dimension) dimension = p.traits.dimension();
      if (p.traits.dimension() != *dimension) {
        throw ValidationError("trait dimension mismatch between subgroups (person " + p.id + ")");
      }
    }
  }

  std::vector<std::unordered_set<std::string>> ids(groups.size());
  for (std::size_t g = 1; g < groups.size(); ++g) {
    for (const auto& p : groups[g]) ids[g].insert(p.id);
  }
  std::unordered_set<std::string> seen;
  for (const auto& p : groups[0]) {
    if (!seen.insert(p.id).second) continue;
    bool everywhere = true;
    for (std::size_t g = 1; g < groups.size() && everywhere; ++g) everywhere = ids[g].count(p.id) > 0;
    if (everywhere) out.candidates.push_back(p);
  }
  for (const auto& p : out.candidates) {
    if (std::all_of(out.filters.begin(), out.filters.end(),
                    [&](const DemographicFilter& f) { return f.matches(p); })) {
      out.members.push_back(p);
    }
  }
  return out;
}

std::size_t count_in_window(const SampleSet& members, const CompatibilityWindow& window,
                            double scale) {
  CompatibilityWindow scaled = window;
  for (double& h : scaled.halfwidths) h *= scale;
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [&](const Person& p) {
    return scaled.contains(p.traits.values());
  }));
}

SubgroupSelection ensure_significance(SubgroupSelection selection,
                                      const CompatibilityWindow& window,
                                      const SignificancePolicy& policy) {
  if (policy.min_samples < 1) throw ValidationError("min_samples must be >= 1", "min_samples");
  if (!(policy.widen_factor > 1.0)) throw ValidationError("widen factor must be > 1", "widen_factor");
  if (policy.max_widenings < 0) throw ValidationError("max_widenings must be >= 0", "max_widenings");

  std::size_t count = count_in_window(selection.members, window, selection.window_scale);
  if (count >= policy.min_samples) return selection;

  int step = 0;
  for (int w = 0; w < policy.max_widenings; ++w) {
    selection.window_scale *= policy.widen_factor;
    count = count_in_window(selection.members, window, selection.window_scale);
    std::ostringstream action;
    action << "widen window halfwidths to x" << selection.window_scale;
    selection.relaxation_log.push_back({++step, action.str(), count});
    if (count >= policy.min_samples) return selection;
  }

  std::vector<DemographicFilter> remaining = selection.filters;
  std::stable_sort(remaining.begin(), remaining.end(),
                   [](const auto& a, const auto& b) { return a.importance < b.importance; });
  while (!remaining.empty()) {
    const DemographicFilter dropped = remaining.front();
    remaining.erase(remaining.begin());
    selection.members.clear();
    for (const auto& p : selection.candidates) {
      if (std::all_of(remaining.begin(), remaining.end(),
                      [&](const DemographicFilter& f) { return f.matches(p); })) {
        selection.members.push_back(p);
      }
    }
    selection.filters = remaining;
    count = count_in_window(selection.members, window, selection.window_scale);
    selection.relaxation_log.push_back({++step, "drop filter " + dropped.describe(), count});
    if (count >= policy.min_samples) return selection;
  }

  std::string groups;
  for (const auto& g : selection.source_groups) groups += (groups.empty() ? "" : ",") + g;
  throw InsufficientDataError("subgroup '" + groups + "' has " + std::to_string(count) +
                                  " in-window members after relaxation, need " +
                                  std::to_string(policy.min_samples),
                              "population", selection.relaxation_log);
}

}  // namespace heartcast
