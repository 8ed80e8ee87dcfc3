#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "heartcast/error.hpp"
#include "heartcast/traits.hpp"

namespace heartcast {

using DemographicValue = std::variant<double, std::string>;
using Demographics = std::map<std::string, DemographicValue>;

/// An individual in a group. `own_window` holds the person's requirements on
/// partners, which the user must satisfy for a mutual match.
struct Person {
  std::string id;
  TraitVector traits;
  CompatibilityWindow own_window;
  Demographics demographics;
};

using SampleSet = std::vector<Person>;

/// Halfwidths of synthetic persons' own windows are drawn uniformly from
/// [min_halfwidth, max_halfwidth] per dimension.
struct WidthDistribution {
  double min_halfwidth = 0.25;
  double max_halfwidth = 0.5;
};

/// Clipped multivariate Gaussian population.
struct ParametricSpec {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;
  WidthDistribution own_window_halfwidth;
  /// attribute -> (value, weight) pairs; one categorical draw per person.
  std::map<std::string, std::vector<std::pair<std::string, double>>> demographics;
};

/// Population stored in a CSV file (`trait_1..trait_D,<demographic columns>`).
struct SampleFile {
  std::string path;
  WidthDistribution own_window_halfwidth;
};

using PopulationSource = std::variant<SampleSet, SampleFile, ParametricSpec>;

/// Keeps persons whose attribute is one of `allowed` (categorical) or lies in
/// [min, max] (numeric). Filters with lower importance are relaxed first.
struct DemographicFilter {
  std::string attribute;
  std::vector<std::string> allowed;
  std::optional<double> min;
  std::optional<double> max;
  double importance = 1.0;

  bool matches(const Person& person) const;
  std::string describe() const;
};

struct GroupModel {
  std::string id;
  PopulationSource population;
  double base_encounter_rate = 0.0;  // encounters per month
  bool established = true;
  double ramp_tau_months = 6.0;
  std::vector<double> mean_drift_per_year;  // empty means no drift
  std::vector<DemographicFilter> demographic_filters;

  void validate(const std::string& path = "group") const;
};

struct SubgroupSelection {
  std::vector<std::string> source_groups;
  std::vector<DemographicFilter> filters;
  SampleSet members;
  /// Intersection of the inputs before demographic filtering; relaxation
  /// draws from here when filters are dropped.
  SampleSet candidates;
  /// Uniform multiplier on the user's window halfwidths after widening.
  double window_scale = 1.0;
  RelaxationLog relaxation_log;
};

struct SignificancePolicy {
  std::size_t min_samples = 200;
  double widen_factor = 1.25;
  int max_widenings = 5;
};

/// Deterministic given (group, seed). Parametric draws are clipped to [0,1].
SampleSet load_population(const GroupModel& group, std::uint64_t seed,
                          std::optional<std::size_t> count_override = std::nullopt);

struct SampleRow {
  std::vector<double> traits;
  Demographics demographics;
};

/// Parses the population CSV format. Rows are numbered from 1 after the header.
std::vector<SampleRow> read_sample_csv(std::istream& in);
std::vector<SampleRow> read_sample_csv_file(const std::string& path);

/// Persons present (by id) in every input that satisfy all filters.
SubgroupSelection intersect_subgroups(std::span<const SampleSet> groups,
                                      std::vector<DemographicFilter> filters,
                                      std::vector<std::string> source_groups = {});

/// Number of members whose traits fall inside `window` with halfwidths scaled
/// by `scale`.
std::size_t count_in_window(const SampleSet& members, const CompatibilityWindow& window,
                            double scale = 1.0);

/// Widens the window self-similarly, then drops filters, until enough members
/// fall inside the window. Throws InsufficientDataError carrying the log.
SubgroupSelection ensure_significance(SubgroupSelection selection,
                                      const CompatibilityWindow& window,
                                      const SignificancePolicy& policy = {});

}  // namespace heartcast
