#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heartcast/matching.hpp"
#include "heartcast/parallel.hpp"
#include "heartcast/population.hpp"
#include "heartcast/sociology.hpp"
#include "heartcast/utility.hpp"

namespace heartcast {

inline constexpr int kSchemaVersion = 1;

struct UserProfile {
  TraitVector traits;
  CompatibilityWindow window;
  double extroversion = 0.5;
  /// Relationship amplitudes a_{1,i}; empty means window importances
  /// normalized to sum to one.
  std::vector<double> amplitudes;
  /// Relationship sensitivities w_{1,i}; empty means `sensitivity` on every trait.
  std::vector<double> sensitivities;
  double sensitivity = 1.0;
  SingleLifeParams single;
  /// Expected encounters over the horizon that count as a social_growth of 1.
  double reference_encounter_volume = 1000.0;

  std::vector<double> resolved_amplitudes() const;
  std::vector<double> resolved_sensitivities() const;
};

enum class RelationshipStatus { current, past };

/// An existing or previous partner. Missing partner amplitudes and
/// sensitivities are mirrored from the user.
struct RelationshipSpec {
  RelationshipStatus status = RelationshipStatus::current;
  double age_years = 0.0;  // time already spent together (current only)
  TraitVector partner_traits;
  CompatibilityWindow partner_window;
  std::vector<double> partner_amplitudes;
  std::vector<double> partner_sensitivities;
};

struct MonteCarloSettings {
  std::size_t suitors = 2000;
  std::size_t realizations = 2000;
  SignificancePolicy significance;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 42;
  double horizon_years = 10.0;
  double grid_step_months = 1.0;
  MonteCarloSettings mc;
  UserProfile user;
  std::optional<RelationshipSpec> relationship;
  std::vector<GroupModel> groups;
  std::vector<QualityBand> bands = default_bands();

  /// Throws ValidationError with a field path. Requires D >= 4.
  void validate() const;
};

enum class OptionKind { stay_in_relationship, single_closed, single_open };
std::string_view to_string(OptionKind kind);

enum class CurrentState { single, in_relationship };

struct OptionForecast {
  OptionKind kind = OptionKind::single_closed;
  UtilityCurve curve;
  double value = 0.0;  // time average of the mean curve over the horizon
};

struct Recommendation {
  OptionKind option = OptionKind::single_closed;
  double margin = 0.0;
  bool bands_overlap = false;
  std::string note;
};

struct Scores {
  double selectivity = 0.0;
  double social_growth = 0.0;  // expected encounters / reference volume
  double opportunity_1y = 0.0;
  double opportunity_5y = 0.0;
  double opportunity_10y = 0.0;
  std::optional<double> partner_quality_percentile;
};

struct GroupResult {
  std::string id;
  std::size_t population_size = 0;
  std::size_t in_window_members = 0;
  SubgroupSelection selection;
  EncounterProbabilityCurve probabilities;
  EncounterSchedule schedule;
};

/// Everything the pipeline computes before reporting.
struct PipelineState {
  const Scenario* scenario = nullptr;
  std::vector<double> grid_months;
  std::vector<GroupResult> groups;
  CumulativeForecast cumulative;
  SuitorSample suitors;
  std::vector<OptionForecast> options;
  bool partner_params_mirrored = false;
};

struct Report {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  std::vector<double> grid_months;
  CumulativeForecast cumulative;
  std::vector<GroupResult> groups;
  std::vector<OptionForecast> options;
  Recommendation recommendation;
  Scores scores;
  PenaltySummary penalty;
  bool partner_params_mirrored = false;
  std::size_t mc_suitors = 0;
  std::size_t mc_realizations = 0;
};

struct EngineOptions {
  std::size_t threads = default_thread_count();
};

/// Trapezoidal (1/T) * integral of the mean curve over its grid.
double time_average(const UtilityCurve& curve);

/// Argmax of option value. Exact ties go to the option that keeps the current
/// state (staying in a relationship, or staying single and closed).
Recommendation recommend(std::span<const OptionForecast> options, CurrentState state);

/// Linear interpolation of C at `months`, clamped to the grid.
double cumulative_at(const CumulativeForecast& forecast, double months);

Scores compute_scores(const PipelineState& state);
Report build_report(PipelineState state);

/// population -> matching -> sociology -> utility -> valuation -> report.
Report run_forecast(const Scenario& scenario, const EngineOptions& options = {});

}  // namespace heartcast
