#pragma once

#include <span>
#include <string>
#include <vector>

#include "heartcast/matching.hpp"
#include "heartcast/population.hpp"

namespace heartcast {

/// Expected encounters with one group over a month grid.
struct EncounterSchedule {
  std::string group_id;
  std::vector<double> grid_months;
  std::vector<double> rate;        // encounters per month at each grid time
  std::vector<double> cumulative;  // expected encounters since t = 0
};

/// Per-encounter hazard used when p = 1 exactly. Larger than -ln(1 - p) for
/// every representable p < 1, so the hazard stays monotone in p.
inline constexpr double kCappedEncounterHazard = 40.0;

/// Total match probability with additive attributions.
///
/// Survival multiplies (1 - p_G)^dn_G over groups and steps, using expected
/// (non-integer) encounter counts. Each step's increase in C is split across
/// groups, and across quality bands, in proportion to that step's hazard, so
/// every attributed series is nondecreasing and the parts sum to the total.
struct CumulativeForecast {
  std::vector<double> grid_months;
  std::vector<double> total;  // C(t_k)

  std::vector<std::string> group_ids;
  std::vector<std::vector<double>> by_group;      // [group][k]
  std::vector<std::vector<double>> group_hazard;  // H_G(t_k)

  std::vector<std::string> band_names;
  std::vector<std::vector<double>> by_quality;    // [band][k]
  std::vector<std::vector<std::vector<double>>> group_band_hazard;  // H_{G,q}(t_k)

  double total_hazard(std::size_t k) const;
};

/// Month grid 0, step, 2*step, ... up to and including the horizon.
std::vector<double> make_grid(double horizon_months, double step_months);

/// Rate base * (0.5 + extroversion) * ramp(t); ramp is 1 for established
/// groups and 1 - exp(-t / tau) otherwise. Cumulative counts are the exact
/// integral of that rate.
EncounterSchedule encounter_schedule(const GroupModel& group, double extroversion,
                                     std::span<const double> grid_months);

CumulativeForecast cumulative_forecast(std::span<const EncounterProbabilityCurve> curves,
                                       std::span<const EncounterSchedule> schedules,
                                       std::span<const QualityBand> bands);

}  // namespace heartcast
