#include "heartcast/sociology.hpp"

#include <cmath>

#include "heartcast/error.hpp"

namespace heartcast {

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw ValidationError("time grid must start at 0", "grid");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ValidationError("time grid must be strictly increasing", "grid");
  }
}

double step_hazard(double p, double encounters) {
  if (encounters <= 0.0 || p <= 0.0) return 0.0;
  const double per_encounter = p >= 1.0 ? kCappedEncounterHazard : -std::log1p(-p);
  return encounters * per_encounter;
}

}  // namespace

double CumulativeForecast::total_hazard(std::size_t k) const {
  double h = 0.0;
  for (const auto& g : group_hazard) h += g[k];
  return h;
}

std::vector<double> make_grid(double horizon_months, double step_months) {
  if (!(horizon_months > 0.0) || !std::isfinite(horizon_months)) {
    throw ValidationError("horizon must be > 0", "horizon_years");
  }
  if (!(step_months > 0.0) || !std::isfinite(step_months)) {
    throw ValidationError("grid step must be > 0", "grid_step_months");
  }
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor(horizon_months / step_months + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * step_months);
  if (horizon_months - grid.back() > 1e-9 * horizon_months) grid.push_back(horizon_months);
  return grid;
}

EncounterSchedule encounter_schedule(const GroupModel& group, double extroversion,
                                     std::span<const double> grid_months) {
  if (!std::isfinite(group.base_encounter_rate) || group.base_encounter_rate < 0.0) {
    throw ValidationError("base encounter rate must be >= 0", "base_encounter_rate");
  }
  if (!(extroversion >= 0.0 && extroversion <= 1.0)) {
    throw ValidationError("extroversion must be in [0,1]", "user.extroversion");
  }
  if (!group.established && !(group.ramp_tau_months > 0.0)) {
    throw ValidationError("ramp tau must be > 0", "ramp_tau_months");
  }
  check_grid(grid_months);

  const double rate = group.base_encounter_rate * (0.5 + extroversion);
  const double tau = group.ramp_tau_months;
  EncounterSchedule s;
  s.group_id = group.id;
  s.grid_months.assign(grid_months.begin(), grid_months.end());
  for (const double t : grid_months) {
    if (group.established) {
      s.rate.push_back(rate);
      s.cumulative.push_back(rate * t);
    } else {
      s.rate.push_back(-rate * std::expm1(-t / tau));
      s.cumulative.push_back(rate * (t + tau * std::expm1(-t / tau)));
    }
  }
  return s;
}

CumulativeForecast cumulative_forecast(std::span<const EncounterProbabilityCurve> curves,
                                       std::span<const EncounterSchedule> schedules,
                                       std::span<const QualityBand> bands) {
  if (curves.size() != schedules.size()) {
    throw ValidationError("probability curves and schedules differ in group count");
  }
  if (curves.empty()) throw ValidationError("at least one group is required", "groups");
  const auto& grid = schedules.front().grid_months;
  check_grid(grid);
  const std::size_t steps = grid.size();
  const std::size_t groups = curves.size();
  const std::size_t nbands = bands.size();

  for (std::size_t g = 0; g < groups; ++g) {
    const auto& c = curves[g];
    const auto& s = schedules[g];
    if (c.group_id != s.group_id) {
      throw ValidationError("group ids differ: '" + c.group_id + "' vs '" + s.group_id + "'");
    }
    if (c.grid_months != grid || s.grid_months != grid || s.cumulative.size() != steps ||
        c.total.size() != steps) {
      throw ValidationError("group '" + c.group_id + "' is not on the shared time grid");
    }
    if (c.by_band.size() != nbands) {
      throw ValidationError("group '" + c.group_id + "' has the wrong number of quality bands");
    }
    for (std::size_t k = 0; k < steps; ++k) {
      if (!(c.total[k] >= 0.0 && c.total[k] <= 1.0)) {
        throw ValidationError("encounter probability outside [0,1] for group '" + c.group_id + "'");
      }
    }
  }

  CumulativeForecast f;
  f.grid_months = grid;
  f.total.assign(steps, 0.0);
  for (const auto& c : curves) f.group_ids.push_back(c.group_id);
  for (const auto& b : bands) f.band_names.push_back(b.name);
  f.by_group.assign(groups, std::vector<double>(steps, 0.0));
  f.group_hazard.assign(groups, std::vector<double>(steps, 0.0));
  f.by_quality.assign(nbands, std::vector<double>(steps, 0.0));
  f.group_band_hazard.assign(groups,
                             std::vector<std::vector<double>>(nbands, std::vector<double>(steps, 0.0)));

  double hazard = 0.0;
  std::vector<double> group_step(groups);
  std::vector<double> band_step(nbands);
  for (std::size_t k = 1; k < steps; ++k) {
    double step_total = 0.0;
    std::fill(band_step.begin(), band_step.end(), 0.0);
    for (std::size_t g = 0; g < groups; ++g) {
      const double p = curves[g].total[k];
      const double encounters = schedules[g].cumulative[k] - schedules[g].cumulative[k - 1];
      const double h = step_hazard(p, encounters);
      group_step[g] = h;
      step_total += h;
      f.group_hazard[g][k] = f.group_hazard[g][k - 1] + h;
      for (std::size_t q = 0; q < nbands; ++q) {
        const double share = p > 0.0 ? h * curves[g].by_band[q][k] / p : 0.0;
        band_step[q] += share;
        f.group_band_hazard[g][q][k] = f.group_band_hazard[g][q][k - 1] + share;
      }
    }
    hazard += step_total;
    f.total[k] = -std::expm1(-hazard);
    const double increase = f.total[k] - f.total[k - 1];
    double band_total = 0.0;
    for (const double b : band_step) band_total += b;
    for (std::size_t g = 0; g < groups; ++g) {
      f.by_group[g][k] =
          f.by_group[g][k - 1] + (step_total > 0.0 ? increase * group_step[g] / step_total : 0.0);
    }
    for (std::size_t q = 0; q < nbands; ++q) {
      f.by_quality[q][k] =
          f.by_quality[q][k - 1] + (band_total > 0.0 ? increase * band_step[q] / band_total : 0.0);
    }
  }
  return f;
}

}  // namespace heartcast
