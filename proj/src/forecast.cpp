#include "heartcast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "heartcast/error.hpp"
#include "heartcast/rng.hpp"

namespace heartcast {

namespace {

constexpr std::uint64_t kPopulationStream = 1;
constexpr std::uint64_t kSuitorSeedStream = 2;
constexpr std::uint64_t kRolloutSeedStream = 3;

std::vector<double> normalized(std::vector<double> values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  for (double& v : values) v /= sum;
  return values;
}

void check_dimension(std::size_t actual, std::size_t d, const std::string& path) {
  if (actual != d) {
    throw ValidationError("expected " + std::to_string(d) + " values, got " + std::to_string(actual),
                          path);
  }
}

std::size_t population_dimension(const PopulationSource& source) {
  if (const auto* spec = std::get_if<ParametricSpec>(&source)) return spec->mean.size();
  if (const auto* set = std::get_if<SampleSet>(&source)) {
    return set->empty() ? 0 : set->front().traits.dimension();
  }
  return 0;  // file-backed, checked after loading
}

}  // namespace

std::vector<double> UserProfile::resolved_amplitudes() const {
  if (!amplitudes.empty()) return amplitudes;
  return normalized(window.importances);
}

std::vector<double> UserProfile::resolved_sensitivities() const {
  if (!sensitivities.empty()) return sensitivities;
  return std::vector<double>(traits.dimension(), sensitivity);
}

void Scenario::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ValidationError("unsupported schema_version " + std::to_string(schema_version),
                          "schema_version");
  }
  if (!(horizon_years > 0.0) || !std::isfinite(horizon_years)) {
    throw ValidationError("horizon must be > 0", "horizon_years");
  }
  if (!(grid_step_months > 0.0) || !std::isfinite(grid_step_months) ||
      grid_step_months > horizon_years * 12.0) {
    throw ValidationError("grid step must be > 0 and within the horizon", "grid_step_months");
  }
  if (mc.suitors < 1) throw ValidationError("need at least one suitor", "mc.suitors");
  if (mc.realizations < 1) throw ValidationError("need at least one realization", "mc.realizations");
  if (mc.significance.min_samples < 1) throw ValidationError("min_samples must be >= 1", "mc.min_samples");
  if (!(mc.significance.widen_factor > 1.0)) {
    throw ValidationError("widen_factor must be > 1", "mc.widen_factor");
  }
  if (mc.significance.max_widenings < 0) {
    throw ValidationError("max_widenings must be >= 0", "mc.max_widenings");
  }

  const std::size_t d = user.traits.dimension();
  if (d < 4) {
    throw ValidationError("at least 4 trait dimensions are required, got " + std::to_string(d),
                          "user.traits");
  }
  user.window.validate("user.window");
  check_dimension(user.window.dimension(), d, "user.window.centers");
  if (!(user.extroversion >= 0.0 && user.extroversion <= 1.0)) {
    throw ValidationError("extroversion must be in [0,1]", "user.extroversion");
  }
  if (!user.amplitudes.empty()) {
    check_dimension(user.amplitudes.size(), d, "user.amplitudes");
  }
  if (!user.sensitivities.empty()) check_dimension(user.sensitivities.size(), d, "user.sensitivities");
  for (std::size_t i = 0; i < user.amplitudes.size(); ++i) {
    if (!std::isfinite(user.amplitudes[i]) || user.amplitudes[i] < 0.0) {
      throw ValidationError("amplitude must be >= 0", "user.amplitudes[" + std::to_string(i) + "]");
    }
  }
  for (std::size_t i = 0; i < user.sensitivities.size(); ++i) {
    if (!std::isfinite(user.sensitivities[i]) || user.sensitivities[i] < 0.0) {
      throw ValidationError("sensitivity must be >= 0",
                            "user.sensitivities[" + std::to_string(i) + "]");
    }
  }
  if (!std::isfinite(user.sensitivity) || user.sensitivity < 0.0) {
    throw ValidationError("sensitivity must be >= 0", "user.sensitivity");
  }
  {
    double sum = 0.0;
    for (const double a : user.resolved_amplitudes()) sum += a;
    if (!(sum > 0.0)) throw ValidationError("amplitudes must not all be zero", "user.amplitudes");
  }
  user.single.validate("user");
  if (!(user.reference_encounter_volume > 0.0) || !std::isfinite(user.reference_encounter_volume)) {
    throw ValidationError("reference encounter volume must be > 0", "user.reference_encounter_volume");
  }

  if (relationship) {
    const auto& r = *relationship;
    if (r.partner_traits.dimension() == 0) {
      throw ValidationError("partner traits are required", "relationship.partner_traits");
    }
    check_dimension(r.partner_traits.dimension(), d, "relationship.partner_traits");
    r.partner_window.validate("relationship.partner_window");
    check_dimension(r.partner_window.dimension(), d, "relationship.partner_window.centers");
    if (!r.partner_amplitudes.empty()) {
      check_dimension(r.partner_amplitudes.size(), d, "relationship.partner_amplitudes");
    }
    if (!r.partner_sensitivities.empty()) {
      check_dimension(r.partner_sensitivities.size(), d, "relationship.partner_sensitivities");
    }
    if (!(r.age_years >= 0.0) || !std::isfinite(r.age_years)) {
      throw ValidationError("relationship age must be >= 0", "relationship.age_years");
    }
  }

  if (groups.empty()) throw ValidationError("at least one group is required", "groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string path = "groups[" + std::to_string(g) + "]";
    groups[g].validate(path);
    const std::size_t gd = population_dimension(groups[g].population);
    if (gd != 0) check_dimension(gd, d, path + ".population");
    if (!groups[g].mean_drift_per_year.empty()) {
      check_dimension(groups[g].mean_drift_per_year.size(), d, path + ".mean_drift_per_year");
    }
    for (std::size_t h = 0; h < g; ++h) {
      if (groups[h].id == groups[g].id) throw ValidationError("duplicate group id", path + ".id");
    }
  }
  validate_bands(bands, "bands");
}

std::string_view to_string(OptionKind kind) {
  switch (kind) {
    case OptionKind::stay_in_relationship: return "stay_in_relationship";
    case OptionKind::single_closed: return "single_closed";
    case OptionKind::single_open: return "single_open";
  }
  return "unknown";
}

double time_average(const UtilityCurve& curve) {
  const auto& t = curve.grid_months;
  const auto& u = curve.mean;
  if (t.size() != u.size() || t.empty()) throw ValidationError("curve grid and values differ");
  if (t.size() == 1) return u.front();
  double area = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) area += 0.5 * (u[k] + u[k - 1]) * (t[k] - t[k - 1]);
  return area / (t.back() - t.front());
}

Recommendation recommend(std::span<const OptionForecast> options, CurrentState state) {
  if (options.empty()) throw ValidationError("no options to recommend from");
  const OptionKind status_quo = state == CurrentState::in_relationship
                                    ? OptionKind::stay_in_relationship
                                    : OptionKind::single_closed;
  std::size_t best = 0;
  for (std::size_t i = 1; i < options.size(); ++i) {
    if (options[i].value > options[best].value ||
        (options[i].value == options[best].value && options[i].kind == status_quo &&
         options[best].kind != status_quo)) {
      best = i;
    }
  }
  Recommendation rec;
  rec.option = options[best].kind;
  if (options.size() == 1) {
    rec.note = "only one option was evaluated";
    return rec;
  }
  std::size_t runner_up = best == 0 ? 1 : 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i != best && options[i].value > options[runner_up].value) runner_up = i;
  }
  rec.margin = options[best].value - options[runner_up].value;

  const auto& a = options[best].curve;
  const auto& b = options[runner_up].curve;
  for (std::size_t k = 0; k < a.mean.size() && k < b.mean.size(); ++k) {
    const double a_lo = a.band ? a.band->p10[k] : a.mean[k];
    const double a_hi = a.band ? a.band->p90[k] : a.mean[k];
    const double b_lo = b.band ? b.band->p10[k] : b.mean[k];
    const double b_hi = b.band ? b.band->p90[k] : b.mean[k];
    if (std::max(a_lo, b_lo) <= std::min(a_hi, b_hi)) {
      rec.bands_overlap = true;
      break;
    }
  }
  rec.note = std::string(to_string(rec.option)) +
             (rec.bands_overlap ? " leads, but its p10-p90 band overlaps "
                                : " leads, with its p10-p90 band clear of ") +
             std::string(to_string(options[runner_up].kind)) +
             (rec.bands_overlap ? " at some point in the horizon" : " across the horizon");
  return rec;
}

double cumulative_at(const CumulativeForecast& forecast, double months) {
  const auto& t = forecast.grid_months;
  const auto& c = forecast.total;
  if (t.empty()) return 0.0;
  if (months <= t.front()) return c.front();
  if (months >= t.back()) return c.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), months) - t.begin());
  const std::size_t lo = hi - 1;
  const double w = (months - t[lo]) / (t[hi] - t[lo]);
  return c[lo] + w * (c[hi] - c[lo]);
}

Scores compute_scores(const PipelineState& state) {
  const Scenario& scenario = *state.scenario;
  Scores s;
  double weight = 0.0;
  double weighted_p = 0.0;
  double encounters = 0.0;
  for (const auto& g : state.groups) {
    const auto n = static_cast<double>(g.selection.members.size());
    weight += n;
    weighted_p += n * g.probabilities.total.front();
    encounters += g.schedule.cumulative.back();
  }
  s.selectivity = weight > 0.0 ? 1.0 - weighted_p / weight : 1.0;
  s.social_growth = encounters / scenario.user.reference_encounter_volume;
  s.opportunity_1y = cumulative_at(state.cumulative, 12.0);
  s.opportunity_5y = cumulative_at(state.cumulative, 60.0);
  s.opportunity_10y = cumulative_at(state.cumulative, 120.0);

  if (scenario.relationship) {
    const auto& window = scenario.user.window;
    const double partner = quality_score(scenario.relationship->partner_traits.values(), window).value_or(-1.0);
    std::size_t below = 0;
    for (const auto& suitor : state.suitors.suitors) {
      if (quality_score(suitor.values(), window).value_or(-1.0) < partner) ++below;
    }
    s.partner_quality_percentile =
        state.suitors.suitors.empty()
            ? 0.0
            : static_cast<double>(below) / static_cast<double>(state.suitors.suitors.size());
  }
  return s;
}

Report build_report(PipelineState state) {
  const Scenario& scenario = *state.scenario;
  Report r;
  r.seed = scenario.seed;
  r.scores = compute_scores(state);
  r.penalty = penalty_profile(
      state.suitors, scenario.user.window, scenario.user.resolved_sensitivities(),
      scenario.relationship ? std::optional<TraitVector>(scenario.relationship->partner_traits)
                            : std::nullopt);
  r.recommendation = recommend(state.options, scenario.relationship &&
                                                      scenario.relationship->status ==
                                                          RelationshipStatus::current
                                                  ? CurrentState::in_relationship
                                                  : CurrentState::single);
  r.grid_months = std::move(state.grid_months);
  r.cumulative = std::move(state.cumulative);
  r.groups = std::move(state.groups);
  r.options = std::move(state.options);
  r.partner_params_mirrored = state.partner_params_mirrored;
  r.mc_suitors = scenario.mc.suitors;
  r.mc_realizations = scenario.mc.realizations;
  return r;
}

Report run_forecast(const Scenario& scenario, const EngineOptions& options) {
  scenario.validate();
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  const auto& user = scenario.user;

  PipelineState state;
  state.scenario = &scenario;
  state.grid_months = make_grid(scenario.horizon_years * 12.0, scenario.grid_step_months);

  // population + matching
  for (std::size_t g = 0; g < scenario.groups.size(); ++g) {
    const GroupModel& group = scenario.groups[g];
    GroupResult result;
    result.id = group.id;
    try {
      SampleSet population = load_population(group, stream_seed(scenario.seed, kPopulationStream, g));
      result.population_size = population.size();
      for (const auto& p : population) {
        if (p.traits.dimension() != user.traits.dimension()) {
          throw ValidationError("population trait dimension differs from the user's",
                                "groups[" + std::to_string(g) + "].population");
        }
      }
      const SampleSet inputs[] = {std::move(population)};
      result.selection = ensure_significance(
          intersect_subgroups(inputs, group.demographic_filters, {group.id}), user.window,
          scenario.mc.significance);
    } catch (const InsufficientDataError& e) {
      throw InsufficientDataError("group '" + group.id + "': " + e.what(), e.module(),
                                  e.relaxation_log());
    }
    result.in_window_members =
        count_in_window(result.selection.members, user.window, result.selection.window_scale);
    result.probabilities = encounter_probabilities(result.selection, user.traits, user.window,
                                                   scenario.bands, state.grid_months,
                                                   group.mean_drift_per_year, threads);
    result.probabilities.group_id = group.id;
    result.schedule = encounter_schedule(group, user.extroversion, state.grid_months);
    state.groups.push_back(std::move(result));
  }

  // sociology
  std::vector<EncounterProbabilityCurve> curves;
  std::vector<EncounterSchedule> schedules;
  for (const auto& g : state.groups) {
    curves.push_back(g.probabilities);
    schedules.push_back(g.schedule);
  }
  state.cumulative = cumulative_forecast(curves, schedules, scenario.bands);

  // utility
  SubgroupSelection accessible;
  for (const auto& g : state.groups) {
    accessible.source_groups.push_back(g.id);
    accessible.members.insert(accessible.members.end(), g.selection.members.begin(),
                              g.selection.members.end());
  }
  state.suitors = sample_suitors(accessible, scenario.mc.suitors,
                                 stream_seed(scenario.seed, kSuitorSeedStream), threads);

  const std::vector<double> user_amplitudes = user.resolved_amplitudes();
  const std::vector<double> user_sensitivities = user.resolved_sensitivities();
  const PartnerSide user_side{user_amplitudes, user_sensitivities, user.window.centers, user.traits};
  const RelationshipBuilder build = [&](const TraitVector& suitor) {
    RelationshipParams p;
    p.sides[0] = user_side;
    p.sides[1] = PartnerSide{normalized(user_amplitudes), user_sensitivities, suitor, suitor};
    return p;
  };

  const auto& grid = state.grid_months;
  if (scenario.relationship) {
    const auto& r = *scenario.relationship;
    state.partner_params_mirrored = r.partner_amplitudes.empty() || r.partner_sensitivities.empty();
    RelationshipParams params;
    params.sides[0] = user_side;
    params.sides[1] = PartnerSide{
        normalized(r.partner_amplitudes.empty() ? user_amplitudes : r.partner_amplitudes),
        r.partner_sensitivities.empty() ? user_sensitivities : r.partner_sensitivities,
        r.partner_window.centers, r.partner_traits};
    params.validate();
    const double offset = r.status == RelationshipStatus::current ? r.age_years : 0.0;
    OptionForecast stay;
    stay.kind = OptionKind::stay_in_relationship;
    stay.curve.grid_months = grid;
    for (const double t : grid) stay.curve.mean.push_back(relationship_utility(params, offset + t / 12.0));
    state.options.push_back(std::move(stay));
  }

  OptionForecast closed;
  closed.kind = OptionKind::single_closed;
  closed.curve.grid_months = grid;
  for (const double t : grid) closed.curve.mean.push_back(single_utility(user.single, t / 12.0));
  state.options.push_back(std::move(closed));

  OptionForecast open;
  open.kind = OptionKind::single_open;
  open.curve = open_option_utility(state.cumulative, state.suitors, build, user.single,
                                   scenario.mc.realizations,
                                   stream_seed(scenario.seed, kRolloutSeedStream), threads);
  state.options.push_back(std::move(open));

  for (auto& o : state.options) o.value = time_average(o.curve);
  return build_report(std::move(state));
}

}  // namespace heartcast
