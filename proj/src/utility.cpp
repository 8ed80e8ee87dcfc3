#include "heartcast/utility.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gaussian.hpp"
#include "heartcast/error.hpp"
#include "heartcast/parallel.hpp"
#include "heartcast/rng.hpp"

namespace heartcast {

namespace {

constexpr std::uint64_t kSuitorStream = 0x737569746f72ull;
constexpr std::uint64_t kRolloutStream = 0x726f6c6c6f7574ull;

void check_nonnegative(std::span<const double> values, const std::string& path) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      throw ValidationError("value must be a nonnegative number", path + "[" + std::to_string(i) + "]");
    }
  }
}

void check_mixture(const MixtureInputs& in) {
  const std::size_t steps = in.grid_months.size();
  if (steps == 0) throw ValidationError("empty time grid", "grid");
  if (in.cumulative.size() != steps) throw ValidationError("C and grid differ in length", "cumulative");
  double previous = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double c = in.cumulative[k];
    if (!(c >= 0.0 && c <= 1.0) || c < previous) {
      throw ValidationError("C must be nondecreasing in [0,1]", "cumulative");
    }
    previous = c;
  }
  if (in.suitor_count == 0 && in.cumulative.back() > 0.0) {
    throw ValidationError("a match can occur but the suitor sample is empty", "suitors");
  }
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void RelationshipParams::validate(const std::string& path) const {
  const std::size_t d = sides[0].traits.dimension();
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& s = sides[g];
    const std::string spath = path + ".sides[" + std::to_string(g) + "]";
    if (s.amplitudes.size() != d || s.sensitivities.size() != d || s.ideal.dimension() != d ||
        s.traits.dimension() != d) {
      throw ValidationError("relationship parameters must share one dimension", spath);
    }
    check_nonnegative(s.amplitudes, spath + ".amplitudes");
    check_nonnegative(s.sensitivities, spath + ".sensitivities");
    double sum = 0.0;
    for (const double a : s.amplitudes) sum += a;
    if (!(sum > 0.0)) throw ValidationError("amplitudes must not all be zero", spath + ".amplitudes");
  }
}

double relationship_utility(const RelationshipParams& params, double years) {
  if (!(years >= 0.0)) throw ValidationError("relationship age must be >= 0", "t");
  double product = 1.0;
  for (std::size_t g = 0; g < 2; ++g) {
    const PartnerSide& self = params.sides[g];
    const PartnerSide& other = params.sides[1 - g];
    double sum = 0.0;
    for (std::size_t i = 0; i < self.amplitudes.size(); ++i) {
      const double mismatch = std::abs(self.ideal[i] - other.traits[i]);
      sum += self.amplitudes[i] * std::exp(-self.sensitivities[i] * mismatch * years);
    }
    product *= sum;
  }
  return product;
}

void SingleLifeParams::validate(const std::string& path) const {
  if (goals.empty()) throw ValidationError("at least one life goal is required", path + ".goals");
  double total = 0.0;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto& g = goals[i];
    const std::string gpath = path + ".goals[" + std::to_string(i) + "]";
    if (!std::isfinite(g.weight) || g.weight < 0.0) {
      throw ValidationError("goal weight must be >= 0", gpath + ".weight");
    }
    if (!(g.sustainability >= 0.0 && g.sustainability <= 1.0)) {
      throw ValidationError("goal sustainability must be in [0,1]", gpath + ".sustainability");
    }
    total += g.weight;
  }
  if (!(total > 0.0)) throw ValidationError("goal weights must not all be zero", path + ".goals");
  if (!(tau_single_years > 0.0) || !std::isfinite(tau_single_years)) {
    throw ValidationError("tau_single must be > 0", path + ".tau_single_years");
  }
}

double single_utility(const SingleLifeParams& params, double years) {
  if (!(years >= 0.0)) throw ValidationError("time must be >= 0", "t");
  const double fade = std::exp(-years / params.tau_single_years);
  double total = 0.0;
  for (const auto& g : params.goals) total += g.weight * (g.sustainability + (1.0 - g.sustainability) * fade);
  return total;
}

SuitorSample sample_suitors(const SubgroupSelection& selection, std::size_t count,
                            std::uint64_t seed, std::size_t threads) {
  if (count < 1) throw ValidationError("suitor count must be >= 1", "mc.suitors");
  const auto& members = selection.members;
  if (members.empty()) {
    throw InsufficientDataError("no members to sample suitors from", "utility", selection.relaxation_log);
  }
  const auto d = static_cast<Eigen::Index>(members.front().traits.dimension());
  if (members.size() < static_cast<std::size_t>(d) + 1) {
    throw InsufficientDataError("suitor sampling needs at least " + std::to_string(d + 1) +
                                    " members, have " + std::to_string(members.size()),
                                "utility", selection.relaxation_log);
  }

  Eigen::MatrixXd data(static_cast<Eigen::Index>(members.size()), d);
  for (std::size_t r = 0; r < members.size(); ++r) {
    if (members[r].traits.dimension() != static_cast<std::size_t>(d)) {
      throw ValidationError("member trait dimensions differ");
    }
    for (Eigen::Index c = 0; c < d; ++c) data(static_cast<Eigen::Index>(r), c) = members[r].traits[c];
  }
  const Eigen::VectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  const Eigen::MatrixXd covariance =
      (centered.transpose() * centered) / static_cast<double>(members.size() - 1);
  const detail::PrincipalSampler sampler(mean, covariance);

  SuitorSample out;
  out.source_groups = selection.source_groups;
  out.seed = seed;
  out.suitors.resize(count);
  parallel_for(count, threads, [&](std::size_t n) {
    Rng rng(stream_seed(seed, kSuitorStream, n));
    const Eigen::VectorXd x = sampler.draw(rng);
    out.suitors[n] = TraitVector::clamped(std::vector<double>(x.data(), x.data() + d));
  });
  return out;
}

double trait_penalty(std::span<const double> traits, std::span<const double> ideal,
                     std::span<const double> sensitivities) {
  if (traits.size() != ideal.size() || sensitivities.size() != ideal.size() || ideal.empty()) {
    throw ValidationError("penalty inputs differ in dimension");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < traits.size(); ++i) sum += sensitivities[i] * std::abs(ideal[i] - traits[i]);
  return sum / static_cast<double>(traits.size());
}

PenaltySummary penalty_profile(const SuitorSample& suitors, const CompatibilityWindow& user_window,
                               std::span<const double> sensitivities,
                               const std::optional<TraitVector>& partner) {
  const auto ideal = user_window.centers.values();
  PenaltySummary out;
  if (!suitors.suitors.empty()) {
    double sum = 0.0;
    std::vector<double> values;
    values.reserve(suitors.suitors.size());
    for (const auto& s : suitors.suitors) {
      values.push_back(trait_penalty(s.values(), ideal, sensitivities));
      sum += values.back();
    }
    const double n = static_cast<double>(values.size());
    out.mean = sum / n;
    double squares = 0.0;
    for (const double v : values) squares += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(squares / n);
  }
  if (partner) out.partner = trait_penalty(partner->values(), ideal, sensitivities);
  return out;
}

std::vector<double> mixture_mean(const MixtureInputs& in, std::size_t threads) {
  check_mixture(in);
  const std::size_t steps = in.grid_months.size();

  std::map<double, std::size_t> age_index;
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t j = 0; j <= k; ++j) age_index.emplace(in.grid_months[k] - in.grid_months[j], 0);
  }
  std::vector<double> ages;
  for (auto& [age, index] : age_index) {
    index = ages.size();
    ages.push_back(age);
  }
  std::vector<double> average(ages.size(), 0.0);
  if (in.suitor_count > 0) {
    parallel_for(ages.size(), threads, [&](std::size_t a) {
      double sum = 0.0;
      for (std::size_t s = 0; s < in.suitor_count; ++s) sum += in.relationship(s, ages[a] / 12.0);
      average[a] = sum / static_cast<double>(in.suitor_count);
    });
  }

  std::vector<double> mean(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    double value = (1.0 - in.cumulative[k]) * in.single(in.grid_months[k] / 12.0);
    for (std::size_t j = 0; j <= k; ++j) {
      const double arrival = in.cumulative[j] - (j == 0 ? 0.0 : in.cumulative[j - 1]);
      if (arrival == 0.0) continue;
      value += arrival * average[age_index.at(in.grid_months[k] - in.grid_months[j])];
    }
    mean[k] = value;
  }
  return mean;
}

std::vector<std::vector<double>> simulate_rollouts(const MixtureInputs& in,
                                                   std::size_t realizations, std::uint64_t seed,
                                                   std::size_t threads) {
  check_mixture(in);
  if (realizations < 1) throw ValidationError("realizations must be >= 1", "mc.realizations");
  const std::size_t steps = in.grid_months.size();
  std::vector<double> single(steps);
  for (std::size_t k = 0; k < steps; ++k) single[k] = in.single(in.grid_months[k] / 12.0);

  std::vector<std::vector<double>> curves(realizations);
  parallel_for(realizations, threads, [&](std::size_t r) {
    Rng rng(stream_seed(seed, kRolloutStream, r));
    const double u = rng.uniform();
    const auto first = std::upper_bound(in.cumulative.begin(), in.cumulative.end(), u);
    const auto match = static_cast<std::size_t>(first - in.cumulative.begin());
    std::vector<double> curve(single.begin(), single.end());
    if (match < steps) {
      const std::size_t suitor = rng.below(in.suitor_count);
      for (std::size_t k = match; k < steps; ++k) {
        curve[k] = in.relationship(suitor, (in.grid_months[k] - in.grid_months[match]) / 12.0);
      }
    }
    curves[r] = std::move(curve);
  });
  return curves;
}

UtilityCurve mixture_curve(const MixtureInputs& in, std::size_t realizations, std::uint64_t seed,
                           std::size_t threads) {
  UtilityCurve out;
  out.grid_months.assign(in.grid_months.begin(), in.grid_months.end());
  out.mean = mixture_mean(in, threads);
  const auto rollouts = simulate_rollouts(in, realizations, seed, threads);
  const std::size_t steps = out.mean.size();
  UtilityBand band;
  band.p10.resize(steps);
  band.p90.resize(steps);
  std::vector<double> column(rollouts.size());
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t r = 0; r < rollouts.size(); ++r) column[r] = rollouts[r][k];
    std::sort(column.begin(), column.end());
    band.p10[k] = std::min(quantile(column, 0.1), out.mean[k]);
    band.p90[k] = std::max(quantile(column, 0.9), out.mean[k]);
  }
  out.band = std::move(band);
  return out;
}

UtilityCurve open_option_utility(const CumulativeForecast& forecast, const SuitorSample& suitors,
                                 const RelationshipBuilder& build,
                                 const SingleLifeParams& single, std::size_t realizations,
                                 std::uint64_t seed, std::size_t threads) {
  single.validate();
  std::vector<RelationshipParams> params;
  params.reserve(suitors.suitors.size());
  for (const auto& s : suitors.suitors) {
    params.push_back(build(s));
    params.back().validate();
  }
  MixtureInputs in;
  in.grid_months = forecast.grid_months;
  in.cumulative = forecast.total;
  in.single = [&](double years) { return single_utility(single, years); };
  in.suitor_count = params.size();
  in.relationship = [&](std::size_t s, double years) { return relationship_utility(params[s], years); };
  return mixture_curve(in, realizations, seed, threads);
}

}  // namespace heartcast
