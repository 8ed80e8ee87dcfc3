#include "heartcast/matching.hpp"

#include <algorithm>
#include <cmath>

#include "heartcast/error.hpp"
#include "heartcast/parallel.hpp"

namespace heartcast {

std::vector<QualityBand> default_bands() {
  return {{"ideal", 0.8, 1.0, true}, {"good", 0.5, 0.8, false}, {"marginal", 0.0, 0.5, false}};
}

void validate_bands(std::span<const QualityBand> bands, const std::string& path) {
  if (bands.empty()) throw ValidationError("at least one quality band is required", path);
  std::vector<QualityBand> sorted(bands.begin(), bands.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.lower < b.lower; });
  int ideal_count = 0;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const std::string bpath = path + "[" + std::to_string(i) + "]";
    if (b.name.empty()) throw ValidationError("band needs a name", bpath + ".name");
    if (!(b.lower >= 0.0 && b.upper <= 1.0 && b.lower < b.upper)) {
      throw ValidationError("band needs 0 <= lower < upper <= 1", bpath);
    }
    ideal_count += b.ideal ? 1 : 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (bands[j].name == b.name) throw ValidationError("duplicate band name", bpath + ".name");
    }
  }
  if (ideal_count > 1) throw ValidationError("at most one band may be ideal", path);
  if (sorted.front().lower != 0.0) throw ValidationError("bands must start at 0", path);
  if (sorted.back().upper != 1.0) throw ValidationError("bands must end at 1", path);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].lower != sorted[i - 1].upper) {
      throw ValidationError("bands must be contiguous without overlap", path);
    }
  }
}

std::optional<std::size_t> band_of(std::span<const QualityBand> bands, double q) {
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (q >= bands[b].lower && (q < bands[b].upper || (bands[b].upper == 1.0 && q == 1.0))) {
      return b;
    }
  }
  return std::nullopt;
}

CompatibilityWindow derive_windows(const CompatibilityWindow& base, double years) {
  if (!(years >= 0.0)) throw ValidationError("window time must be >= 0", "t");
  CompatibilityWindow out = base;
  const double factor = std::max(0.0, 1.0 + base.drift_per_year * years);
  for (double& h : out.halfwidths) h *= factor;
  return out;
}

std::optional<double> quality_score(std::span<const double> traits,
                                    const CompatibilityWindow& window) {
  const std::size_t d = window.dimension();
  if (traits.size() != d) {
    throw ValidationError("suitor dimension " + std::to_string(traits.size()) +
                          " does not match window dimension " + std::to_string(d));
  }
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (traits[i] < window.lower(i) || traits[i] > window.upper(i)) return std::nullopt;
    const double h = window.halfwidths[i];
    const double offset = std::abs(traits[i] - window.centers[i]);
    double distance = 0.0;
    if (h > 0.0) {
      distance = std::min(1.0, offset / h);
    } else if (offset > 0.0) {
      return std::nullopt;
    }
    weighted += window.importances[i] * distance * distance;
    weight_sum += window.importances[i];
  }
  return 1.0 - std::sqrt(weighted / weight_sum);
}

EncounterProbabilityCurve encounter_probabilities(const SubgroupSelection& selection,
                                                  const TraitVector& user_traits,
                                                  const CompatibilityWindow& window,
                                                  std::span<const QualityBand> bands,
                                                  std::span<const double> grid_months,
                                                  std::span<const double> drift_per_year,
                                                  std::size_t threads) {
  const auto& members = selection.members;
  if (members.empty()) {
    throw InsufficientDataError("subgroup has no members", "matching", selection.relaxation_log);
  }
  const std::size_t d = window.dimension();
  if (user_traits.dimension() != d) throw ValidationError("user traits and window differ in dimension");
  if (!drift_per_year.empty() && drift_per_year.size() != d) {
    throw ValidationError("drift dimension differs from window dimension");
  }

  EncounterProbabilityCurve curve;
  curve.group_id = selection.source_groups.empty() ? std::string() : selection.source_groups.front();
  curve.grid_months.assign(grid_months.begin(), grid_months.end());
  const std::size_t steps = grid_months.size();
  curve.total.assign(steps, 0.0);
  curve.by_band.assign(bands.size(), std::vector<double>(steps, 0.0));

  const double n = static_cast<double>(members.size());
  parallel_for(steps, threads, [&](std::size_t k) {
    const double years = grid_months[k] / 12.0;
    CompatibilityWindow current = derive_windows(window, years);
    for (double& h : current.halfwidths) h *= selection.window_scale;

    std::vector<std::size_t> counts(bands.size(), 0);
    std::size_t matched = 0;
    std::vector<double> shifted(d);
    for (const auto& person : members) {
      for (std::size_t i = 0; i < d; ++i) {
        const double drift = drift_per_year.empty() ? 0.0 : drift_per_year[i] * years;
        shifted[i] = std::clamp(person.traits[i] + drift, 0.0, 1.0);
      }
      const auto q = quality_score(shifted, current);
      if (!q) continue;
      if (!person.own_window.contains(user_traits.values())) continue;
      const auto band = band_of(bands, *q);
      if (!band) continue;
      ++counts[*band];
      ++matched;
    }
    for (std::size_t b = 0; b < bands.size(); ++b) {
      curve.by_band[b][k] = static_cast<double>(counts[b]) / n;
    }
    curve.total[k] = static_cast<double>(matched) / n;
  });
  return curve;
}

}  // namespace heartcast
