#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heartcast/population.hpp"
#include "heartcast/traits.hpp"

namespace heartcast {

/// Quality interval [lower, upper); the band whose upper is 1 also holds 1.
struct QualityBand {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool ideal = false;
};

/// ideal [0.8,1], good [0.5,0.8), marginal [0,0.5).
std::vector<QualityBand> default_bands();

/// Bands must tile [0,1] without gaps or overlap, in any order, with at most
/// one flagged ideal.
void validate_bands(std::span<const QualityBand> bands, const std::string& path = "bands");

/// Index of the band holding quality q, if any.
std::optional<std::size_t> band_of(std::span<const QualityBand> bands, double q);

/// Single-encounter match probabilities of one group on a time grid.
struct EncounterProbabilityCurve {
  std::string group_id;
  std::vector<double> grid_months;
  std::vector<double> total;                // p_G(t_k)
  std::vector<std::vector<double>> by_band; // [band][k], sums to total
};

/// Window halfwidths scaled by (1 + drift * years), floored at zero.
CompatibilityWindow derive_windows(const CompatibilityWindow& base, double years);

/// Weighted RMS proximity to the window centers mapped to [0,1]; nullopt when
/// the traits fall outside the window.
std::optional<double> quality_score(std::span<const double> traits,
                                    const CompatibilityWindow& window);
inline std::optional<double> quality_score(const Person& suitor,
                                           const CompatibilityWindow& window) {
  return quality_score(suitor.traits.values(), window);
}

/// Fraction of members that are mutual matches at each grid time, split by
/// quality band. Member traits shift by `drift_per_year` (clamped) and the
/// user's window follows derive_windows scaled by the selection's widening.
EncounterProbabilityCurve encounter_probabilities(const SubgroupSelection& selection,
                                                  const TraitVector& user_traits,
                                                  const CompatibilityWindow& window,
                                                  std::span<const QualityBand> bands,
                                                  std::span<const double> grid_months,
                                                  std::span<const double> drift_per_year = {},
                                                  std::size_t threads = 1);

}  // namespace heartcast
