#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heartcast/population.hpp"
#include "heartcast/sociology.hpp"
#include "heartcast/traits.hpp"

namespace heartcast {

/// One side of a relationship. `ideal` is what this person wants in a
/// partner; `traits` is who they are.
struct PartnerSide {
  std::vector<double> amplitudes;     // a_i >= 0
  std::vector<double> sensitivities;  // w_i >= 0
  TraitVector ideal;
  TraitVector traits;
};

struct RelationshipParams {
  std::array<PartnerSide, 2> sides;
  void validate(const std::string& path = "relationship") const;
};

/// Product over both people of sum_i a_i exp(-w_i * mismatch_i * years), where
/// a person's mismatch on trait i is |their ideal_i - the other's trait_i|.
/// With ideal == own traits this is the literal |trait_2 - trait_1| form.
double relationship_utility(const RelationshipParams& params, double years);

struct LifeGoal {
  double weight = 1.0;          // g_i >= 0
  double sustainability = 0.5;  // s_i in [0,1], share of value kept long-term
};

struct SingleLifeParams {
  std::vector<LifeGoal> goals;
  double tau_single_years = 3.0;
  void validate(const std::string& path = "user") const;
};

/// sum_i g_i (s_i + (1 - s_i) exp(-years / tau)).
double single_utility(const SingleLifeParams& params, double years);

struct UtilityBand {
  std::vector<double> p10;
  std::vector<double> p90;
};

struct UtilityCurve {
  std::vector<double> grid_months;
  std::vector<double> mean;
  std::optional<UtilityBand> band;  // stochastic options only
};

struct SuitorSample {
  std::vector<TraitVector> suitors;
  std::vector<std::string> source_groups;
  std::uint64_t seed = 0;
};

/// Draws suitors from the principal axes of the members' trait covariance:
/// mean + sum_k z_k sqrt(lambda_k) v_k, clipped to [0,1]. Needs at least D + 1
/// members. Draw n uses its own counter-derived stream.
SuitorSample sample_suitors(const SubgroupSelection& selection, std::size_t count,
                            std::uint64_t seed, std::size_t threads = 1);

struct PenaltySummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over suitors
  std::optional<double> partner;
};

/// Trait-averaged decay rate (1/D) sum_i w_i |ideal_i - traits_i|.
double trait_penalty(std::span<const double> traits, std::span<const double> ideal,
                     std::span<const double> sensitivities);

PenaltySummary penalty_profile(const SuitorSample& suitors, const CompatibilityWindow& user_window,
                               std::span<const double> sensitivities,
                               const std::optional<TraitVector>& partner = std::nullopt);

/// Builds relationship parameters for the user and a given suitor.
using RelationshipBuilder = std::function<RelationshipParams(const TraitVector& suitor)>;

/// Utility of being single until the first match, then in the relationship.
struct MixtureInputs {
  std::span<const double> grid_months;
  std::span<const double> cumulative;  // C(t_k), nondecreasing
  std::function<double(double years)> single;
  std::size_t suitor_count = 0;
  /// Relationship utility of suitor s at relationship age `years`.
  std::function<double(std::size_t suitor, double years)> relationship;
};

/// Closed-form mean (1 - C_k) U_single(t_k) + sum_{j<=k} dC_j Ubar(t_k - t_j),
/// with dC_0 = C_0 and Ubar averaged over suitors.
std::vector<double> mixture_mean(const MixtureInputs& in, std::size_t threads = 1);

/// Independent futures: each samples a match step from dC (or no match) and
/// one suitor uniformly. Result is [realization][k].
std::vector<std::vector<double>> simulate_rollouts(const MixtureInputs& in,
                                                   std::size_t realizations, std::uint64_t seed,
                                                   std::size_t threads = 1);

/// Mixture mean with a p10/p90 band from rollouts. The band is widened where
/// needed so that it always contains the mean.
UtilityCurve mixture_curve(const MixtureInputs& in, std::size_t realizations, std::uint64_t seed,
                           std::size_t threads = 1);

UtilityCurve open_option_utility(const CumulativeForecast& forecast, const SuitorSample& suitors,
                                 const RelationshipBuilder& build,
                                 const SingleLifeParams& single, std::size_t realizations,
                                 std::uint64_t seed, std::size_t threads = 1);

}  // namespace heartcast
