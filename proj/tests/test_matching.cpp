#include <doctest.h>

#include <cmath>

#include "heartcast/error.hpp"
#include "heartcast/matching.hpp"
#include "heartcast/rng.hpp"
#include "test_support.hpp"

using namespace heartcast;
using namespace heartcast::testing;

namespace {

SubgroupSelection selection_of(SampleSet people) {
  SubgroupSelection s;
  s.source_groups = {"g"};
  s.members = std::move(people);
  return s;
}

SampleSet uniform_people(std::size_t n, std::size_t d, std::uint64_t seed, double own_halfwidth = 1.0) {
  SampleSet out;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(stream_seed(seed, 0, i));
    std::vector<double> t(d);
    for (auto& v : t) v = rng.uniform();
    out.push_back(make_person("u" + std::to_string(i), t, own_halfwidth));
  }
  return out;
}

}  // namespace

TEST_CASE("derive_windows") {
  SUBCASE("zero drift is constant") {
    const auto w = make_window({0.3, 0.7}, 0.1, 0.0);
    CHECK(derive_windows(w, 0.0).halfwidths == w.halfwidths);
    CHECK(derive_windows(w, 30.0).halfwidths == w.halfwidths);
  }
  SUBCASE("linear growth") {
    const auto w = make_window({0.5}, 0.1, 0.1);
    CHECK(derive_windows(w, 5.0).halfwidths[0] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(derive_windows(w, 5.0).centers == w.centers);
    CHECK(derive_windows(w, 5.0).importances == w.importances);
  }
  SUBCASE("narrowing floors at zero") {
    const auto w = make_window({0.5, 0.5}, 0.2, -0.3);
    const auto later = derive_windows(w, 10.0);
    CHECK(later.halfwidths == std::vector<double>{0.0, 0.0});
    const auto people = uniform_people(500, 2, 4);
    const auto bands = default_bands();
    const double grid[] = {0.0, 120.0};
    const auto curve = encounter_probabilities(selection_of(people), TraitVector({0.5, 0.5}), w, bands, grid);
    CHECK(curve.total[1] == 0.0);
  }
  SUBCASE("negative time is rejected") {
    CHECK_THROWS_AS(derive_windows(make_window({0.5}, 0.1), -1.0), ValidationError);
  }
}

TEST_CASE("window intervals clamp to [0,1]") {
  const auto w = make_window({0.05, 0.95}, 0.2);
  CHECK(w.lower(0) == 0.0);
  CHECK(w.upper(1) == 1.0);
  CHECK(w.contains(std::vector<double>{0.0, 1.0}));
}

TEST_CASE("quality_score examples") {
  // Dyadic values keep the window edges exact.
  const auto w = make_window({0.25, 0.5, 0.75, 0.375}, 0.125);
  REQUIRE(quality_score(std::vector<double>{0.25, 0.5, 0.75, 0.375}, w).has_value());
  CHECK(*quality_score(std::vector<double>{0.25, 0.5, 0.75, 0.375}, w) == 1.0);
  REQUIRE(quality_score(std::vector<double>{0.375, 0.375, 0.875, 0.25}, w).has_value());
  CHECK(*quality_score(std::vector<double>{0.375, 0.375, 0.875, 0.25}, w) == 0.0);
  REQUIRE(quality_score(std::vector<double>{0.3125, 0.4375, 0.8125, 0.3125}, w).has_value());
  CHECK(*quality_score(std::vector<double>{0.3125, 0.4375, 0.8125, 0.3125}, w) == 0.5);
  CHECK_FALSE(quality_score(std::vector<double>{0.4375, 0.5, 0.75, 0.375}, w).has_value());

  auto zero = make_window({0.3, 0.5}, 0.0);
  CHECK(*quality_score(std::vector<double>{0.3, 0.5}, zero) == 1.0);
  CHECK_FALSE(quality_score(std::vector<double>{0.3, 0.50001}, zero).has_value());
  CHECK_THROWS_AS(quality_score(std::vector<double>{0.3}, zero), ValidationError);
}

TEST_CASE("quality is invariant under uniform importance scaling") {
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    Rng rng(stream_seed(11, trial));
    auto w = make_window({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()}, 0.05 + 0.3 * rng.uniform());
    for (auto& i : w.importances) i = rng.uniform(0.01, 3.0);
    std::vector<double> t(4);
    for (std::size_t i = 0; i < 4; ++i) t[i] = std::clamp(w.centers[i] + rng.uniform(-0.3, 0.3), 0.0, 1.0);
    auto scaled = w;
    const double c = rng.uniform(0.01, 100.0);
    for (auto& i : scaled.importances) i *= c;
    const auto a = quality_score(t, w);
    const auto b = quality_score(t, scaled);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
      CHECK(*a >= 0.0);
      CHECK(*a <= 1.0);
    }
  }
}

TEST_CASE("bands") {
  const auto bands = default_bands();
  CHECK_NOTHROW(validate_bands(bands));
  CHECK(*band_of(bands, 1.0) == 0);
  CHECK(*band_of(bands, 0.8) == 0);
  CHECK(*band_of(bands, 0.79) == 1);
  CHECK(*band_of(bands, 0.0) == 2);
  std::vector<QualityBand> gap = {{"a", 0.0, 0.4}, {"b", 0.5, 1.0}};
  CHECK_THROWS_AS(validate_bands(gap), ValidationError);
  std::vector<QualityBand> overlap = {{"a", 0.0, 0.6}, {"b", 0.5, 1.0}};
  CHECK_THROWS_AS(validate_bands(overlap), ValidationError);
  std::vector<QualityBand> two_ideal = {{"a", 0.0, 0.5, true}, {"b", 0.5, 1.0, true}};
  CHECK_THROWS_AS(validate_bands(two_ideal), ValidationError);
}

TEST_CASE("universal acceptance gives p = 1") {
  const auto people = uniform_people(1000, 4, 1, 1.0);
  const auto window = make_window({0.5, 0.5, 0.5, 0.5}, 0.5);
  const auto bands = default_bands();
  const double grid[] = {0, 1, 2, 3, 12};
  const auto curve = encounter_probabilities(selection_of(people), TraitVector({0.2, 0.8, 0.5, 0.1}),
                                             window, bands, grid);
  for (const double p : curve.total) CHECK(p == 1.0);
}

TEST_CASE("zero halfwidth with continuous traits gives p = 0") {
  const auto people = uniform_people(1000, 4, 2, 1.0);
  auto window = make_window({0.5, 0.5, 0.5, 0.5}, 0.3);
  window.halfwidths[2] = 0.0;
  const auto bands = default_bands();
  const double grid[] = {0, 6};
  const auto curve = encounter_probabilities(selection_of(people), TraitVector({0.5, 0.5, 0.5, 0.5}),
                                             window, bands, grid);
  CHECK(curve.total[0] == 0.0);
  CHECK(curve.total[1] == 0.0);
}

TEST_CASE("uniform 4-D members with 0.5-wide windows match about 1/16") {
  // Oracle: direct Monte Carlo count over independent uniform draws.
  const std::size_t oracle_draws = 1000000;
  Rng oracle_rng(2024);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < oracle_draws; ++n) {
    bool inside = true;
    for (int i = 0; i < 4; ++i) inside = (std::abs(oracle_rng.uniform() - 0.5) <= 0.25) && inside;
    hits += inside ? 1 : 0;
  }
  const double oracle = static_cast<double>(hits) / oracle_draws;
  CHECK(oracle == doctest::Approx(0.0625).epsilon(0.02));

  const std::size_t members = 200000;
  const auto people = uniform_people(members, 4, 77, 1.0);
  const auto window = make_window({0.5, 0.5, 0.5, 0.5}, 0.25);
  const auto bands = default_bands();
  const double grid[] = {0};
  const auto curve = encounter_probabilities(selection_of(people), TraitVector({0.5, 0.5, 0.5, 0.5}),
                                             window, bands, grid);
  const double sigma = std::sqrt(0.0625 * 0.9375 / oracle_draws + 0.0625 * 0.9375 / members);
  CHECK(std::abs(curve.total[0] - oracle) < 3.0 * sigma);
}

TEST_CASE("a member counts only when both sides accept") {
  SampleSet people = {make_person("accepts", {0.5, 0.5, 0.5, 0.5}, 0.5),
                      make_person("rejects", {0.5, 0.5, 0.5, 0.5}, 0.01)};
  const auto window = make_window({0.5, 0.5, 0.5, 0.5}, 0.2);
  const auto bands = default_bands();
  const double grid[] = {0};
  const auto curve = encounter_probabilities(selection_of(people), TraitVector({0.3, 0.5, 0.5, 0.5}),
                                             window, bands, grid);
  CHECK(curve.total[0] == 0.5);
}

TEST_CASE("band additivity and halfwidth monotonicity") {
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    Rng rng(stream_seed(5, trial));
    const auto people = uniform_people(400, 4, trial, rng.uniform(0.1, 0.6));
    const TraitVector user({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
    auto window = make_window({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()},
                              rng.uniform(0.05, 0.4), rng.uniform(-0.1, 0.1));
    for (auto& i : window.importances) i = rng.uniform(0.1, 2.0);
    std::vector<double> drift(4);
    for (auto& d : drift) d = rng.uniform(-0.02, 0.02);
    const auto bands = default_bands();
    const auto grid = std::vector<double>{0, 12, 24, 60, 120};
    const auto sel = selection_of(people);
    const auto curve = encounter_probabilities(sel, user, window, bands, grid, drift);
    auto wider = window;
    for (auto& h : wider.halfwidths) h *= rng.uniform(1.0, 2.0);
    const auto wide_curve = encounter_probabilities(sel, user, wider, bands, grid, drift);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double sum = 0.0;
      for (const auto& b : curve.by_band) sum += b[k];
      CHECK(std::abs(sum - curve.total[k]) <= 1e-12);
      CHECK(curve.total[k] >= 0.0);
      CHECK(curve.total[k] <= 1.0);
      CHECK(wide_curve.total[k] >= curve.total[k]);
    }
  }
}

TEST_CASE("evaluation order does not change results") {
  const auto people = uniform_people(3000, 4, 8, 0.4);
  const auto window = make_window({0.4, 0.5, 0.6, 0.5}, 0.3, 0.05);
  const auto bands = default_bands();
  std::vector<double> grid;
  for (int m = 0; m <= 60; ++m) grid.push_back(m);
  const std::vector<double> drift{0.01, -0.01, 0.0, 0.02};
  const auto sel = selection_of(people);
  const TraitVector user({0.5, 0.5, 0.5, 0.5});
  const auto one = encounter_probabilities(sel, user, window, bands, grid, drift, 1);
  const auto many = encounter_probabilities(sel, user, window, bands, grid, drift, 7);
  CHECK(one.total == many.total);
  CHECK(one.by_band == many.by_band);
}

TEST_CASE("empty selection is insufficient data") {
  const auto bands = default_bands();
  const double grid[] = {0};
  CHECK_THROWS_AS(encounter_probabilities(selection_of({}), TraitVector({0.5}), make_window({0.5}, 0.1),
                                          bands, grid),
                  InsufficientDataError);
}

TEST_CASE("selection widening scales the window") {
  SampleSet people = {make_person("a", {0.5}), make_person("b", {0.62})};
  auto sel = selection_of(people);
  const auto bands = default_bands();
  const double grid[] = {0};
  const auto window = make_window({0.5}, 0.1);
  CHECK(encounter_probabilities(sel, TraitVector({0.5}), window, bands, grid).total[0] == 0.5);
  sel.window_scale = 1.25;
  CHECK(encounter_probabilities(sel, TraitVector({0.5}), window, bands, grid).total[0] == 1.0);
}
