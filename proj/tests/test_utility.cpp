#include <doctest.h>

#include <cmath>
#include <random>

#include "heartcast/error.hpp"
#include "heartcast/utility.hpp"
#include "mixture_fixture.hpp"
#include "test_support.hpp"

using namespace heartcast;
using namespace heartcast::testing;

namespace {

std::mt19937_64& gen() {
  static std::mt19937_64 g(4242);
  return g;
}

double uni(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen()); }

std::vector<double> random_vec(std::size_t d, double lo, double hi) {
  std::vector<double> v(d);
  for (auto& x : v) x = uni(lo, hi);
  return v;
}

RelationshipParams random_params(std::size_t d) {
  RelationshipParams p;
  for (auto& s : p.sides) {
    s.amplitudes = random_vec(d, 0.0, 2.0);
    s.amplitudes[0] += 0.01;
    s.sensitivities = random_vec(d, 0.0, 5.0);
    s.ideal = TraitVector(random_vec(d, 0.0, 1.0));
    s.traits = TraitVector(random_vec(d, 0.0, 1.0));
  }
  return p;
}

/// Direct evaluation of the product-of-sums formula.
double oracle_utility(const RelationshipParams& p, double t) {
  double product = 1.0;
  for (int g = 0; g < 2; ++g) {
    const auto& me = p.sides[g];
    const auto& other = p.sides[1 - g];
    double sum = 0.0;
    for (std::size_t i = 0; i < me.amplitudes.size(); ++i) {
      sum += me.amplitudes[i] * std::exp(-me.sensitivities[i] * std::fabs(me.ideal[i] - other.traits[i]) * t);
    }
    product *= sum;
  }
  return product;
}

SubgroupSelection members_from(const ParametricSpec& spec, std::uint64_t seed) {
  GroupModel g;
  g.id = "g";
  g.population = spec;
  g.base_encounter_rate = 1;
  SubgroupSelection sel;
  sel.source_groups = {"g"};
  sel.members = load_population(g, seed);
  return sel;
}

}  // namespace

TEST_CASE("relationship_utility examples") {
  const auto p = random_params(4);
  double a1 = 0.0, a2 = 0.0;
  for (double a : p.sides[0].amplitudes) a1 += a;
  for (double a : p.sides[1].amplitudes) a2 += a;
  CHECK(relationship_utility(p, 0.0) == a1 * a2);

  RelationshipParams perfect = p;
  perfect.sides[0].ideal = perfect.sides[1].traits;
  perfect.sides[1].ideal = perfect.sides[0].traits;
  for (double t : {0.0, 1.0, 10.0, 100.0}) CHECK(relationship_utility(perfect, t) == a1 * a2);

  RelationshipParams one;
  one.sides[0] = {{1.0}, {1.0}, TraitVector({0.5}), TraitVector({0.25})};
  one.sides[1] = {{1.0}, {1.0}, TraitVector({0.75}), TraitVector({0.0})};
  // Each side is 0.5 away from the other's traits: e^{-0.5} squared.
  CHECK(relationship_utility(one, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(relationship_utility(one, 1.0) == doctest::Approx(0.3679).epsilon(1e-4));
}

TEST_CASE("relationship_utility properties") {
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(uni(0, 8));
    const auto p = random_params(d);
    double previous = relationship_utility(p, 0.0);
    for (double t = 0.5; t <= 20.0; t += 0.5) {
      const double u = relationship_utility(p, t);
      CHECK(u <= previous);
      previous = u;
    }
    const double t = uni(0, 10);
    CHECK(relationship_utility(p, t) == doctest::Approx(oracle_utility(p, t)).epsilon(1e-13));

    RelationshipParams swapped = p;
    std::swap(swapped.sides[0], swapped.sides[1]);
    CHECK(relationship_utility(swapped, t) == relationship_utility(p, t));

    RelationshipParams scaled = p;
    const double c = uni(0.1, 10);
    for (auto& a : scaled.sides[1].amplitudes) a *= c;
    CHECK(relationship_utility(scaled, t) == doctest::Approx(c * relationship_utility(p, t)).epsilon(1e-12));
  }
}

TEST_CASE("relationship params validation") {
  auto p = random_params(3);
  p.sides[1].amplitudes.assign(3, 0.0);
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = random_params(3);
  p.sides[0].sensitivities[1] = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = random_params(3);
  p.sides[0].amplitudes.pop_back();
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("single_utility examples and bounds") {
  SingleLifeParams s{{{2.0, 0.5}, {1.0, 0.0}}, 3.0};
  CHECK(single_utility(s, 0.0) == 3.0);
  const double expected = 2.0 * (0.5 + 0.5 * std::exp(-1.0)) + std::exp(-1.0);
  CHECK(single_utility(s, 3.0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(single_utility(s, 3.0) == doctest::Approx(1.7358).epsilon(1e-4));

  SingleLifeParams sustainable{{{2.0, 1.0}, {0.5, 1.0}}, 1.0};
  for (double t : {0.0, 1.0, 50.0}) CHECK(single_utility(sustainable, t) == 2.5);

  for (int trial = 0; trial < 200; ++trial) {
    SingleLifeParams r;
    r.tau_single_years = uni(0.1, 10);
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < 4; ++i) {
      r.goals.push_back({uni(0, 3), uni()});
      lo += r.goals.back().weight * r.goals.back().sustainability;
      hi += r.goals.back().weight;
    }
    double previous = single_utility(r, 0.0);
    for (double t = 0.25; t < 30; t += 0.25) {
      const double u = single_utility(r, t);
      CHECK(u <= previous);
      CHECK(u >= lo - 1e-12);
      CHECK(u <= hi + 1e-12);
      previous = u;
    }
  }

  CHECK_THROWS_AS((SingleLifeParams{{}, 3.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SingleLifeParams{{{0.0, 0.5}}, 3.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SingleLifeParams{{{1.0, 1.5}}, 3.0}.validate()), ValidationError);
  CHECK_THROWS_AS((SingleLifeParams{{{1.0, 0.5}}, 0.0}.validate()), ValidationError);
}

TEST_CASE("sample_suitors") {
  SUBCASE("zero covariance returns the mean") {
    SubgroupSelection sel;
    for (int i = 0; i < 10; ++i) sel.members.push_back(make_person("p" + std::to_string(i), {0.2, 0.4, 0.6, 0.8}));
    const auto s = sample_suitors(sel, 50, 1);
    for (const auto& t : s.suitors) {
      for (std::size_t i = 0; i < 4; ++i) CHECK(t[i] == doctest::Approx(0.2 * (i + 1)).epsilon(1e-14));
    }
  }
  SUBCASE("clipping keeps suitors in the unit cube") {
    SubgroupSelection sel;
    for (int i = 0; i < 40; ++i) {
      const double x = (i % 2) ? 0.0 : 1.0;
      sel.members.push_back(make_person("p" + std::to_string(i), {x, 1.0 - x, x, 0.5}));
    }
    const auto s = sample_suitors(sel, 2000, 3);
    for (const auto& t : s.suitors) {
      CHECK(t.dimension() == 4);
      for (double v : t) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  SUBCASE("moments of a 5-D Gaussian are recovered") {
    const auto spec = five_dim_gaussian(100000);
    const auto sel = members_from(spec, 17);
    const auto s = sample_suitors(sel, 100000, 5, 4);
    const auto m = moments_of(trait_rows(s.suitors));
    const Eigen::MatrixXd truth = to_matrix(spec.covariance);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(m.mean[i] - spec.mean[static_cast<std::size_t>(i)]) < 0.01);
    CHECK((m.covariance - truth).norm() / truth.norm() < 0.05);
  }
  SUBCASE("deterministic and independent of thread count") {
    const auto sel = members_from(five_dim_gaussian(500), 2);
    const auto a = sample_suitors(sel, 3000, 77, 1);
    const auto b = sample_suitors(sel, 3000, 77, 5);
    const auto c = sample_suitors(sel, 3000, 78, 1);
    CHECK(a.suitors == b.suitors);
    CHECK_FALSE(a.suitors == c.suitors);
    CHECK(a.seed == 77);
  }
  SUBCASE("too few members") {
    SubgroupSelection sel;
    for (int i = 0; i < 4; ++i) sel.members.push_back(make_person("p" + std::to_string(i), {0.1 * i, 0.2, 0.3, 0.4}));
    CHECK_THROWS_AS(sample_suitors(sel, 10, 1), InsufficientDataError);
    sel.members.clear();
    CHECK_THROWS_AS(sample_suitors(sel, 10, 1), InsufficientDataError);
  }
}

TEST_CASE("penalties") {
  const auto window = make_window({0.3, 0.5, 0.7, 0.4}, 0.2);
  const std::vector<double> ones(4, 1.0);
  SuitorSample same{{TraitVector({0.5, 0.7, 0.9, 0.6}), TraitVector({0.1, 0.3, 0.5, 0.2})}, {}, 0};
  auto p = penalty_profile(same, window, ones, TraitVector({0.3, 0.5, 0.7, 0.4}));
  CHECK(p.mean == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p.stddev == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*p.partner == 0.0);

  SuitorSample mixed{{TraitVector({0.3, 0.5, 0.7, 0.4}), TraitVector({0.7, 0.9, 0.3, 0.0})}, {}, 0};
  p = penalty_profile(mixed, window, ones);
  CHECK(p.mean == doctest::Approx(0.2));
  CHECK(p.stddev == doctest::Approx(0.2));
  CHECK_FALSE(p.partner.has_value());
}

TEST_CASE("mixture with no matches is single life") {
  const auto grid = make_grid(24, 1);
  const std::vector<double> zero(grid.size(), 0.0);
  SingleLifeParams single{{{1.0, 0.3}, {2.0, 0.7}}, 2.0};
  MixtureInputs in;
  in.grid_months = grid;
  in.cumulative = zero;
  in.single = [&](double y) { return single_utility(single, y); };
  in.suitor_count = 0;
  const auto curve = mixture_curve(in, 100, 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double u = single_utility(single, grid[k] / 12.0);
    CHECK(curve.mean[k] == u);
    CHECK(curve.band->p10[k] == u);
    CHECK(curve.band->p90[k] == u);
  }
}

TEST_CASE("certain first-step match gives the relationship curve") {
  const auto grid = make_grid(24, 1);
  std::vector<double> c(grid.size(), 1.0);
  c[0] = 0.0;
  RelationshipParams perfect = random_params(4);
  SingleLifeParams single{{{1.0, 0.3}}, 2.0};
  MixtureInputs in;
  in.grid_months = grid;
  in.cumulative = c;
  in.single = [&](double y) { return single_utility(single, y); };
  in.suitor_count = 5;
  in.relationship = [&](std::size_t, double y) { return relationship_utility(perfect, y); };
  const auto curve = mixture_curve(in, 200, 9);
  CHECK(curve.mean[0] == single_utility(single, 0.0));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double expected = relationship_utility(perfect, (grid[k] - grid[1]) / 12.0);
    CHECK(curve.mean[k] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(curve.band->p10[k] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("two-point hand fixture") {
  const TwoPointFixture fx;
  const auto in = fx.inputs();
  const auto mean = mixture_mean(in);
  CHECK(mean[0] == doctest::Approx(fx.expected_mean[0]).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(fx.expected_mean[1]).epsilon(1e-15));

  const std::size_t n = 10000;
  const auto rollouts = simulate_rollouts(in, n, 123, 3);
  for (std::size_t k = 0; k < 2; ++k) {
    double sum = 0.0, sq = 0.0;
    for (const auto& r : rollouts) sum += r[k];
    const double m = sum / n;
    for (const auto& r : rollouts) sq += (r[k] - m) * (r[k] - m);
    const double se = std::sqrt(sq / (n - 1) / n);
    CHECK(std::abs(m - fx.expected_mean[k]) <= 3.0 * se);
  }
  CHECK(rollouts == simulate_rollouts(in, n, 123, 1));
}

TEST_CASE("open option mean is bounded and the band contains it") {
  const auto grid = make_grid(60, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> c(grid.size());
    double level = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      level += (1.0 - level) * uni(0, 0.08);
      c[k] = level;
    }
    std::vector<RelationshipParams> params;
    for (int s = 0; s < 30; ++s) params.push_back(random_params(4));
    SingleLifeParams single{{{uni(0.5, 3), uni()}, {uni(0.5, 3), uni()}}, uni(0.5, 5)};
    MixtureInputs in;
    in.grid_months = grid;
    in.cumulative = c;
    in.single = [&](double y) { return single_utility(single, y); };
    in.suitor_count = params.size();
    in.relationship = [&](std::size_t s, double y) { return relationship_utility(params[s], y); };
    const auto curve = mixture_curve(in, 300, static_cast<std::uint64_t>(trial));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double lo = single_utility(single, grid[k] / 12.0), hi = lo;
      for (std::size_t j = 0; j <= k; ++j) {
        for (const auto& p : params) {
          const double u = relationship_utility(p, (grid[k] - grid[j]) / 12.0);
          lo = std::min(lo, u);
          hi = std::max(hi, u);
        }
      }
      CHECK(curve.mean[k] >= lo - 1e-12);
      CHECK(curve.mean[k] <= hi + 1e-12);
      CHECK(curve.band->p10[k] <= curve.mean[k]);
      CHECK(curve.band->p90[k] >= curve.mean[k]);
    }
  }
}

TEST_CASE("mixture input validation") {
  const TwoPointFixture fx;
  auto in = fx.inputs();
  std::vector<double> falling{0.6, 0.5};
  in.cumulative = falling;
  CHECK_THROWS_AS(mixture_mean(in), ValidationError);
  in = fx.inputs();
  in.suitor_count = 0;
  CHECK_THROWS_AS(mixture_mean(in), ValidationError);
  in = fx.inputs();
  CHECK_THROWS_AS(simulate_rollouts(in, 0, 1), ValidationError);
}
