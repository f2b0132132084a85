#include "gfstop/stage_game.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"
#include "gfstop/rng.hpp"
#include "support/oracles.hpp"

using namespace gfstop;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

StageGame search(double q) { return StageGame::search_with_recall(q); }

SubjectiveModel model(double mu1, double mu2, double gamma, double var = 1.0) {
  return {mu1, mu2, var, var, gamma};
}
}  // namespace

TEST_SUITE_BEGIN("stage_game");

TEST_CASE("continuation value closed forms") {
  // Linear u2: the continuation value is the conditional mean.
  CHECK(stage::continuation_value(search(0.0), 0.7, model(0, 0, 0.5)) ==
        doctest::Approx(-0.35).epsilon(1e-14));
  // q = 0.5 at the symmetric point: 0.5 * phi(0).
  CHECK(stage::continuation_value(search(0.5), 0.0, model(0, 0, 0.5)) ==
        doctest::Approx(0.19947114020071635).epsilon(1e-12));
  // Cost draws: u2 = -x2.
  CHECK(stage::continuation_value(StageGame::cost_draws(), 0.8,
                                  model(0, 0, 0.5)) ==
        doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("tabulated continuation value matches the closed form") {
  const StageGame tab = StageGame::tabulated(
      [](double x) { return x; },
      [](double x1, double x2) {
        return 0.3 * std::max(x1, x2) + 0.7 * x2;
      },
      Direction::benefit);
  for (double x1 : {-1.0, 0.2, 1.5}) {
    const double closed =
        stage::continuation_value(search(0.3), x1, model(0.1, -0.2, 0.5));
    const double quad =
        stage::continuation_value(tab, x1, model(0.1, -0.2, 0.5));
    CHECK(quad == doctest::Approx(closed).epsilon(2e-3));
  }
}

TEST_CASE("indifference cutoff analytic cases") {
  // x = mu2 - gamma x  =>  c = mu2 / (1 + gamma).
  CHECK(stage::optimal_cutoff(search(0.0), model(0, 0, 0.7)) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(stage::optimal_cutoff(search(0.0), model(0, 1, 0.5)) ==
        doctest::Approx(1.0 / 1.5).epsilon(1e-9));
  // Cost draws reflect to the same fixed point; stop region is x1 < c.
  const StageGame cost = StageGame::cost_draws();
  const double c = stage::optimal_cutoff(cost, model(0, 0, 0.5));
  CHECK(c == doctest::Approx(0.0).epsilon(1e-9));
  // Just below c continuing is worse than stopping (costs!): u1 > CV.
  CHECK(cost.u1(-0.1) >
        stage::continuation_value(cost, -0.1, model(0, 0, 0.5)));
  CHECK(cost.u1(0.1) <
        stage::continuation_value(cost, 0.1, model(0, 0, 0.5)));
}

TEST_CASE("gamma = 0 has no indifference point for linear search") {
  CHECK_THROWS_AS(stage::optimal_cutoff(search(0.0), model(0, 0, 0.0)),
                  DomainError);
}

TEST_CASE("objective cutoff") {
  CHECK(stage::objective_cutoff(search(0.0), {0, 0, 1, 0}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(stage::objective_cutoff(search(0.0), {0, -10, 1, 0}) ==
        doctest::Approx(-10.0).epsilon(1e-8));
  const StageGame impatient = StageGame::wait_cost(search(0.0), 10.0);
  CHECK(stage::objective_cutoff(impatient, {0, 0, 1, 0}) ==
        doctest::Approx(-10.0).epsilon(1e-8));
}

TEST_CASE("strategy value") {
  const SubjectiveModel m = model(0, 0, 0.5);
  CHECK(stage::strategy_value(kInf, search(0.0), m) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(stage::strategy_value(-kInf, search(0.0), m) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // E[X1 1{X1>0}] + E[-gamma X1 | X1 <= 0] P(X1 <= 0).
  CHECK(stage::strategy_value(0.0, search(0.0), m) ==
        doctest::Approx(0.5984134206021490).epsilon(1e-9));
}

TEST_CASE("strategy value matches a direct-integration oracle") {
  const SubjectiveModel m = model(0.2, -0.1, 0.6);
  const StageGame g = search(0.4);
  for (double c : {-1.0, 0.3, 1.4}) {
    const double direct =
        oracles::simpson(
            [&](double x) {
              return x * oracles::normal_density(x, m.mu1, 1.0);
            },
            c, m.mu1 + 14.0) +
        oracles::simpson(
            [&](double x) {
              const double cm = m.mu2 - m.gamma * (x - m.mu1);
              const double emax = stage::expected_max(x, cm, 1.0);
              return (0.4 * emax + 0.6 * cm) *
                     oracles::normal_density(x, m.mu1, 1.0);
            },
            m.mu1 - 14.0, c);
    CHECK(stage::strategy_value(c, g, m) ==
          doctest::Approx(direct).epsilon(1e-7));
  }
}

TEST_CASE("cutoff is strictly increasing in mu2") {
  for (double q : {0.0, 0.4}) {
    double prev = -kInf;
    for (double mu2 = -2.0; mu2 <= 2.0; mu2 += 0.25) {
      const double c = stage::optimal_cutoff(search(q), model(0.3, mu2, 0.5));
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("cutoff Lipschitz bounds") {
  CounterRng rng(21);
  for (int i = 0; i < 60; ++i) {
    const double gamma = 0.2 + 1.3 * rng.next_uniform();
    const double q = 0.9 * rng.next_uniform();
    const double mu1 = 2.0 * (rng.next_uniform() - 0.5);
    const double a = 3.0 * (rng.next_uniform() - 0.5);
    const double b = a + 2.0 * rng.next_uniform() + 1e-3;
    const double ca = stage::optimal_cutoff(search(q), model(mu1, a, gamma));
    const double cb = stage::optimal_cutoff(search(q), model(mu1, b, gamma));
    CHECK(std::abs(cb - ca) <= (b - a) / gamma + 1e-8);
    CHECK(std::abs(cb - ca) <= (b - a) / (1.0 + gamma) + 1e-8);
  }
  // The 1/(1+gamma) constant binds exactly for q = 0.
  const double c0 = stage::optimal_cutoff(search(0.0), model(0, 0, 0.5));
  const double c1 = stage::optimal_cutoff(search(0.0), model(0, 1, 0.5));
  CHECK(c1 - c0 == doctest::Approx(1.0 / 1.5).epsilon(1e-8));
}

TEST_CASE("cutoff depends on mu2 + gamma mu1 only") {
  CounterRng rng(22);
  for (int i = 0; i < 40; ++i) {
    const double gamma = 0.2 + 1.0 * rng.next_uniform();
    const double mu1 = 3.0 * (rng.next_uniform() - 0.5);
    const double mu2 = 3.0 * (rng.next_uniform() - 0.5);
    const double mu1_ref = 3.0 * (rng.next_uniform() - 0.5);
    const double shifted = mu2 + gamma * (mu1 - mu1_ref);
    const double lhs = stage::optimal_cutoff(search(0.3), model(mu1, mu2, gamma));
    const double rhs =
        stage::optimal_cutoff(search(0.3), model(mu1_ref, shifted, gamma));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("strategy value is single peaked around the optimal cutoff") {
  const SubjectiveModel m = model(0, -0.3, 0.5);
  const StageGame g = search(0.2);
  const double c_star = stage::optimal_cutoff(g, m);
  double prev = -kInf;
  for (double c = c_star - 1.5; c < c_star - 1e-6; c += 0.25) {
    const double v = stage::strategy_value(c, g, m);
    CHECK(v > prev);
    prev = v;
  }
  prev = stage::strategy_value(c_star, g, m);
  for (double c = c_star + 0.25; c < c_star + 1.5; c += 0.25) {
    const double v = stage::strategy_value(c, g, m);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("payoff dominance raises the cutoff") {
  const SubjectiveModel m = model(0, 0.2, 0.5);
  const double c_low = stage::optimal_cutoff(search(0.1), m);
  const double c_high = stage::optimal_cutoff(search(0.6), m);
  CHECK(c_high > c_low);
  const double c_wait =
      stage::optimal_cutoff(StageGame::wait_cost(search(0.1), 0.5), m);
  CHECK(c_wait < c_low);
}

TEST_CASE("tabulated games are probed for regularity") {
  // u2 steeper in x1 than u1: violates the dominance condition.
  CHECK_THROWS_AS(StageGame::tabulated(
                      [](double x) { return x; },
                      [](double x1, double x2) { return 2.0 * x1 + x2; },
                      Direction::benefit),
                  AssumptionError);
  // Decreasing u1 in a benefit game.
  CHECK_THROWS_AS(StageGame::tabulated(
                      [](double x) { return -x; },
                      [](double, double x2) { return x2; },
                      Direction::benefit),
                  AssumptionError);
  // A valid cost-direction family passes.
  CHECK_NOTHROW(StageGame::tabulated(
      [](double x) { return -x; }, [](double, double x2) { return -x2; },
      Direction::cost));
  CHECK_THROWS_AS(StageGame::wait_cost(StageGame::cost_draws(), 1.0),
                  DomainError);
}

TEST_SUITE_END();
