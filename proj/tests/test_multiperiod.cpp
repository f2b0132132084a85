#include "gfstop/multiperiod.hpp"

#include <cmath>

#include "doctest.h"
#include "gfstop/errors.hpp"
#include "gfstop/inference.hpp"
#include "gfstop/rng.hpp"

using namespace gfstop;
using multiperiod::AlphaDeltaVerdict;
using multiperiod::Method;
using multiperiod::MultiPeriodSpec;

namespace {

MultiPeriodSpec random_spec(CounterRng& rng, int L) {
  std::vector<double> tri(static_cast<std::size_t>(L - 1) * L / 2);
  for (double& g : tri) g = rng.next_uniform();
  std::vector<double> mu(L);
  for (double& m : mu) m = 2.0 * (rng.next_uniform() - 0.5);
  std::vector<double> cuts(L - 1);
  for (double& c : cuts) c = 3.0 * (rng.next_uniform() - 0.5);
  return MultiPeriodSpec(L, tri, mu, 0.5 + rng.next_uniform(), cuts);
}

}  // namespace

TEST_SUITE_BEGIN("multiperiod");

TEST_CASE("path weight sums") {
  CounterRng rng(31);
  const auto spec = random_spec(rng, 4);
  CHECK(multiperiod::path_weight_sum(spec, 2, 1) == -spec.gamma(2, 1));
  // Two periods ahead: direct edge plus the one indirect route.
  CHECK(multiperiod::path_weight_sum(spec, 3, 1) ==
        doctest::Approx(-spec.gamma(3, 1) +
                        spec.gamma(3, 2) * spec.gamma(2, 1))
            .epsilon(1e-15));
  // alpha-delta family: -alpha delta + alpha^2 for the 3 -> 1 pair.
  const auto ad = MultiPeriodSpec::alpha_delta(3, 0.5, 1.0, {0, 0, 0}, 1.0,
                                               {0.0, 0.0});
  CHECK(multiperiod::path_weight_sum(ad, 3, 1) ==
        doctest::Approx(-0.25).epsilon(1e-15));
  const auto ad2 = MultiPeriodSpec::alpha_delta(3, 0.4, 0.9, {0, 0, 0}, 1.0,
                                                {0.0, 0.0});
  CHECK(multiperiod::path_weight_sum(ad2, 3, 1) ==
        doctest::Approx(-0.4 * 0.9 + 0.16).epsilon(1e-15));
}

TEST_CASE("the recursion law of the alpha-delta family") {
  const double alpha = 0.35, delta = 0.8;
  std::vector<double> mu(6, 0.0), cuts(5, 0.0);
  const auto spec =
      MultiPeriodSpec::alpha_delta(6, alpha, delta, mu, 1.0, cuts);
  for (int i = 2; i < 6; ++i) {
    CHECK(multiperiod::path_weight_sum(spec, i + 1, 1) ==
          doctest::Approx((delta - alpha) *
                          multiperiod::path_weight_sum(spec, i, 1))
              .epsilon(1e-13));
  }
}

TEST_CASE("two periods reduce to the basic pseudo-true formula") {
  const MultiPeriodSpec spec(2, {0.5}, {0.1, -0.2}, 1.3, {0.7});
  const auto got = multiperiod::pseudo_true_L(spec, Method::iterative);
  const auto want =
      inference::pseudo_true({0.1, -0.2, 1.3, 0.0}, 0.7, 0.5);
  CHECK(got[0] == want.mu1_star);
  CHECK(got[1] == doctest::Approx(want.mu2_star).epsilon(1e-13));
}

TEST_CASE("zero bias recovers the truth") {
  const MultiPeriodSpec spec(4, std::vector<double>(6, 0.0),
                             {0.3, -0.1, 0.2, 0.5}, 1.0, {0.0, 0.5, -0.5});
  for (auto method : {Method::iterative, Method::paths}) {
    const auto mu = multiperiod::pseudo_true_L(spec, method);
    CHECK(mu[0] == 0.3);
    CHECK(mu[1] == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(mu[3] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("the delta = 0 over-optimism example") {
  const auto spec = MultiPeriodSpec::alpha_delta(3, 0.5, 0.0, {0, 0, 0}, 1.0,
                                                 {-2.0, 0.0});
  for (auto method : {Method::iterative, Method::paths}) {
    const auto mu = multiperiod::pseudo_true_L(spec, method);
    CHECK(mu[2] == doctest::Approx(0.19436160280427754).epsilon(1e-9));
    CHECK(mu[2] > spec.mu_true(3));
  }
}

TEST_CASE("iterative and path-counting methods agree") {
  CounterRng rng(77);
  for (int i = 0; i < 30; ++i) {
    const int L = 2 + static_cast<int>(rng.next_uniform() * 7);
    const auto spec = random_spec(rng, L);
    const auto a = multiperiod::pseudo_true_L(spec, Method::iterative);
    const auto b = multiperiod::pseudo_true_L(spec, Method::paths);
    for (int k = 0; k < L; ++k)
      CHECK(std::abs(a[k] - b[k]) <= 1e-12 * (1.0 + std::abs(a[k])));
  }
}

TEST_CASE("slow decay keeps every estimate pessimistic") {
  CounterRng rng(78);
  for (int i = 0; i < 20; ++i) {
    const int L = 3 + static_cast<int>(rng.next_uniform() * 5);
    const double alpha = 0.1 + 0.4 * rng.next_uniform();
    const double delta = alpha + (1.0 - alpha) * (0.1 + 0.9 * rng.next_uniform());
    std::vector<double> mu(L, 0.0), cuts(L - 1);
    for (double& c : cuts) c = 4.0 * (rng.next_uniform() - 0.5);
    const auto spec = MultiPeriodSpec::alpha_delta(L, alpha, delta, mu, 1.0,
                                                   cuts);
    const auto est = multiperiod::pseudo_true_L(spec, Method::paths);
    for (int k = 1; k < L; ++k) CHECK(est[k] < spec.mu_true(k + 1));
  }
}

TEST_CASE("alpha-delta classification") {
  CHECK(multiperiod::alpha_delta_classify(0.3, 0.9, 5) ==
        AlphaDeltaVerdict::all_pessimistic);
  CHECK(multiperiod::alpha_delta_classify(0.5, 0.0, 3) ==
        AlphaDeltaVerdict::optimism_possible);
  CHECK(multiperiod::alpha_delta_classify(0.4, 0.4, 4) ==
        AlphaDeltaVerdict::boundary);
  // L = 2 only has direct edges, which are always negative.
  CHECK(multiperiod::alpha_delta_classify(0.5, 0.0, 2) ==
        AlphaDeltaVerdict::all_pessimistic);
}

TEST_CASE("classification matches sign enumeration") {
  CounterRng rng(79);
  for (int i = 0; i < 25; ++i) {
    const double alpha = 0.05 + 0.9 * rng.next_uniform();
    double delta = rng.next_uniform();
    if (delta == alpha) delta += 1e-6;
    const int L = 3 + static_cast<int>(rng.next_uniform() * 5);
    std::vector<double> mu(L, 0.0), cuts(L - 1, 0.0);
    const auto spec =
        MultiPeriodSpec::alpha_delta(L, alpha, delta, mu, 1.0, cuts);
    bool any_nonnegative = false;
    for (int a = 2; a <= L; ++a)
      for (int b = 1; b < a; ++b)
        if (multiperiod::path_weight_sum(spec, a, b) >= 0.0)
          any_nonnegative = true;
    const auto verdict = multiperiod::alpha_delta_classify(alpha, delta, L);
    CHECK(verdict == (any_nonnegative ? AlphaDeltaVerdict::optimism_possible
                                      : AlphaDeltaVerdict::all_pessimistic));
  }
}

TEST_CASE("history-dependent rules are rejected") {
  CHECK_THROWS_AS(MultiPeriodSpec::with_history_dependent_cutoffs(
                      3, {0.1, 0.1, 0.1}, {0, 0, 0}, 1.0, {}),
                  UnsupportedError);
  CHECK_THROWS_AS(MultiPeriodSpec(3, {0.1, -0.2, 0.1}, {0, 0, 0}, 1.0,
                                  {0.0, 0.0}),
                  DomainError);
}

TEST_SUITE_END();
