#include "gfstop/inference.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "gfstop/errors.hpp"
#include "gfstop/gauss.hpp"
#include "gfstop/rng.hpp"

using namespace gfstop;
using inference::CensoringSpec;
using inference::ParameterSet;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const TrueModel kStd{0.0, 0.0, 1.0, 0.0};
}  // namespace

TEST_SUITE_BEGIN("inference");

TEST_CASE("kl divergence basics") {
  // A correctly specified model fits exactly.
  CHECK(std::abs(inference::kl_divergence(kStd, {0, 0, 1, 1, 0}, -1.0)) <
        1e-10);
  CHECK(std::abs(inference::kl_divergence(kStd, {0, 0, 1, 1, 0}, kInf)) <
        1e-10);
  // A biased model cannot fit independent data.
  CHECK(inference::kl_divergence(kStd, {0, 0, 1, 1, 0.5}, kInf) > 1e-2);
  // The pseudo-true point dominates the naive truth-parameters point.
  const double at_star =
      inference::kl_divergence(kStd, {0, -0.1438, 1, 1, 0.5}, 1.0);
  const double at_truth =
      inference::kl_divergence(kStd, {0, 0, 1, 1, 0.5}, 1.0);
  CHECK(at_star < at_truth);
  CHECK(at_star >= 0.0);
}

TEST_CASE("pseudo-true fundamentals") {
  const auto est = inference::pseudo_true(kStd, 1.0, 0.5);
  CHECK(est.mu1_star == 0.0);
  CHECK(est.mu2_star == doctest::Approx(-0.14379998546958918).epsilon(1e-10));
  // The reported figure value.
  CHECK(std::abs(est.mu2_star - (-0.1438)) < 5e-4);

  CHECK(inference::pseudo_true(kStd, kInf, 0.5).mu2_star == 0.0);
  CHECK(std::abs(inference::pseudo_true(kStd, 1.0, 1e-9).mu2_star) < 1e-8);
  CHECK_THROWS_AS(inference::pseudo_true(kStd, -kInf, 0.5),
                  NoIdentificationError);
}

TEST_CASE("multi-threshold pseudo-true values") {
  const auto single = inference::pseudo_true_multi(
      kStd, CensoringSpec::equal({0.7}), 0.5);
  CHECK(single.mu2_star ==
        doctest::Approx(inference::pseudo_true(kStd, 0.7, 0.5).mu2_star)
            .epsilon(1e-13));
  const auto repeated = inference::pseudo_true_multi(
      kStd, CensoringSpec::equal({0.7, 0.7}), 0.5);
  CHECK(repeated.mu2_star == doctest::Approx(single.mu2_star).epsilon(1e-13));
  // Thresholds {0, 1} with equal weights: the Phi-weighted average of
  // mu2*(0) = -0.39894228 and mu2*(1) = -0.14379999.
  const auto mixed =
      inference::pseudo_true_multi(kStd, CensoringSpec::equal({0.0, 1.0}), 0.5);
  CHECK(mixed.mu2_star ==
        doctest::Approx(-0.23890689056600862).epsilon(1e-10));
  // Mixture bounds.
  const double lo = inference::pseudo_true(kStd, 0.0, 0.5).mu2_star;
  const double hi = inference::pseudo_true(kStd, 1.0, 0.5).mu2_star;
  CHECK(mixed.mu2_star > lo);
  CHECK(mixed.mu2_star < hi);
  CHECK_THROWS_AS(
      inference::pseudo_true_multi(kStd, CensoringSpec::equal({-kInf}), 0.5),
      NoIdentificationError);
}

TEST_CASE("mean-variance pseudo-true values") {
  const auto est = inference::pseudo_true_mean_var(kStd, 1.0, 0.5);
  CHECK(*est.var1_star == 1.0);
  CHECK(*est.var2_star ==
        doctest::Approx(1.1574215714441514).epsilon(1e-10));
  CHECK(std::abs(*est.var2_star - 1.157) < 1e-3);
  CHECK(*inference::pseudo_true_mean_var(kStd, 1.0, 0.0).var2_star == 1.0);
  CHECK(*inference::pseudo_true_mean_var(kStd, kInf, 0.5).var2_star ==
        doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("constrained common-fundamental inference") {
  const auto est = inference::pseudo_true_constrained(0.0, 1.0, 1.0, 0.5);
  CHECK(est.mu1_star == est.mu2_star);
  CHECK(est.mu2_star ==
        doctest::Approx(-0.06272949622548028).epsilon(1e-9));
  CHECK(inference::pseudo_true_constrained(0.3, 1.0, -kInf, 0.5).mu2_star ==
        0.3);
  CHECK(std::abs(inference::pseudo_true_constrained(0.0, 1.0, 1.0, 1e-9)
                     .mu2_star) < 1e-8);
  // Dominance ordering mu2*(c) < mu_diag*(c) < mu2_true.
  for (double c : {-1.0, 0.0, 1.5}) {
    const double flexible = inference::pseudo_true(kStd, c, 0.5).mu2_star;
    const double diag =
        inference::pseudo_true_constrained(0.0, 1.0, c, 0.5).mu2_star;
    CHECK(flexible < diag);
    CHECK(diag < 0.0);
  }
}

TEST_CASE("gamma-range inference") {
  const auto low = inference::pseudo_true_gamma_range(kStd, 1.0, 0.3, 0.5);
  CHECK(*low.gamma_star == 0.3);
  CHECK(low.mu2_star ==
        doctest::Approx(-0.08627999128175351).epsilon(1e-10));

  const TrueModel correlated{0.0, 0.0, 1.0, 0.6};
  const auto high =
      inference::pseudo_true_gamma_range(correlated, 1.0, 0.3, 0.5);
  CHECK(*high.gamma_star == 0.5);
  CHECK(high.mu2_star ==
        doctest::Approx(0.1 * 0.28759997093917836).epsilon(1e-8));
  CHECK(high.mu2_star > correlated.mu2_true);

  // Degenerate range reduces to dogmatic inference.
  const auto degenerate =
      inference::pseudo_true_gamma_range(kStd, 1.0, 0.4, 0.4);
  CHECK(degenerate.mu2_star ==
        doctest::Approx(inference::pseudo_true(kStd, 1.0, 0.4).mu2_star)
            .epsilon(1e-12));
  CHECK_THROWS_AS(inference::pseudo_true_gamma_range(kStd, 1.0, -0.1, 0.5),
                  UnsupportedError);
}

TEST_CASE("cost-direction inference") {
  const auto est = inference::pseudo_true_cost(kStd, 0.0, 0.5);
  CHECK(est.mu2_star == doctest::Approx(0.3989422804014327).epsilon(1e-10));
  CHECK(inference::pseudo_true_cost(kStd, -kInf, 0.5).mu2_star == 0.0);
  for (double c : {-1.0, 0.3, 2.0}) {
    CHECK(inference::pseudo_true_cost(kStd, c, 0.5).mu2_star ==
          doctest::Approx(-inference::pseudo_true(kStd, -c, 0.5).mu2_star)
              .epsilon(1e-13));
    CHECK(inference::pseudo_true_cost(kStd, c, 0.5).mu2_star > 0.0);
  }
}

TEST_CASE("selection-neglect mixtures") {
  const StageGame game = StageGame::search_with_recall(0.0);
  const auto pure =
      inference::pseudo_true_selection_mix(kStd, -1.0, 0.0, 0.5, game);
  CHECK(pure.mu2_star ==
        doctest::Approx(inference::pseudo_true(kStd, -1.0, 0.5).mu2_star)
            .epsilon(1e-12));
  // When the baseline cutoff equals the neglecters' cutoff the mixture is
  // degenerate regardless of alpha.
  const double c_neglect = 0.0;  // C(0, 0; gamma) for search without recall
  const auto mix_a =
      inference::pseudo_true_selection_mix(kStd, c_neglect, 0.3, 0.5, game);
  const auto mix_b =
      inference::pseudo_true_selection_mix(kStd, c_neglect, 0.7, 0.5, game);
  CHECK(mix_a.mu2_star == doctest::Approx(mix_b.mu2_star).epsilon(1e-9));
  CHECK(mix_a.mu2_star ==
        doctest::Approx(inference::pseudo_true(kStd, 0.0, 0.5).mu2_star)
            .epsilon(1e-10));
  // Plug-in value for alpha = 0.5, c_baseline = -1: weights proportional to
  // {0.5 Phi(0), 0.5 Phi(-1)} over mu2*(0), mu2*(-1).
  const auto mixed =
      inference::pseudo_true_selection_mix(kStd, -1.0, 0.5, 0.5, game);
  CHECK(mixed.mu2_star ==
        doctest::Approx(-0.48653146019485987).epsilon(1e-9));
  CHECK(mixed.mu2_star < 0.0);
}

TEST_CASE("reference-dependence inference") {
  for (double c : {-0.5, 0.8}) {
    const auto base = inference::pseudo_true_ref_dependence(
        kStd, 0.2, -0.3, 0.0, c, 0.5);
    const auto plain = inference::pseudo_true(kStd, c, 0.5);
    CHECK(base.mu1_star == plain.mu1_star);
    CHECK(base.mu2_star == doctest::Approx(plain.mu2_star).epsilon(1e-13));
  }
  // gamma = 0: no dependence on the censoring threshold.
  const auto a =
      inference::pseudo_true_ref_dependence(kStd, 0.2, -0.3, 0.4, -1.0, 0.0);
  const auto b =
      inference::pseudo_true_ref_dependence(kStd, 0.2, -0.3, 0.4, 2.0, 0.0);
  CHECK(a.mu2_star == b.mu2_star);
  CHECK(a.mu1_star == doctest::Approx(1.4 * 0.0 - 0.4 * 0.2).epsilon(1e-13));
  CHECK(a.mu2_star == doctest::Approx(1.4 * 0.0 - 0.4 * (-0.3)).epsilon(1e-13));
}

TEST_CASE("sufficient statistics") {
  const auto unbiased =
      inference::sufficient_statistics(kStd, CensoringSpec::equal({0.7}), 0.0);
  CHECK(unbiased.first == 0.0);
  CHECK(unbiased.second == 0.0);

  const auto single =
      inference::sufficient_statistics(kStd, CensoringSpec::equal({1.0}), 0.5);
  CHECK(single.second ==
        doctest::Approx(-0.14379998546958918).epsilon(1e-10));
  // Lambda matching: lambda2 = mu2*(spec) + gamma mu1*.
  const auto est =
      inference::pseudo_true_multi(kStd, CensoringSpec::equal({0.0, 1.0}), 0.5);
  const auto stats =
      inference::sufficient_statistics(kStd, CensoringSpec::equal({0.0, 1.0}),
                                       0.5);
  CHECK(stats.second ==
        doctest::Approx(est.mu2_star + 0.5 * est.mu1_star).epsilon(1e-12));
  // Lambda only depends on mu2 + gamma mu1 in the generating model.
  const double gamma = 0.5;
  const TrueModel gen_a{est.mu1_star, est.mu2_star, 1.0, gamma};
  const TrueModel gen_b{1.0, est.mu2_star - gamma * 1.0 + gamma * est.mu1_star,
                        1.0, gamma};
  const auto spec = CensoringSpec::equal({0.0, 1.0});
  CHECK(inference::sufficient_statistics(gen_a, spec, gamma).second ==
        doctest::Approx(
            inference::sufficient_statistics(gen_b, spec, gamma).second)
            .epsilon(1e-12));
  CHECK_THROWS_AS(
      inference::sufficient_statistics(kStd, CensoringSpec::equal({-kInf}),
                                       0.5),
      NoIdentificationError);
}

TEST_CASE("kl oracle recovers the closed forms") {
  const auto means =
      inference::kl_oracle_minimize(kStd, 1.0, 0.5, ParameterSet::means);
  CHECK(std::abs(means.mu1_star - 0.0) < 1e-3);
  CHECK(std::abs(means.mu2_star - (-0.1438)) < 1e-3);

  const auto mv = inference::kl_oracle_minimize(kStd, 1.0, 0.5,
                                                ParameterSet::means_and_vars);
  CHECK(std::abs(mv.mu2_star - (-0.1438)) < 1e-3);
  CHECK(std::abs(*mv.var2_star - 1.157) < 1e-3);
  CHECK(std::abs(*mv.var1_star - 1.0) < 1e-3);

  const auto diag =
      inference::kl_oracle_minimize(kStd, 1.0, 0.5, ParameterSet::diagonal);
  CHECK(std::abs(diag.mu2_star - (-0.06273)) < 1e-3);

  const auto with_gamma = inference::kl_oracle_minimize(
      kStd, 1.0, 0.0, ParameterSet::with_gamma, 0.3, 0.5);
  CHECK(std::abs(*with_gamma.gamma_star - 0.3) < 1e-3);
  CHECK(std::abs(with_gamma.mu2_star - (-0.086280)) < 1e-3);
}

TEST_CASE("oracle equivalence on randomized scenarios") {
  CounterRng rng(99);
  for (int i = 0; i < 20; ++i) {
    const TrueModel t{2.0 * (rng.next_uniform() - 0.5),
                      2.0 * (rng.next_uniform() - 0.5), 1.0, 0.0};
    const double c = t.mu1_true + 4.0 * (rng.next_uniform() - 0.5);
    const double gamma = 0.2 + 1.0 * rng.next_uniform();
    const auto closed = inference::pseudo_true(t, c, gamma);
    const auto oracle =
        inference::kl_oracle_minimize(t, c, gamma, ParameterSet::means);
    CHECK(std::abs(closed.mu1_star - oracle.mu1_star) < 1e-3);
    CHECK(std::abs(closed.mu2_star - oracle.mu2_star) < 1e-3);
  }
}

TEST_CASE("monotonicity and pessimism invariants") {
  double prev = -kInf;
  for (double c = -3.0; c <= 3.0; c += 0.5) {
    const double m = inference::pseudo_true(kStd, c, 0.5).mu2_star;
    CHECK(m > prev);
    CHECK(m < kStd.mu2_true);
    prev = m;
  }
  // Variance distortion grows with gamma and with the threshold.
  const double v_small = *inference::pseudo_true_mean_var(kStd, 1.0, 0.3)
                              .var2_star;
  const double v_large = *inference::pseudo_true_mean_var(kStd, 1.0, 0.8)
                              .var2_star;
  CHECK(v_large > v_small);
  const double v_low = *inference::pseudo_true_mean_var(kStd, -1.0, 0.5)
                            .var2_star;
  const double v_high = *inference::pseudo_true_mean_var(kStd, 1.0, 0.5)
                             .var2_star;
  CHECK(v_high > v_low);
  CHECK(v_low > 1.0);
}

TEST_SUITE_END();
