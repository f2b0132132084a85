#pragma once

#include <string>
#include <utility>

#include "gfstop/dynamics.hpp"
#include "gfstop/inference.hpp"
#include "gfstop/stage_game.hpp"

namespace gfstop::mom {

/// Observed moments of the history distribution: the mean first draw and the
/// mean uncensored second draw (independent truth makes both free of c).
struct TrueMoments {
  double m1 = 0.0;
  double m2 = 0.0;
};

/// A parametric feasible-model family for (X1, X2) with negative conditional
/// dependence: the marginal X1 mean rises in theta1 and the conditional X2
/// mean rises in theta2 and falls in x1. Construction probes these
/// monotonicity conditions on a grid.
class FeasibleFamily {
 public:
  /// X1 ~ N(theta1, sd^2), X2 | x1 ~ N(theta2 - gamma (x1 - theta1), sd^2).
  static FeasibleFamily gaussian(double sd, double gamma);

  /// Scaled Gumbel bivariate exponentials X_i = theta_i * Xt_i with
  /// dependence parameter alpha in [-1, 0). The conditional mean follows the
  /// published closed form E[Xt2 | Xt1 = x] = 1 - alpha/2 - alpha e^{-x}.
  static FeasibleFamily gumbel_biexponential(double alpha);

  /// X1 ~ Beta(theta1, 1), X2 | x1 ~ Beta((1 - x1) theta2, 1) on [0, 1].
  static FeasibleFamily beta();

  double marginal1_mean(double theta1) const;
  double marginal1_cdf(double theta1, double c) const;
  double conditional2_mean(double theta1, double theta2, double x1) const;
  /// E[X2 | X1 <= c] under (theta1, theta2).
  double censored2_mean(double theta1, double theta2, double c) const;

  std::pair<double, double> support1() const;
  std::pair<double, double> support2() const;
  std::pair<double, double> theta1_range() const;
  std::pair<double, double> theta2_range() const;
  std::string name() const;

 private:
  enum class Kind { gaussian, gumbel, beta };
  FeasibleFamily(Kind kind, double a, double b);
  void probe_assumptions() const;

  Kind kind_;
  double sd_ = 1.0;     // gaussian
  double gamma_ = 0.0;  // gaussian
  double alpha_ = 0.0;  // gumbel
};

/// Method-of-moments estimator: theta1 inverts the marginal mean, theta2
/// matches the weighted mixture of censored second-period means across the
/// censoring thresholds. Both are monotone bisections.
std::pair<double, double> mom_estimate(const FeasibleFamily& family,
                                       const TrueMoments& true_moments,
                                       const inference::CensoringSpec& spec);

/// Large-generations method-of-moments dynamics for a stage game whose
/// second-period payoff is linear in x2: each generation estimates from the
/// full cutoff history, then sets the cutoff solving
/// u1(x) = u2(x, conditional2_mean(theta1, theta2, x)).
dynamics::GenerationTrace mom_dynamics(const FeasibleFamily& family,
                                       const StageGame& game,
                                       const TrueMoments& true_moments,
                                       double c0, int T);

}  // namespace gfstop::mom
