#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gfstop/stage_game.hpp"

namespace gfstop::inference {

/// Result of a pseudo-true parameter computation. Only the fields estimated
/// by the invoked variant are populated.
struct PseudoTrueEstimate {
  double mu1_star = 0.0;
  double mu2_star = 0.0;
  std::optional<double> var1_star;
  std::optional<double> var2_star;
  std::optional<double> gamma_star;
};

/// A list of censoring thresholds with normalized mixture weights (the
/// per-generation thresholds with equal weights, or an unequal mixture).
struct CensoringSpec {
  std::vector<double> cutoffs;
  std::vector<double> weights;

  static CensoringSpec equal(std::vector<double> cutoffs);
  void validate() const;
};

/// KL divergence from the true censored-history distribution at threshold c
/// to the one implied by the subjective model: the marginal X1 term in
/// closed form plus an outer quadrature over the censored region with the
/// Gaussian-KL inner integral in closed form.
double kl_divergence(const TrueModel& true_model, const SubjectiveModel& subj,
                     double c);

/// Pseudo-true fundamentals for a single threshold:
/// mu1* = mu1_true, mu2* = mu2_true - gamma (mu1_true - E[X1 | X1 <= c]).
PseudoTrueEstimate pseudo_true(const TrueModel& true_model, double c,
                               double gamma);

/// Large-generations version: mu2* is the average of the per-threshold
/// pseudo-true values weighted by weights[t] * P[X1 <= c_t].
PseudoTrueEstimate pseudo_true_multi(const TrueModel& true_model,
                                     const CensoringSpec& spec, double gamma);

/// Joint mean-variance estimation: means as in pseudo_true, var1* equals the
/// true variance and var2* = sd^2 + gamma^2 Var[X1 | X1 <= c].
PseudoTrueEstimate pseudo_true_mean_var(const TrueModel& true_model, double c,
                                        double gamma);

/// Common-fundamental (mu1 = mu2) estimation.
PseudoTrueEstimate pseudo_true_constrained(double mu_common_true, double sd,
                                           double c, double gamma);

/// Joint estimation with gamma restricted to [gamma_lo, gamma_hi]; requires
/// the true gamma to lie outside that interval.
PseudoTrueEstimate pseudo_true_gamma_range(const TrueModel& true_model,
                                           double c, double gamma_lo,
                                           double gamma_hi);

/// Cost-direction censoring (X2 observed when X1 >= c).
PseudoTrueEstimate pseudo_true_cost(const TrueModel& true_model, double c,
                                    double gamma);

/// Population mixing a fraction alpha of selection neglecters (who censor at
/// the correct-beliefs cutoff of `game`) with baseline agents censoring at
/// c_baseline.
PseudoTrueEstimate pseudo_true_selection_mix(const TrueModel& true_model,
                                             double c_baseline, double alpha,
                                             double gamma,
                                             const StageGame& game);

/// Inference when predecessors' draws were encoded with reference-dependence
/// terms of scale eta around prior beliefs (mu1o, mu2o).
PseudoTrueEstimate pseudo_true_ref_dependence(const TrueModel& true_model,
                                              double mu1o, double mu2o,
                                              double eta, double c,
                                              double gamma);

/// The two summary statistics (E[h1], E[h2 + gamma h1 | h2 observed]) of the
/// censored-history mixture.
std::pair<double, double> sufficient_statistics(const TrueModel& true_model,
                                                const CensoringSpec& spec,
                                                double gamma);

enum class ParameterSet { means, means_and_vars, diagonal, with_gamma };

/// Independent cross-check: derivative-free minimization of kl_divergence
/// over the chosen parameter set, multi-start from a coarse grid.
PseudoTrueEstimate kl_oracle_minimize(const TrueModel& true_model, double c,
                                      double gamma, ParameterSet set,
                                      double gamma_lo = 0.0,
                                      double gamma_hi = 0.0);

}  // namespace gfstop::inference
