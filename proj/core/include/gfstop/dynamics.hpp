#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfstop/stage_game.hpp"

namespace gfstop::dynamics {

/// Per-generation record of inferred fundamentals, cutoffs, and welfare.
/// Entry k describes generation k+1; c0 is the generation-0 initial
/// condition.
struct GenerationTrace {
  double c0 = 0.0;
  std::vector<double> mu1;
  std::vector<double> mu2;
  std::vector<double> var2;  // present only for mean-variance dynamics
  std::vector<double> cutoff;
  std::vector<double> welfare_loss;
  bool has_var2 = false;
};

struct SteadyState {
  double mu2_inf = 0.0;
  double c_inf = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// The one-generation-forward belief map
/// I(mu2) = mu2_true - gamma (mu1_true - E[X1 | X1 <= C(mu1_true, mu2)]).
double iteration_map(double mu2, const StageGame& game,
                     const TrueModel& true_model, double gamma);

/// Fixed point of the iteration map by direct iteration from mu2_true, with
/// step-halving if residuals oscillate. Uniqueness is checked by re-running
/// from mu2_true +- 5 sd and requiring agreement within 10 tol.
SteadyState steady_state(const StageGame& game, const TrueModel& true_model,
                         double gamma, double tol = 1e-10,
                         int max_iter = 10000);

enum class Environment { baseline, auxiliary };

/// Deterministic generation-by-generation learning dynamics. In the
/// auxiliary environment each generation infers from its immediate
/// predecessor only; in the baseline environment from all past generations
/// with equal weights.
GenerationTrace run_generations(Environment env, const StageGame& game,
                                const TrueModel& true_model, double gamma,
                                double c0, int T);

/// Auxiliary-environment dynamics for agents estimating means and variances
/// jointly.
GenerationTrace run_generations_mean_var(const StageGame& game,
                                         const TrueModel& true_model,
                                         double gamma, double c0, int T);

/// Objective expected-payoff shortfall of the cutoff strategy c relative to
/// the objectively optimal strategy; zero iff c is objectively optimal.
double welfare_loss(double c, const StageGame& game,
                    const TrueModel& true_model);

/// One society in a paired comparison.
struct SocietySpec {
  enum class Kind { known_var, unknown_var, payoff_variant, selection_mix };
  Kind kind = Kind::known_var;
  std::optional<StageGame> game;  // payoff_variant only
  double alpha = 0.0;             // selection_mix only

  static SocietySpec known_var() { return {Kind::known_var, {}, 0.0}; }
  static SocietySpec unknown_var() { return {Kind::unknown_var, {}, 0.0}; }
  static SocietySpec payoff_variant(StageGame g) {
    return {Kind::payoff_variant, std::move(g), 0.0};
  }
  static SocietySpec selection_mix(double alpha) {
    return {Kind::selection_mix, {}, alpha};
  }
};

struct ComparePair {
  GenerationTrace a;
  GenerationTrace b;
};

/// Paired auxiliary-environment traces for two societies sharing the true
/// model, bias, and initial condition.
ComparePair compare_societies(const SocietySpec& spec_a,
                              const SocietySpec& spec_b,
                              const StageGame& base_game,
                              const TrueModel& true_model, double gamma,
                              double c0, int T);

/// Steady state of the society that additionally misattributes
/// reference-dependent encoding of scale eta; iterates the prior-beliefs
/// update until self-consistency.
SteadyState steady_state_ref_dependence(const StageGame& game,
                                        const TrueModel& true_model,
                                        double gamma, double eta,
                                        double tol = 1e-10,
                                        int max_iter = 10000);

}  // namespace gfstop::dynamics
